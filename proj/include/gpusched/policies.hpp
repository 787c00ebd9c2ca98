/*
 * gpusched
 * Copyright (c) The gpusched Authors.
 * All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * THIS CODE IS PROVIDED ON AN *AS IS* BASIS, WITHOUT WARRANTIES OR
 * CONDITIONS OF ANY KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT
 * LIMITATION ANY IMPLIED WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR
 * A PARTICULAR PURPOSE, MERCHANTABLITY OR NON-INFRINGEMENT.
 *
 * See the Apache Version 2.0 License for specific language governing
 * permissions and limitations under the License.
 */
#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gpusched/cluster.hpp"
#include "gpusched/fragmentation.hpp"
#include "gpusched/power.hpp"

namespace gpusched {

// Read-only view of everything a score plugin may look at.
struct ScoringContext {
  const ClusterState& cluster;
  const HardwareProfile& profile;
  const TargetWorkload& workload;
  FragOptions frag{};
};

// A cost function over candidate placements: lower raw score is better.
class ScorePlugin {
 public:
  virtual ~ScorePlugin() = default;

  virtual std::string_view name() const = 0;

  virtual double raw_score(const ScoringContext& ctx, const TaskSpec& task,
                           const Placement& placement) const = 0;

  // Scores every placement of one node. `placements` all target the same
  // node. Overridden where per-node work can be shared.
  virtual void score_node(const ScoringContext& ctx, const TaskSpec& task,
                          std::span<const Placement> placements, std::span<double> out) const;
};

double pwr_raw(const ScoringContext& ctx, const TaskSpec& task, const Placement& placement);
double fgd_raw(const ScoringContext& ctx, const TaskSpec& task, const Placement& placement);
double bestfit_raw(const ScoringContext& ctx, const TaskSpec& task, const Placement& placement);
double dotprod_raw(const ScoringContext& ctx, const TaskSpec& task, const Placement& placement);
double gpupacking_raw(const ScoringContext& ctx, const TaskSpec& task, const Placement& placement);
double gpuclustering_raw(const ScoringContext& ctx, const TaskSpec& task,
                         const Placement& placement);

// One of pwr, fgd, bestfit, dotprod, gpupacking, gpuclustering.
// Throws ConfigError for anything else.
std::shared_ptr<const ScorePlugin> make_plugin(std::string_view name);

const std::vector<std::string>& plugin_names();

// Min-max normalization to [0, 100], higher is better: 100 * (max - v) /
// (max - min), or 100 everywhere when all values are equal. Throws
// ConfigError on empty input.
std::vector<double> normalize(std::span<const double> raw);

struct PolicyComponent {
  std::shared_ptr<const ScorePlugin> plugin;
  double weight = 0.0;
};

class PolicyConfig {
 public:
  // Throws ConfigError when empty, a weight is negative or non-finite, or
  // all weights are zero.
  explicit PolicyConfig(std::vector<PolicyComponent> components);

  static PolicyConfig single(std::string_view plugin);
  // alpha_permille * PWR + (1000 - alpha_permille) * FGD.
  static PolicyConfig alpha(int alpha_permille);
  // `pwr`, `fgd`, ... or `name:w+name:w` with integer per-mille weights.
  static PolicyConfig parse(std::string_view spec);

  const std::vector<PolicyComponent>& components() const { return components_; }
  // Canonical spec string, e.g. "fgd" or "pwr:100+fgd:900".
  const std::string& name() const { return name_; }

 private:
  std::vector<PolicyComponent> components_;
  std::string name_;
};

struct NodeScore {
  std::size_t node = 0;
  std::vector<double> raw;         // per component, at that component's best placement
  std::vector<double> normalized;  // per component
  double combined = 0.0;
};

struct Decision {
  bool scheduled = false;
  Placement placement;
  std::string reason;             // set when not scheduled
  std::vector<NodeScore> scores;  // filled only when auditing
};

// Filters infeasible nodes, scores the rest with every weighted component,
// normalizes per component across nodes and picks the node with the highest
// weighted combination. Ties go to the lexicographically smallest node id.
Decision select(const ScoringContext& ctx, const TaskSpec& task, const PolicyConfig& policy,
                bool audit = false);

}  // namespace gpusched
