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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gpusched/cluster.hpp"

namespace gpusched {

struct CpuProfile {
  double idle_w = 0.0;
  double max_w = 0.0;
  std::int64_t ncores = 1;
};

struct GpuProfile {
  double idle_w = 0.0;
  double max_w = 0.0;
};

// Idle/max power per hardware model.
class HardwareProfile {
 public:
  // Throws ConfigError if idle > max, idle < 0, ncores < 1 or the model is
  // already present.
  void add_cpu(const std::string& model, CpuProfile profile);
  void add_gpu(const std::string& model, GpuProfile profile);

  // Throw ConfigError for unknown models.
  const CpuProfile& cpu(const std::string& model) const;
  const GpuProfile& gpu(const std::string& model) const;

  bool has_cpu(const std::string& model) const { return cpu_.count(model) != 0; }
  bool has_gpu(const std::string& model) const { return gpu_.count(model) != 0; }

  const std::map<std::string, CpuProfile>& cpu_profiles() const { return cpu_; }
  const std::map<std::string, GpuProfile>& gpu_profiles() const { return gpu_; }

 private:
  std::map<std::string, CpuProfile> cpu_;
  std::map<std::string, GpuProfile> gpu_;
};

// Profile file: model,kind,idle_w,max_w,ncores  (kind is cpu or gpu).
HardwareProfile parse_profiles_csv(std::istream& in, const std::string& origin = "<stream>");
HardwareProfile load_profiles_csv(const std::string& path);

// Throws ConfigError naming the first node whose CPU or GPU model has no
// profile.
void check_models_known(const ClusterState& cluster, const HardwareProfile& profile);

struct PowerBreakdown {
  double cpu_w = 0.0;
  double gpu_w = 0.0;
  double total_w() const { return cpu_w + gpu_w; }
};

// CPU sockets are 2 * ncores vCPUs wide. Any socket holding allocated milli
// draws max power; whole unallocated sockets draw idle power.
double cpu_power(const NodeState& node, const HardwareProfile& profile);

// Every GPU with any allocated milli draws max power, the rest idle power.
double gpu_power(const NodeState& node, const HardwareProfile& profile);

PowerBreakdown node_power(const NodeState& node, const HardwareProfile& profile);

PowerBreakdown datacenter_power(const ClusterState& cluster, const HardwareProfile& profile);

// Increase of the node's power if `task` were placed on `gpu_indices` of
// node `placement.node`. Negative only on nodes whose vCPU count is not a
// multiple of the socket width.
double power_delta(const ClusterState& cluster, const TaskSpec& task, const Placement& placement,
                   const HardwareProfile& profile);

}  // namespace gpusched
