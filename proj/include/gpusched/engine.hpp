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
#include <string>
#include <vector>

#include "gpusched/cluster.hpp"
#include "gpusched/fragmentation.hpp"
#include "gpusched/policies.hpp"
#include "gpusched/power.hpp"
#include "gpusched/workload.hpp"

namespace gpusched {

// One checkpoint of a run, keyed by the requested-GPU ratio.
struct MetricSample {
  double ratio = 0.0;
  double eopc_w = 0.0;
  double eopc_cpu_w = 0.0;
  double eopc_gpu_w = 0.0;
  double grar = 1.0;
  std::int64_t frag_milli = 0;
  std::int64_t tasks_arrived = 0;
  std::int64_t tasks_failed = 0;

  bool operator==(const MetricSample&) const = default;
};

struct TaskOutcome {
  std::string task_id;
  std::ptrdiff_t node = -1;  // -1 when the task failed
  Milli gpu_milli = 0;
};

struct RunLedger {
  std::string policy;
  std::uint64_t seed = 0;
  Milli requested_milli = 0;
  Milli allocated_milli = 0;
  std::vector<TaskOutcome> outcomes;
  std::vector<MetricSample> samples;
};

// Ledger file: policy,seed,ratio,eopc_w,eopc_cpu_w,eopc_gpu_w,grar,
// frag_milli,tasks_arrived,tasks_failed
void write_ledger_csv(std::ostream& out, const RunLedger& ledger);
void save_ledger_csv(const std::string& path, const RunLedger& ledger);
// Reads samples back; outcomes are not part of the file.
RunLedger parse_ledger_csv(std::istream& in, const std::string& origin = "<stream>");
RunLedger load_ledger_csv(const std::string& path);

struct RunOptions {
  std::uint64_t seed = 0;
  // Checkpoints per unit of requested-GPU ratio (1 / checkpoint step).
  int checkpoints = 100;
  double stop_ratio = 1.0;
  FragOptions frag{};
  // Recompute power and fragmentation from scratch at every checkpoint and
  // throw InvariantError on disagreement with the incremental totals.
  bool verify = false;
  // Keep a per-task outcome list in the ledger.
  bool record_outcomes = true;
};

// Converts a checkpoint step (e.g. 0.01) into a checkpoint count. Throws
// ConfigError unless the step divides 1.0.
int checkpoints_for_step(double step);

// Cluster state plus incrementally tracked power and fragmentation totals.
// Decisions are applied one at a time.
class Simulator {
 public:
  Simulator(ClusterState cluster, const HardwareProfile& profile, const TargetWorkload& workload,
            PolicyConfig policy, FragOptions frag = {});

  // Selects a node and, on success, commits the placement and updates the
  // tracked totals. Failed decisions leave the state untouched.
  Decision schedule_one(const TaskSpec& task);

  const ClusterState& cluster() const { return cluster_; }
  const PolicyConfig& policy() const { return policy_; }
  PowerBreakdown power() const { return {cpu_w_, gpu_w_}; }
  // Datacenter fragmentation in milli.
  double fragmentation() const;

  // Throws InvariantError if the tracked totals differ from a full
  // recomputation (1e-6 W for power, exact for fragmentation).
  void verify() const;

 private:
  ClusterState cluster_;
  const HardwareProfile* profile_;
  const TargetWorkload* workload_;
  PolicyConfig policy_;
  FragOptions frag_;
  std::vector<PowerBreakdown> node_power_;
  std::vector<std::int64_t> node_frag_;
  double cpu_w_ = 0.0;
  double gpu_w_ = 0.0;
  std::int64_t frag_weighted_ = 0;
};

// Online scheduling loop over a seeded inflation stream of `trace`.
// Failed tasks are dropped. A sample is taken each time the requested
// ratio reaches the next multiple of 1 / checkpoints.
RunLedger run(const ClusterState& cluster, const HardwareProfile& profile, const Trace& trace,
              const TargetWorkload& workload, const PolicyConfig& policy,
              const RunOptions& options);

}  // namespace gpusched
