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

namespace gpusched {

// How a CpuOnly class counts GPUs on a node that can host it: kLiteral
// treats every unallocated GPU milli as unusable by the class, kZero
// treats the class as contributing nothing.
enum class CpuOnlyFrag : std::uint8_t { kLiteral, kZero };

struct FragOptions {
  Cond3Rule rule = Cond3Rule::kPermissive;
  CpuOnlyFrag cpu_only = CpuOnlyFrag::kLiteral;
};

// A task class of the target workload. Popularity is weight / total
// weight; fragmentation is accumulated in integer weight units so that
// equal fragmentation values compare equal regardless of summation order.
struct TaskClass {
  Milli cpu_milli = 0;
  MiB memory_mib = 0;
  GpuDemand gpu;
  ModelSet gpu_constraint;
  std::int64_t weight = 0;
  double popularity = 0.0;
};

class TargetWorkload {
 public:
  TargetWorkload() = default;
  // Throws ConfigError on duplicate class keys, non-positive weights or an
  // empty class list.
  explicit TargetWorkload(std::vector<TaskClass> classes);

  const std::vector<TaskClass>& classes() const { return classes_; }
  std::int64_t total_weight() const { return total_weight_; }
  bool empty() const { return classes_.empty(); }

 private:
  std::vector<TaskClass> classes_;
  std::int64_t total_weight_ = 0;
};

// Classes keyed by (gpu demand, gpu constraint, cpu rounded to 500 milli,
// memory rounded to 1024 MiB); weight = number of tasks in the class.
// Throws ConfigError on an empty trace.
TargetWorkload derive_target_workload(const std::vector<TaskSpec>& trace);

// Workload file: cpu_milli,memory_mib,num_gpu,gpu_milli,gpu_spec,popularity
void write_workload_csv(std::ostream& out, const TargetWorkload& workload);
TargetWorkload parse_workload_csv(std::istream& in, const std::string& origin = "<stream>");

// F_n(m): unallocated GPU milli of the node that a task of class m cannot use.
Milli frag_node_for_class(const NodeState& node, const TaskClass& m, const FragOptions& opts = {});

// F_n(M) scaled by the workload's total weight (exact).
std::int64_t frag_node_weighted(const NodeState& node, const TargetWorkload& workload,
                                const FragOptions& opts = {});

// F_n(M) = sum_m p_m F_n(m), in milli.
double frag_node_expected(const NodeState& node, const TargetWorkload& workload,
                          const FragOptions& opts = {});

double frag_datacenter(const ClusterState& cluster, const TargetWorkload& workload,
                       const FragOptions& opts = {});

// F_{n^h}(M) - F_n(M) for the node touched by the placement.
double frag_delta(const ClusterState& cluster, const TaskSpec& task, const Placement& placement,
                  const TargetWorkload& workload, const FragOptions& opts = {});

// Same quantity in weight units.
std::int64_t frag_delta_weighted(const ClusterState& cluster, const TaskSpec& task,
                                 const Placement& placement, const TargetWorkload& workload,
                                 const FragOptions& opts = {});

}  // namespace gpusched
