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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "gpusched/types.hpp"

namespace gpusched {

// Feasibility rule for fractional GPU demands. kPermissive admits a
// partial task on any GPU with enough free milli (including an idle GPU);
// kStrict applies the literal d <= u_n - floor(u_n) budget test.
enum class Cond3Rule : std::uint8_t { kPermissive, kStrict };

struct NodeState {
  std::string id;
  std::string cpu_model;
  std::string gpu_model;  // empty for GPU-less nodes
  Milli cpu_capacity_milli = 0;
  MiB mem_capacity_mib = 0;
  std::vector<Milli> gpu_unalloc_milli;  // one entry per GPU, in [0, 1000]
  Milli cpu_alloc_milli = 0;
  MiB mem_alloc_mib = 0;
  // Distinct GPU demand classes of the tasks hosted here (GpuClustering).
  std::vector<GpuDemand> resident_demands;
  std::int64_t resident_tasks = 0;

  Milli cpu_unalloc_milli() const { return cpu_capacity_milli - cpu_alloc_milli; }
  MiB mem_unalloc_mib() const { return mem_capacity_mib - mem_alloc_mib; }
  std::size_t gpu_count() const { return gpu_unalloc_milli.size(); }
  bool has_gpus() const { return !gpu_unalloc_milli.empty(); }
  Milli gpu_capacity_milli() const {
    return static_cast<Milli>(gpu_unalloc_milli.size()) * kMilliPerUnit;
  }
  Milli gpu_unalloc_total() const;
  // No CPU, memory or GPU allocated.
  bool is_idle() const;
  bool hosts_demand(const GpuDemand& demand) const;

  bool operator==(const NodeState&) const = default;
};

// Throws InvariantError when a NodeState invariant is broken.
void check_invariants(const NodeState& node);

struct Placement {
  std::size_t node = 0;  // index into ClusterState::nodes()
  std::vector<int> gpu_indices;

  bool operator==(const Placement&) const = default;
};

// u_n in milli: whole free GPUs plus the largest fractional remainder.
Milli gpu_budget(const NodeState& node);

bool is_feasible(const NodeState& node, const TaskSpec& task,
                 Cond3Rule rule = Cond3Rule::kPermissive);

// Intra-node placement choices for a feasible task. CpuOnly: one empty
// placement. Partial(d): one per distinct free amount r_g >= d, on the
// lowest-index GPU with that amount. Full(k): the k
// lowest-index fully free GPUs. Empty when infeasible.
std::vector<Placement> candidate_placements(const NodeState& node, std::size_t node_index,
                                            const TaskSpec& task,
                                            Cond3Rule rule = Cond3Rule::kPermissive);

// Applies the placement to a copy of `node`. Throws ResourceOverflow when
// the placement does not fit.
NodeState hypothetical_apply(const NodeState& node, const TaskSpec& task,
                             const std::vector<int>& gpu_indices);

class ClusterState {
 public:
  ClusterState() = default;

  // Throws ConfigError on duplicate ids or invalid capacities.
  void add_node(NodeState node);

  const std::vector<NodeState>& nodes() const { return nodes_; }
  const NodeState& node(std::size_t index) const { return nodes_.at(index); }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  // Position of the node in lexicographic id order; used for tie-breaks.
  std::size_t id_rank(std::size_t index) const { return id_rank_[index]; }
  // Index of the node with the given id, or -1.
  std::ptrdiff_t find(const std::string& id) const;

  Milli total_gpu_milli() const { return total_gpu_milli_; }
  Milli total_cpu_milli() const { return total_cpu_milli_; }
  MiB total_mem_mib() const { return total_mem_mib_; }
  std::int64_t total_gpus() const { return total_gpu_milli_ / kMilliPerUnit; }

  // Largest per-node capacity in each dimension.
  Milli max_cpu_capacity() const { return max_cpu_; }
  MiB max_mem_capacity() const { return max_mem_; }
  Milli max_gpu_capacity() const { return max_gpu_; }

  // Commits a placement. Nodes other than placement.node are untouched.
  // Throws ResourceOverflow when the placement does not fit.
  void apply(const TaskSpec& task, const Placement& placement);

  bool operator==(const ClusterState& other) const { return nodes_ == other.nodes_; }

 private:
  void rebuild_ranks();

  std::vector<NodeState> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> id_rank_;
  Milli total_gpu_milli_ = 0;
  Milli total_cpu_milli_ = 0;
  MiB total_mem_mib_ = 0;
  Milli max_cpu_ = 0;
  MiB max_mem_ = 0;
  Milli max_gpu_ = 0;
};

// Cluster file: node_id,cpu_model,cpu_milli,memory_mib,gpu_model,gpu_count
ClusterState parse_cluster_csv(std::istream& in, const std::string& origin = "<stream>");
ClusterState load_cluster_csv(const std::string& path);
void write_cluster_csv(std::ostream& out, const ClusterState& cluster);

// Per-model GPU counts, sorted by model name.
std::vector<std::pair<std::string, std::int64_t>> gpu_model_counts(const ClusterState& cluster);

}  // namespace gpusched
