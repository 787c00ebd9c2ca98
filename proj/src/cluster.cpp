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
#include "gpusched/cluster.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "gpusched/csv.hpp"
#include "gpusched/errors.hpp"

namespace gpusched {

namespace {

constexpr std::string_view kClusterHeader = "node_id,cpu_model,cpu_milli,memory_mib,gpu_model,gpu_count";

bool admits_models(const NodeState& node, const TaskSpec& task) {
  if (!model_set_admits(task.cpu_constraint, node.cpu_model)) return false;
  if (!task.gpu_constraint.empty()) {
    // A GPU-less node has no GPU model to match.
    if (node.gpu_model.empty()) return false;
    if (!model_set_admits(task.gpu_constraint, node.gpu_model)) return false;
  }
  return true;
}

std::int64_t count_free_gpus(const NodeState& node) {
  return std::count(node.gpu_unalloc_milli.begin(), node.gpu_unalloc_milli.end(), kMilliPerUnit);
}

bool gpu_usable_for_partial(Milli r, Milli d, Cond3Rule rule) {
  if (r < d) return false;
  // The literal budget only counts fractional remainders, so an idle GPU
  // (remainder 0) cannot take a partial task.
  return rule == Cond3Rule::kPermissive || r < kMilliPerUnit;
}

}  // namespace

Milli NodeState::gpu_unalloc_total() const {
  return std::accumulate(gpu_unalloc_milli.begin(), gpu_unalloc_milli.end(), Milli{0});
}

bool NodeState::is_idle() const {
  if (cpu_alloc_milli != 0 || mem_alloc_mib != 0) return false;
  return std::all_of(gpu_unalloc_milli.begin(), gpu_unalloc_milli.end(),
                     [](Milli r) { return r == kMilliPerUnit; });
}

bool NodeState::hosts_demand(const GpuDemand& demand) const {
  return std::find(resident_demands.begin(), resident_demands.end(), demand) !=
         resident_demands.end();
}

void check_invariants(const NodeState& node) {
  if (node.cpu_alloc_milli < 0 || node.cpu_alloc_milli > node.cpu_capacity_milli) {
    throw InvariantError("node " + node.id + ": cpu allocation out of range");
  }
  if (node.mem_alloc_mib < 0 || node.mem_alloc_mib > node.mem_capacity_mib) {
    throw InvariantError("node " + node.id + ": memory allocation out of range");
  }
  for (Milli r : node.gpu_unalloc_milli) {
    if (r < 0 || r > kMilliPerUnit) {
      throw InvariantError("node " + node.id + ": GPU unallocated milli out of range");
    }
  }
}

Milli gpu_budget(const NodeState& node) {
  Milli whole = 0;
  Milli best_fraction = 0;
  for (Milli r : node.gpu_unalloc_milli) {
    whole += (r / kMilliPerUnit) * kMilliPerUnit;
    best_fraction = std::max(best_fraction, r % kMilliPerUnit);
  }
  return whole + best_fraction;
}

bool is_feasible(const NodeState& node, const TaskSpec& task, Cond3Rule rule) {
  if (task.cpu_milli > node.cpu_unalloc_milli()) return false;
  if (task.memory_mib > node.mem_unalloc_mib()) return false;
  if (!admits_models(node, task)) return false;
  switch (task.gpu.kind()) {
    case GpuDemand::Kind::kCpuOnly:
      return true;
    case GpuDemand::Kind::kFull:
      return count_free_gpus(node) >= task.gpu.amount();
    case GpuDemand::Kind::kPartial:
      return std::any_of(node.gpu_unalloc_milli.begin(), node.gpu_unalloc_milli.end(),
                         [&](Milli r) { return gpu_usable_for_partial(r, task.gpu.amount(), rule); });
  }
  return false;
}

std::vector<Placement> candidate_placements(const NodeState& node, std::size_t node_index,
                                            const TaskSpec& task, Cond3Rule rule) {
  std::vector<Placement> out;
  if (!is_feasible(node, task, rule)) return out;
  switch (task.gpu.kind()) {
    case GpuDemand::Kind::kCpuOnly:
      out.push_back(Placement{node_index, {}});
      break;
    case GpuDemand::Kind::kPartial: {
      std::vector<Milli> seen;
      for (std::size_t g = 0; g < node.gpu_count(); ++g) {
        const Milli r = node.gpu_unalloc_milli[g];
        if (!gpu_usable_for_partial(r, task.gpu.amount(), rule)) continue;
        if (std::find(seen.begin(), seen.end(), r) != seen.end()) continue;
        seen.push_back(r);
        out.push_back(Placement{node_index, {static_cast<int>(g)}});
      }
      break;
    }
    case GpuDemand::Kind::kFull: {
      Placement p{node_index, {}};
      for (std::size_t g = 0; g < node.gpu_count() &&
                              static_cast<std::int64_t>(p.gpu_indices.size()) < task.gpu.amount();
           ++g) {
        if (node.gpu_unalloc_milli[g] == kMilliPerUnit) p.gpu_indices.push_back(static_cast<int>(g));
      }
      out.push_back(std::move(p));
      break;
    }
  }
  return out;
}

NodeState hypothetical_apply(const NodeState& node, const TaskSpec& task,
                             const std::vector<int>& gpu_indices) {
  auto overflow = [&](const std::string& what) {
    return ResourceOverflow("task " + task.id + " on node " + node.id + ": " + what);
  };
  if (task.cpu_milli < 0 || task.memory_mib < 0) throw overflow("negative demand");
  if (task.cpu_milli > node.cpu_unalloc_milli()) throw overflow("cpu exceeds unallocated");
  if (task.memory_mib > node.mem_unalloc_mib()) throw overflow("memory exceeds unallocated");
  if (!admits_models(node, task)) throw overflow("model constraint not met");

  std::size_t expected = 0;
  switch (task.gpu.kind()) {
    case GpuDemand::Kind::kCpuOnly: expected = 0; break;
    case GpuDemand::Kind::kPartial: expected = 1; break;
    case GpuDemand::Kind::kFull: expected = static_cast<std::size_t>(task.gpu.amount()); break;
  }
  if (gpu_indices.size() != expected) throw overflow("wrong number of GPU indices");

  NodeState next = node;
  for (std::size_t i = 0; i < gpu_indices.size(); ++i) {
    const int g = gpu_indices[i];
    if (g < 0 || static_cast<std::size_t>(g) >= node.gpu_count()) throw overflow("bad GPU index");
    if (std::find(gpu_indices.begin(), gpu_indices.begin() + i, g) != gpu_indices.begin() + i) {
      throw overflow("duplicate GPU index");
    }
    Milli& r = next.gpu_unalloc_milli[static_cast<std::size_t>(g)];
    if (task.gpu.is_full()) {
      if (r != kMilliPerUnit) throw overflow("GPU not fully free");
      r = 0;
    } else {
      if (r < task.gpu.amount()) throw overflow("GPU lacks free milli");
      r -= task.gpu.amount();
    }
  }
  next.cpu_alloc_milli += task.cpu_milli;
  next.mem_alloc_mib += task.memory_mib;
  if (!next.hosts_demand(task.gpu)) next.resident_demands.push_back(task.gpu);
  ++next.resident_tasks;
  return next;
}

void ClusterState::add_node(NodeState node) {
  if (node.id.empty()) throw ConfigError("node with empty id");
  if (index_.count(node.id) != 0) throw ConfigError("duplicate node id '" + node.id + "'");
  if (node.cpu_capacity_milli < 0 || node.mem_capacity_mib < 0) {
    throw ConfigError("node " + node.id + ": negative capacity");
  }
  if (node.has_gpus() && node.gpu_model.empty()) {
    throw ConfigError("node " + node.id + ": GPUs without a GPU model");
  }
  try {
    check_invariants(node);
  } catch (const InvariantError& e) {
    throw ConfigError(e.what());
  }
  total_gpu_milli_ += node.gpu_capacity_milli();
  total_cpu_milli_ += node.cpu_capacity_milli;
  total_mem_mib_ += node.mem_capacity_mib;
  max_cpu_ = std::max(max_cpu_, node.cpu_capacity_milli);
  max_mem_ = std::max(max_mem_, node.mem_capacity_mib);
  max_gpu_ = std::max(max_gpu_, node.gpu_capacity_milli());
  index_.emplace(node.id, nodes_.size());
  nodes_.push_back(std::move(node));
  rebuild_ranks();
}

void ClusterState::rebuild_ranks() {
  std::vector<std::size_t> order(nodes_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return nodes_[a].id < nodes_[b].id; });
  id_rank_.assign(nodes_.size(), 0);
  for (std::size_t rank = 0; rank < order.size(); ++rank) id_rank_[order[rank]] = rank;
}

std::ptrdiff_t ClusterState::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

void ClusterState::apply(const TaskSpec& task, const Placement& placement) {
  if (placement.node >= nodes_.size()) {
    throw ResourceOverflow("task " + task.id + ": placement on unknown node index");
  }
  nodes_[placement.node] = hypothetical_apply(nodes_[placement.node], task, placement.gpu_indices);
}

ClusterState parse_cluster_csv(std::istream& in, const std::string& origin) {
  csv::expect_header(in, kClusterHeader, origin);
  ClusterState cluster;
  std::string line;
  std::size_t row = 1;
  while (csv::read_line(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const std::string where = origin + " row " + std::to_string(row);
    auto f = csv::split(line);
    if (f.size() != 6) throw ConfigError(where + ": expected 6 fields, got " + std::to_string(f.size()));
    NodeState node;
    node.id = std::string(csv::trim(f[0]));
    node.cpu_model = std::string(csv::trim(f[1]));
    node.cpu_capacity_milli = csv::parse_int(f[2], where + " cpu_milli");
    node.mem_capacity_mib = csv::parse_int(f[3], where + " memory_mib");
    node.gpu_model = std::string(csv::trim(f[4]));
    const std::int64_t gpus = csv::parse_int(f[5], where + " gpu_count");
    if (gpus < 0) throw ConfigError(where + ": negative gpu_count");
    if (gpus > 0 && node.gpu_model.empty()) throw ConfigError(where + ": gpu_count without gpu_model");
    if (gpus == 0) node.gpu_model.clear();
    if (node.cpu_model.empty()) throw ConfigError(where + ": empty cpu_model");
    node.gpu_unalloc_milli.assign(static_cast<std::size_t>(gpus), kMilliPerUnit);
    try {
      cluster.add_node(std::move(node));
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return cluster;
}

ClusterState load_cluster_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cluster file '" + path + "'");
  return parse_cluster_csv(in, path);
}

void write_cluster_csv(std::ostream& out, const ClusterState& cluster) {
  out << kClusterHeader << '\n';
  for (const NodeState& n : cluster.nodes()) {
    out << n.id << ',' << n.cpu_model << ',' << n.cpu_capacity_milli << ',' << n.mem_capacity_mib
        << ',' << n.gpu_model << ',' << n.gpu_count() << '\n';
  }
}

std::vector<std::pair<std::string, std::int64_t>> gpu_model_counts(const ClusterState& cluster) {
  std::map<std::string, std::int64_t> counts;
  for (const NodeState& n : cluster.nodes()) {
    if (n.has_gpus()) counts[n.gpu_model] += static_cast<std::int64_t>(n.gpu_count());
  }
  return {counts.begin(), counts.end()};
}

}  // namespace gpusched
