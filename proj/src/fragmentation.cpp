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
#include "gpusched/fragmentation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>

#include "gpusched/csv.hpp"
#include "gpusched/errors.hpp"

namespace gpusched {

namespace {

constexpr std::string_view kWorkloadHeader =
    "cpu_milli,memory_mib,num_gpu,gpu_milli,gpu_spec,popularity";
constexpr double kImportWeightScale = 1e9;

using ClassKey = std::tuple<GpuDemand, ModelSet, Milli, MiB>;

ClassKey key_of(const TaskClass& c) {
  return {c.gpu, c.gpu_constraint, c.cpu_milli, c.memory_mib};
}

Milli round_to(Milli value, Milli step) { return ((value + step / 2) / step) * step; }

// Per-node quantities shared by every class evaluation.
struct NodeSummary {
  Milli unalloc_sum = 0;
  std::int64_t free_gpus = 0;
  Milli best_partial_slot = -1;  // largest r usable by a partial task
};

NodeSummary summarize(const NodeState& node, Cond3Rule rule) {
  NodeSummary s;
  for (Milli r : node.gpu_unalloc_milli) {
    s.unalloc_sum += r;
    if (r == kMilliPerUnit) ++s.free_gpus;
    if (rule == Cond3Rule::kPermissive || r < kMilliPerUnit) {
      s.best_partial_slot = std::max(s.best_partial_slot, r);
    }
  }
  return s;
}

bool hostable(const NodeState& node, const NodeSummary& s, const TaskClass& m) {
  if (m.cpu_milli > node.cpu_unalloc_milli()) return false;
  if (m.memory_mib > node.mem_unalloc_mib()) return false;
  if (!m.gpu_constraint.empty()) {
    if (node.gpu_model.empty() || !model_set_admits(m.gpu_constraint, node.gpu_model)) return false;
  }
  switch (m.gpu.kind()) {
    case GpuDemand::Kind::kCpuOnly:
      return true;
    case GpuDemand::Kind::kFull:
      return s.free_gpus >= m.gpu.amount();
    case GpuDemand::Kind::kPartial:
      return s.best_partial_slot >= m.gpu.amount();
  }
  return false;
}

Milli frag_for_class(const NodeState& node, const NodeSummary& s, const TaskClass& m,
                     const FragOptions& opts) {
  if (!hostable(node, s, m)) return s.unalloc_sum;
  switch (m.gpu.kind()) {
    case GpuDemand::Kind::kCpuOnly:
      return opts.cpu_only == CpuOnlyFrag::kLiteral ? s.unalloc_sum : 0;
    case GpuDemand::Kind::kFull:
      return s.unalloc_sum - s.free_gpus * kMilliPerUnit;
    case GpuDemand::Kind::kPartial: {
      const Milli d = m.gpu.amount();
      Milli frag = 0;
      for (Milli r : node.gpu_unalloc_milli) {
        const bool usable = r >= d && (opts.rule == Cond3Rule::kPermissive || r < kMilliPerUnit);
        if (!usable) frag += r;
      }
      return frag;
    }
  }
  return s.unalloc_sum;
}

}  // namespace

TargetWorkload::TargetWorkload(std::vector<TaskClass> classes) : classes_(std::move(classes)) {
  if (classes_.empty()) throw ConfigError("target workload has no classes");
  std::map<ClassKey, int> seen;
  for (const TaskClass& c : classes_) {
    if (c.weight <= 0) throw ConfigError("target workload class with non-positive weight");
    if (!seen.emplace(key_of(c), 0).second) throw ConfigError("duplicate target workload class");
    total_weight_ += c.weight;
  }
  for (TaskClass& c : classes_) {
    c.popularity = static_cast<double>(c.weight) / static_cast<double>(total_weight_);
  }
}

TargetWorkload derive_target_workload(const std::vector<TaskSpec>& trace) {
  if (trace.empty()) throw ConfigError("cannot derive a target workload from an empty trace");
  std::vector<TaskClass> classes;
  std::map<ClassKey, std::size_t> index;
  for (const TaskSpec& t : trace) {
    TaskClass c;
    c.cpu_milli = round_to(t.cpu_milli, 500);
    c.memory_mib = round_to(t.memory_mib, 1024);
    c.gpu = t.gpu;
    c.gpu_constraint = t.gpu_constraint;
    auto [it, inserted] = index.emplace(key_of(c), classes.size());
    if (inserted) {
      c.weight = 1;
      classes.push_back(std::move(c));
    } else {
      ++classes[it->second].weight;
    }
  }
  return TargetWorkload(std::move(classes));
}

void write_workload_csv(std::ostream& out, const TargetWorkload& workload) {
  out << kWorkloadHeader << '\n';
  for (const TaskClass& c : workload.classes()) {
    std::int64_t num_gpu = 0;
    Milli gpu_milli = 0;
    if (c.gpu.is_full()) {
      num_gpu = c.gpu.amount();
      gpu_milli = kMilliPerUnit;
    } else if (c.gpu.is_partial()) {
      gpu_milli = c.gpu.amount();
    }
    std::string spec;
    for (const std::string& m : c.gpu_constraint) {
      if (!spec.empty()) spec += ';';
      spec += m;
    }
    out << c.cpu_milli << ',' << c.memory_mib << ',' << num_gpu << ',' << gpu_milli << ',' << spec
        << ',' << csv::format_real(c.popularity) << '\n';
  }
}

TargetWorkload parse_workload_csv(std::istream& in, const std::string& origin) {
  csv::expect_header(in, kWorkloadHeader, origin);
  std::vector<TaskClass> classes;
  std::string line;
  std::size_t row = 1;
  while (csv::read_line(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const std::string where = origin + " row " + std::to_string(row);
    auto f = csv::split(line);
    if (f.size() != 6) throw ConfigError(where + ": expected 6 fields");
    TaskClass c;
    c.cpu_milli = csv::parse_int(f[0], where + " cpu_milli");
    c.memory_mib = csv::parse_int(f[1], where + " memory_mib");
    const std::int64_t num_gpu = csv::parse_int(f[2], where + " num_gpu");
    const Milli gpu_milli = csv::parse_int(f[3], where + " gpu_milli");
    try {
      if (num_gpu > 0) {
        c.gpu = GpuDemand::full(num_gpu);
      } else if (gpu_milli > 0) {
        c.gpu = GpuDemand::partial(gpu_milli);
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
    std::vector<std::string> models;
    for (auto m : csv::split(csv::trim(f[4]), ';')) models.emplace_back(csv::trim(m));
    c.gpu_constraint = make_model_set(std::move(models));
    const double popularity = csv::parse_real(f[5], where + " popularity");
    if (popularity < 0.0 || popularity > 1.0) throw ConfigError(where + ": popularity outside [0,1]");
    c.weight = std::llround(popularity * kImportWeightScale);
    if (c.weight == 0) continue;
    classes.push_back(std::move(c));
  }
  return TargetWorkload(std::move(classes));
}

Milli frag_node_for_class(const NodeState& node, const TaskClass& m, const FragOptions& opts) {
  return frag_for_class(node, summarize(node, opts.rule), m, opts);
}

std::int64_t frag_node_weighted(const NodeState& node, const TargetWorkload& workload,
                                const FragOptions& opts) {
  if (!node.has_gpus()) return 0;
  const NodeSummary s = summarize(node, opts.rule);
  if (s.unalloc_sum == 0) return 0;
  std::int64_t total = 0;
  for (const TaskClass& m : workload.classes()) total += m.weight * frag_for_class(node, s, m, opts);
  return total;
}

double frag_node_expected(const NodeState& node, const TargetWorkload& workload,
                          const FragOptions& opts) {
  if (workload.empty()) return 0.0;
  return static_cast<double>(frag_node_weighted(node, workload, opts)) /
         static_cast<double>(workload.total_weight());
}

double frag_datacenter(const ClusterState& cluster, const TargetWorkload& workload,
                       const FragOptions& opts) {
  if (workload.empty()) return 0.0;
  std::int64_t total = 0;
  for (const NodeState& n : cluster.nodes()) total += frag_node_weighted(n, workload, opts);
  return static_cast<double>(total) / static_cast<double>(workload.total_weight());
}

std::int64_t frag_delta_weighted(const ClusterState& cluster, const TaskSpec& task,
                                 const Placement& placement, const TargetWorkload& workload,
                                 const FragOptions& opts) {
  const NodeState& before = cluster.node(placement.node);
  const NodeState after = hypothetical_apply(before, task, placement.gpu_indices);
  return frag_node_weighted(after, workload, opts) - frag_node_weighted(before, workload, opts);
}

double frag_delta(const ClusterState& cluster, const TaskSpec& task, const Placement& placement,
                  const TargetWorkload& workload, const FragOptions& opts) {
  if (workload.empty()) return 0.0;
  return static_cast<double>(frag_delta_weighted(cluster, task, placement, workload, opts)) /
         static_cast<double>(workload.total_weight());
}

}  // namespace gpusched
