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
#include "gpusched/power.hpp"

#include <cmath>
#include <fstream>
#include <istream>

#include "gpusched/csv.hpp"
#include "gpusched/errors.hpp"

namespace gpusched {

namespace {

constexpr std::string_view kProfileHeader = "model,kind,idle_w,max_w,ncores";

void check_range(const std::string& model, double idle_w, double max_w) {
  if (!(idle_w >= 0.0) || !(max_w >= idle_w)) {
    throw ConfigError("profile " + model + ": need 0 <= idle_w <= max_w");
  }
}

}  // namespace

void HardwareProfile::add_cpu(const std::string& model, CpuProfile profile) {
  check_range(model, profile.idle_w, profile.max_w);
  if (profile.ncores < 1) throw ConfigError("profile " + model + ": ncores must be >= 1");
  if (!cpu_.emplace(model, profile).second) {
    throw ConfigError("duplicate CPU profile '" + model + "'");
  }
}

void HardwareProfile::add_gpu(const std::string& model, GpuProfile profile) {
  check_range(model, profile.idle_w, profile.max_w);
  if (!gpu_.emplace(model, profile).second) {
    throw ConfigError("duplicate GPU profile '" + model + "'");
  }
}

const CpuProfile& HardwareProfile::cpu(const std::string& model) const {
  auto it = cpu_.find(model);
  if (it == cpu_.end()) throw ConfigError("unknown CPU model '" + model + "'");
  return it->second;
}

const GpuProfile& HardwareProfile::gpu(const std::string& model) const {
  auto it = gpu_.find(model);
  if (it == gpu_.end()) throw ConfigError("unknown GPU model '" + model + "'");
  return it->second;
}

HardwareProfile parse_profiles_csv(std::istream& in, const std::string& origin) {
  csv::expect_header(in, kProfileHeader, origin);
  HardwareProfile profile;
  std::string line;
  std::size_t row = 1;
  while (csv::read_line(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const std::string where = origin + " row " + std::to_string(row);
    auto f = csv::split(line);
    if (f.size() != 5) throw ConfigError(where + ": expected 5 fields");
    const std::string model(csv::trim(f[0]));
    const std::string_view kind = csv::trim(f[1]);
    const double idle = csv::parse_real(f[2], where + " idle_w");
    const double max = csv::parse_real(f[3], where + " max_w");
    try {
      if (kind == "cpu") {
        profile.add_cpu(model, {idle, max, csv::parse_int(f[4], where + " ncores")});
      } else if (kind == "gpu") {
        if (!csv::trim(f[4]).empty()) throw ConfigError("ncores must be empty for GPUs");
        profile.add_gpu(model, {idle, max});
      } else {
        throw ConfigError("kind must be cpu or gpu, got '" + std::string(kind) + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return profile;
}

HardwareProfile load_profiles_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile file '" + path + "'");
  return parse_profiles_csv(in, path);
}

void check_models_known(const ClusterState& cluster, const HardwareProfile& profile) {
  for (const NodeState& n : cluster.nodes()) {
    if (!profile.has_cpu(n.cpu_model)) {
      throw ConfigError("node " + n.id + ": no profile for CPU model '" + n.cpu_model + "'");
    }
    if (n.has_gpus() && !profile.has_gpu(n.gpu_model)) {
      throw ConfigError("node " + n.id + ": no profile for GPU model '" + n.gpu_model + "'");
    }
  }
}

double cpu_power(const NodeState& node, const HardwareProfile& profile) {
  const CpuProfile& cpu = profile.cpu(node.cpu_model);
  const Milli socket = 2 * cpu.ncores * kMilliPerUnit;
  const Milli used = node.cpu_alloc_milli;
  const Milli free = node.cpu_unalloc_milli();
  const Milli active_sockets = (used + socket - 1) / socket;
  const Milli idle_sockets = free / socket;
  return cpu.max_w * static_cast<double>(active_sockets) +
         cpu.idle_w * static_cast<double>(idle_sockets);
}

double gpu_power(const NodeState& node, const HardwareProfile& profile) {
  if (!node.has_gpus()) return 0.0;
  const GpuProfile& gpu = profile.gpu(node.gpu_model);
  std::int64_t active = 0;
  for (Milli r : node.gpu_unalloc_milli) {
    if (r < kMilliPerUnit) ++active;
  }
  const auto idle = static_cast<std::int64_t>(node.gpu_count()) - active;
  return gpu.max_w * static_cast<double>(active) + gpu.idle_w * static_cast<double>(idle);
}

PowerBreakdown node_power(const NodeState& node, const HardwareProfile& profile) {
  return {cpu_power(node, profile), gpu_power(node, profile)};
}

PowerBreakdown datacenter_power(const ClusterState& cluster, const HardwareProfile& profile) {
  PowerBreakdown total;
  for (const NodeState& n : cluster.nodes()) {
    const PowerBreakdown p = node_power(n, profile);
    total.cpu_w += p.cpu_w;
    total.gpu_w += p.gpu_w;
  }
  return total;
}

double power_delta(const ClusterState& cluster, const TaskSpec& task, const Placement& placement,
                   const HardwareProfile& profile) {
  const NodeState& before = cluster.node(placement.node);
  const NodeState after = hypothetical_apply(before, task, placement.gpu_indices);
  return node_power(after, profile).total_w() - node_power(before, profile).total_w();
}

}  // namespace gpusched
