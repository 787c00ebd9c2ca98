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

#include <string>
#include <utility>
#include <vector>

#include "gpusched/engine.hpp"

namespace gpusched::testing {

inline const char* kCpuModel = "Xeon ES-2682 V4";

inline HardwareProfile reference_profile() {
  HardwareProfile p;
  p.add_cpu(kCpuModel, {15.0, 120.0, 16});
  p.add_gpu("V100M16", {30.0, 300.0});
  p.add_gpu("V100M32", {30.0, 300.0});
  p.add_gpu("P100", {25.0, 250.0});
  p.add_gpu("T4", {10.0, 70.0});
  p.add_gpu("A10", {30.0, 150.0});
  p.add_gpu("G2", {30.0, 150.0});
  p.add_gpu("G3", {50.0, 400.0});
  return p;
}

inline NodeState make_node(std::string id, std::int64_t vcpus, std::string gpu_model,
                           std::vector<Milli> gpu_unalloc, MiB memory_mib = 262144) {
  NodeState n;
  n.id = std::move(id);
  n.cpu_model = kCpuModel;
  n.gpu_model = gpu_unalloc.empty() ? std::string() : std::move(gpu_model);
  n.cpu_capacity_milli = vcpus * kMilliPerUnit;
  n.mem_capacity_mib = memory_mib;
  n.gpu_unalloc_milli = std::move(gpu_unalloc);
  return n;
}

inline ClusterState make_cluster(std::vector<NodeState> nodes) {
  ClusterState c;
  for (NodeState& n : nodes) c.add_node(std::move(n));
  return c;
}

inline TaskSpec make_task(std::string id, Milli cpu_milli, GpuDemand gpu, MiB memory_mib = 1024,
                          std::vector<std::string> gpu_models = {}) {
  TaskSpec t;
  t.id = std::move(id);
  t.cpu_milli = cpu_milli;
  t.memory_mib = memory_mib;
  t.gpu = gpu;
  t.gpu_constraint = make_model_set(std::move(gpu_models));
  return t;
}

inline TaskClass make_class(GpuDemand gpu, std::int64_t weight, Milli cpu_milli = 1000,
                            MiB memory_mib = 1024) {
  TaskClass c;
  c.cpu_milli = cpu_milli;
  c.memory_mib = memory_mib;
  c.gpu = gpu;
  c.weight = weight;
  return c;
}

inline std::string data_path(const std::string& name) {
  return std::string(GPUSCHED_DATA_DIR) + "/" + name;
}

}  // namespace gpusched::testing
