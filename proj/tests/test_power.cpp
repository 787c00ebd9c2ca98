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
#include <sstream>

#include "doctest.h"
#include "gpusched/errors.hpp"
#include "support.hpp"

using namespace gpusched;
using namespace gpusched::testing;

namespace {

NodeState t4_node(Milli cpu_alloc, std::vector<Milli> gpus) {
  NodeState n = make_node("n", 96, "T4", std::move(gpus), 393216);
  n.cpu_alloc_milli = cpu_alloc;
  return n;
}

}  // namespace

TEST_SUITE("power") {
  TEST_CASE("cpu power steps per socket") {
    const HardwareProfile p = reference_profile();
    CHECK(cpu_power(t4_node(0, {}), p) == doctest::Approx(45.0).epsilon(1e-12));
    CHECK(cpu_power(t4_node(1000, {}), p) == doctest::Approx(150.0).epsilon(1e-12));
    CHECK(cpu_power(t4_node(96000, {}), p) == doctest::Approx(360.0).epsilon(1e-12));
    CHECK(cpu_power(t4_node(1, {}), p) == doctest::Approx(150.0).epsilon(1e-12));
    CHECK(cpu_power(t4_node(32000, {}), p) == doctest::Approx(150.0).epsilon(1e-12));
    CHECK(cpu_power(t4_node(32001, {}), p) == doctest::Approx(255.0).epsilon(1e-12));
  }

  TEST_CASE("gpu power counts active gpus") {
    const HardwareProfile p = reference_profile();
    const std::vector<Milli> idle(8, 1000);
    CHECK(gpu_power(t4_node(0, idle), p) == doctest::Approx(80.0));
    std::vector<Milli> three = idle;
    three[0] = 500;
    three[3] = 0;
    three[7] = 999;
    CHECK(gpu_power(t4_node(0, three), p) == doctest::Approx(260.0));
    CHECK(gpu_power(t4_node(0, {}), p) == 0.0);
  }

  TEST_CASE("node power") {
    const HardwareProfile p = reference_profile();
    CHECK(node_power(t4_node(0, std::vector<Milli>(8, 1000)), p).total_w() == doctest::Approx(125.0));
    CHECK(node_power(t4_node(96000, std::vector<Milli>(8, 0)), p).total_w() == doctest::Approx(920.0));
    CHECK(node_power(make_node("n", 32, "", {}), p).total_w() == doctest::Approx(15.0));
  }

  TEST_CASE("datacenter power is additive") {
    const HardwareProfile p = reference_profile();
    CHECK(datacenter_power(ClusterState{}, p).total_w() == 0.0);
    const ClusterState two = make_cluster({t4_node(0, std::vector<Milli>(8, 1000)),
                                           [] {
                                             NodeState n = t4_node(0, std::vector<Milli>(8, 1000));
                                             n.id = "m";
                                             return n;
                                           }()});
    const PowerBreakdown b = datacenter_power(two, p);
    CHECK(b.total_w() == doctest::Approx(250.0));
    CHECK(b.cpu_w == doctest::Approx(90.0));
    CHECK(b.gpu_w == doctest::Approx(160.0));
  }

  TEST_CASE("power delta examples") {
    const HardwareProfile p = reference_profile();
    NodeState active = make_node("a", 32, "T4", {500, 1000});
    active.cpu_alloc_milli = 1000;
    const ClusterState c = make_cluster({active});
    const TaskSpec half = make_task("t", 1000, GpuDemand::partial(500));
    CHECK(power_delta(c, half, Placement{0, {0}}, p) == doctest::Approx(0.0));
    CHECK(power_delta(c, half, Placement{0, {1}}, p) == doctest::Approx(60.0));

    const ClusterState v = make_cluster({make_node("v", 32, "V100M32", {1000, 1000})});
    CHECK(power_delta(v, make_task("f", 1000, GpuDemand::full(1)), Placement{0, {0}}, p) ==
          doctest::Approx(375.0));
  }

  TEST_CASE("reference cluster idle power matches a hand total") {
    const HardwareProfile p = load_profiles_csv(data_path("profiles_default.csv"));
    const ClusterState c = load_cluster_csv(data_path("cluster_default.csv"));
    const double gpu_idle = 195 * 30.0 + 204 * 30.0 + 265 * 25.0 + 842 * 10.0 + 2 * 30.0 +
                            4392 * 30.0 + 312 * 50.0;
    // Idle sockets: 96-vCPU nodes have 3, 128-vCPU nodes 4, 64-vCPU nodes 2,
    // 32-vCPU nodes 1, and the single 74-vCPU node 2.
    const std::int64_t sockets = (549 + 24 + 1 + 25 + 1 + 242) * 3 + 39 * 4 +
                                 (66 + 1 + 16 + 178 + 1 + 67) * 2 + 2 * 1 + 1 * 2;
    const PowerBreakdown b = datacenter_power(c, p);
    CHECK(b.gpu_w == doctest::Approx(gpu_idle).epsilon(1e-12));
    CHECK(b.cpu_w == doctest::Approx(15.0 * static_cast<double>(sockets)).epsilon(1e-12));
  }

  TEST_CASE("profile file parsing") {
    const HardwareProfile p = load_profiles_csv(data_path("profiles_default.csv"));
    CHECK(p.cpu("Xeon ES-2682 V4").ncores == 16);
    CHECK(p.gpu("G3").max_w == 400.0);
    CHECK_THROWS_AS(p.gpu("H100"), ConfigError);

    std::istringstream bad_kind("model,kind,idle_w,max_w,ncores\nX,tpu,1,2,\n");
    CHECK_THROWS_AS(parse_profiles_csv(bad_kind), ConfigError);
    std::istringstream gpu_with_cores("model,kind,idle_w,max_w,ncores\nX,gpu,1,2,4\n");
    CHECK_THROWS_AS(parse_profiles_csv(gpu_with_cores), ConfigError);
    std::istringstream idle_above_max("model,kind,idle_w,max_w,ncores\nX,gpu,5,2,\n");
    CHECK_THROWS_AS(parse_profiles_csv(idle_above_max), ConfigError);
    std::istringstream duplicate("model,kind,idle_w,max_w,ncores\nX,gpu,1,2,\nX,gpu,1,2,\n");
    CHECK_THROWS_AS(parse_profiles_csv(duplicate), ConfigError);
  }

  TEST_CASE("unknown models are rejected before simulation") {
    const HardwareProfile p = reference_profile();
    const ClusterState c = make_cluster({make_node("n", 32, "H100", {1000})});
    CHECK_THROWS_AS(check_models_known(c, p), ConfigError);
  }
}
