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
#include "doctest.h"
#include "gpusched/rng.hpp"
#include "support.hpp"

using namespace gpusched;
using namespace gpusched::testing;

namespace {

constexpr int kCases = 1000;

const char* const kModels[] = {"T4", "G2", "V100M32", "P100"};

// Socket-aligned capacities (multiples of 32 vCPUs) keep power deltas
// non-negative; see the power monotonicity property.
NodeState random_node(Rng& rng, const std::string& id, bool socket_aligned = true) {
  const std::int64_t vcpus = socket_aligned ? 32 * static_cast<std::int64_t>(1 + rng.uniform_index(4))
                                            : 1 + static_cast<std::int64_t>(rng.uniform_index(128));
  const auto gpus = static_cast<std::size_t>(rng.uniform_index(5));
  std::vector<Milli> unalloc(gpus);
  for (Milli& r : unalloc) {
    switch (rng.uniform_index(4)) {
      case 0: r = 0; break;
      case 1: r = 1000; break;
      default: r = static_cast<Milli>(rng.uniform_index(1001));
    }
  }
  NodeState n = make_node(id, vcpus, kModels[rng.uniform_index(4)], unalloc,
                          static_cast<MiB>(1024 * (1 + rng.uniform_index(64))));
  n.cpu_alloc_milli = static_cast<Milli>(rng.uniform_index(static_cast<std::uint64_t>(n.cpu_capacity_milli) + 1));
  n.mem_alloc_mib = static_cast<MiB>(rng.uniform_index(static_cast<std::uint64_t>(n.mem_capacity_mib) + 1));
  return n;
}

ClusterState random_cluster(Rng& rng, bool socket_aligned = true) {
  const auto size = 1 + rng.uniform_index(6);
  std::vector<NodeState> nodes;
  for (std::uint64_t i = 0; i < size; ++i) nodes.push_back(random_node(rng, "n" + std::to_string(i), socket_aligned));
  return make_cluster(std::move(nodes));
}

GpuDemand random_demand(Rng& rng) {
  switch (rng.uniform_index(3)) {
    case 0: return GpuDemand::cpu_only();
    case 1: return GpuDemand::partial(static_cast<Milli>(1 + rng.uniform_index(999)));
    default: return GpuDemand::full(static_cast<std::int64_t>(1 + rng.uniform_index(3)));
  }
}

TaskSpec random_task(Rng& rng) {
  TaskSpec t = make_task("t", static_cast<Milli>(rng.uniform_index(16001)), random_demand(rng),
                         static_cast<MiB>(rng.uniform_index(16385)));
  if (rng.uniform_index(5) == 0) t.gpu_constraint = make_model_set({kModels[rng.uniform_index(4)]});
  return t;
}

TargetWorkload random_workload(Rng& rng) {
  std::vector<TaskClass> classes;
  const auto count = 1 + rng.uniform_index(5);
  for (std::uint64_t i = 0; i < count; ++i) {
    TaskClass c = make_class(random_demand(rng), static_cast<std::int64_t>(1 + rng.uniform_index(20)),
                             static_cast<Milli>(500 * rng.uniform_index(20)),
                             static_cast<MiB>(1024 * rng.uniform_index(16)));
    c.gpu_constraint = i % 3 == 2 ? make_model_set({kModels[rng.uniform_index(4)]}) : ModelSet{};
    classes.push_back(c);
  }
  // Drop duplicates: the workload rejects repeated classes.
  std::vector<TaskClass> unique;
  for (const TaskClass& c : classes) {
    bool seen = false;
    for (const TaskClass& u : unique) {
      seen = seen || (u.gpu == c.gpu && u.cpu_milli == c.cpu_milli && u.memory_mib == c.memory_mib &&
                      u.gpu_constraint == c.gpu_constraint);
    }
    if (!seen) unique.push_back(c);
  }
  return TargetWorkload(unique);
}

TaskSpec as_task(const TaskClass& m) {
  TaskSpec t = make_task("m", m.cpu_milli, m.gpu, m.memory_mib);
  t.gpu_constraint = m.gpu_constraint;
  return t;
}

// Independent per-GPU reading of fragmentation for the permissive rule.
Milli naive_frag(const NodeState& n, const TaskClass& m, CpuOnlyFrag cpu_only) {
  Milli sum = 0;
  for (Milli r : n.gpu_unalloc_milli) sum += r;
  if (!is_feasible(n, as_task(m))) return sum;
  Milli frag = 0;
  for (Milli r : n.gpu_unalloc_milli) {
    bool usable = false;
    if (m.gpu.is_cpu_only()) usable = cpu_only == CpuOnlyFrag::kZero;
    if (m.gpu.is_full()) usable = r == 1000;
    if (m.gpu.is_partial()) usable = r >= m.gpu.amount();
    if (!usable) frag += r;
  }
  return frag;
}

Milli unalloc_sum(const NodeState& n) {
  Milli s = 0;
  for (Milli r : n.gpu_unalloc_milli) s += r;
  return s;
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("resource conservation under random apply sequences") {
    Rng rng(1);
    for (int c = 0; c < kCases; ++c) {
      ClusterState cluster = random_cluster(rng);
      const ClusterState initial = cluster;
      for (int step = 0; step < 20; ++step) {
        const TaskSpec t = random_task(rng);
        const std::size_t n = rng.uniform_index(cluster.size());
        const auto placements = candidate_placements(cluster.node(n), n, t);
        CHECK(placements.empty() == !is_feasible(cluster.node(n), t));
        if (placements.empty()) continue;
        const Placement& p = placements[rng.uniform_index(placements.size())];
        const NodeState hypo = hypothetical_apply(cluster.node(n), t, p.gpu_indices);
        const ClusterState before = cluster;
        cluster.apply(t, p);
        CHECK(cluster.node(n) == hypo);
        for (std::size_t i = 0; i < cluster.size(); ++i) {
          if (i != n) CHECK(cluster.node(i) == before.node(i));
        }
      }
      Milli gpu_alloc = 0;
      for (std::size_t i = 0; i < cluster.size(); ++i) {
        const NodeState& a = cluster.node(i);
        const NodeState& b = initial.node(i);
        check_invariants(a);
        CHECK(a.cpu_alloc_milli + a.cpu_unalloc_milli() == a.cpu_capacity_milli);
        CHECK(a.mem_alloc_mib + a.mem_unalloc_mib() == a.mem_capacity_mib);
        CHECK(a.cpu_alloc_milli >= b.cpu_alloc_milli);
        for (std::size_t g = 0; g < a.gpu_count(); ++g) {
          CHECK(a.gpu_unalloc_milli[g] >= 0);
          CHECK(a.gpu_unalloc_milli[g] <= b.gpu_unalloc_milli[g]);
          gpu_alloc += b.gpu_unalloc_milli[g] - a.gpu_unalloc_milli[g];
        }
      }
      CHECK(gpu_alloc >= 0);
    }
  }

  TEST_CASE("full-gpu feasibility equals the integer budget rule") {
    Rng rng(2);
    for (int c = 0; c < kCases; ++c) {
      NodeState n = random_node(rng, "n");
      n.cpu_alloc_milli = 0;
      n.mem_alloc_mib = 0;
      const auto k = static_cast<std::int64_t>(1 + rng.uniform_index(4));
      const TaskSpec t = make_task("t", 0, GpuDemand::full(k), 0);
      CHECK(is_feasible(n, t) == (k * kMilliPerUnit <= gpu_budget(n)));
      const Milli d = static_cast<Milli>(1 + rng.uniform_index(999));
      const TaskSpec p = make_task("p", 0, GpuDemand::partial(d), 0);
      CHECK(is_feasible(n, p, Cond3Rule::kStrict) == (d <= gpu_budget(n) % kMilliPerUnit));
    }
  }

  TEST_CASE("power additivity") {
    Rng rng(3);
    const HardwareProfile p = reference_profile();
    for (int c = 0; c < kCases; ++c) {
      const ClusterState cluster = random_cluster(rng, rng.uniform_index(2) == 0);
      double cpu = 0.0;
      double gpu = 0.0;
      for (const NodeState& n : cluster.nodes()) {
        cpu += node_power(n, p).cpu_w;
        gpu += node_power(n, p).gpu_w;
      }
      const PowerBreakdown b = datacenter_power(cluster, p);
      CHECK(b.cpu_w == doctest::Approx(cpu).epsilon(1e-12));
      CHECK(b.gpu_w == doctest::Approx(gpu).epsilon(1e-12));
    }
  }

  TEST_CASE("power monotonicity on socket-aligned nodes") {
    Rng rng(4);
    const HardwareProfile p = reference_profile();
    int checked = 0;
    while (checked < kCases) {
      const ClusterState cluster = random_cluster(rng);
      const TaskSpec t = random_task(rng);
      for (std::size_t n = 0; n < cluster.size(); ++n) {
        for (const Placement& pl : candidate_placements(cluster.node(n), n, t)) {
          CHECK(power_delta(cluster, t, pl, p) >= 0.0);
          ++checked;
        }
      }
    }
  }

  TEST_CASE("gpu activation threshold") {
    Rng rng(5);
    const HardwareProfile p = reference_profile();
    for (int c = 0; c < kCases; ++c) {
      NodeState n = random_node(rng, "n");
      if (!n.has_gpus()) continue;
      const auto g = static_cast<std::size_t>(rng.uniform_index(n.gpu_count()));
      const GpuProfile& gp = p.gpu(n.gpu_model);
      NodeState after = n;
      if (n.gpu_unalloc_milli[g] == 0) continue;
      after.gpu_unalloc_milli[g] -= 1;
      const double delta = gpu_power(after, p) - gpu_power(n, p);
      if (n.gpu_unalloc_milli[g] == 1000) {
        CHECK(delta == doctest::Approx(gp.max_w - gp.idle_w));
      } else {
        CHECK(delta == 0.0);
      }
    }
  }

  TEST_CASE("cpu power only steps at socket boundaries") {
    Rng rng(6);
    const HardwareProfile p = reference_profile();
    for (int c = 0; c < kCases; ++c) {
      NodeState n = random_node(rng, "n", rng.uniform_index(2) == 0);
      const Milli step = static_cast<Milli>(1 + rng.uniform_index(5000));
      if (n.cpu_alloc_milli + step > n.cpu_capacity_milli) continue;
      NodeState after = n;
      after.cpu_alloc_milli += step;
      const Milli socket = 2 * 16 * kMilliPerUnit;
      auto ceil_div = [](Milli a, Milli b) { return (a + b - 1) / b; };
      const bool active_changed = ceil_div(n.cpu_alloc_milli, socket) != ceil_div(after.cpu_alloc_milli, socket);
      const bool idle_changed = n.cpu_unalloc_milli() / socket != after.cpu_unalloc_milli() / socket;
      if (!active_changed && !idle_changed) CHECK(cpu_power(after, p) == cpu_power(n, p));
      if (active_changed || idle_changed) CHECK(cpu_power(after, p) != cpu_power(n, p));
    }
  }

  TEST_CASE("fragmentation bounds and case consistency") {
    Rng rng(7);
    for (int c = 0; c < kCases; ++c) {
      const NodeState n = random_node(rng, "n", false);
      const TargetWorkload m = random_workload(rng);
      const Milli sum = unalloc_sum(n);
      for (const Cond3Rule rule : {Cond3Rule::kPermissive, Cond3Rule::kStrict}) {
        for (const CpuOnlyFrag co : {CpuOnlyFrag::kLiteral, CpuOnlyFrag::kZero}) {
          const FragOptions o{rule, co};
          for (const TaskClass& k : m.classes()) {
            const Milli f = frag_node_for_class(n, k, o);
            CHECK(f >= 0);
            CHECK(f <= sum);
            if (!is_feasible(n, as_task(k), rule)) CHECK(f == sum);
            if (rule == Cond3Rule::kPermissive) CHECK(f == naive_frag(n, k, co));
          }
          const double e = frag_node_expected(n, m, o);
          CHECK(e >= 0.0);
          CHECK(e <= static_cast<double>(sum) + 1e-9);
        }
      }
    }
  }

  TEST_CASE("fragmentation delta equals full recomputation") {
    Rng rng(8);
    int checked = 0;
    while (checked < kCases) {
      const ClusterState cluster = random_cluster(rng, false);
      const TargetWorkload m = random_workload(rng);
      const TaskSpec t = random_task(rng);
      const FragOptions o{rng.uniform_index(2) ? Cond3Rule::kStrict : Cond3Rule::kPermissive,
                          rng.uniform_index(2) ? CpuOnlyFrag::kZero : CpuOnlyFrag::kLiteral};
      const double before = frag_datacenter(cluster, m, o);
      for (std::size_t n = 0; n < cluster.size(); ++n) {
        for (const Placement& pl : candidate_placements(cluster.node(n), n, t, o.rule)) {
          ClusterState after = cluster;
          after.apply(t, pl);
          CHECK(frag_delta(cluster, t, pl, m, o) ==
                doctest::Approx(frag_datacenter(after, m, o) - before).epsilon(1e-9));
          ++checked;
        }
      }
    }
  }

  TEST_CASE("datacenter fragmentation is additive over nodes") {
    Rng rng(9);
    for (int c = 0; c < kCases; ++c) {
      const ClusterState cluster = random_cluster(rng, false);
      const TargetWorkload m = random_workload(rng);
      double sum = 0.0;
      for (const NodeState& n : cluster.nodes()) sum += frag_node_expected(n, m);
      CHECK(frag_datacenter(cluster, m) == doctest::Approx(sum).epsilon(1e-9));
    }
  }

  TEST_CASE("selection is order independent and deterministic") {
    Rng rng(10);
    const HardwareProfile p = reference_profile();
    for (int c = 0; c < kCases; ++c) {
      const ClusterState cluster = random_cluster(rng);
      const TargetWorkload m = random_workload(rng);
      const TaskSpec t = random_task(rng);
      const ScoringContext ctx{cluster, p, m};
      std::vector<NodeState> reversed(cluster.nodes().rbegin(), cluster.nodes().rend());
      const ClusterState flipped = make_cluster(reversed);
      const ScoringContext fctx{flipped, p, m};
      for (const char* spec : {"fgd", "pwr", "pwr:100+fgd:900", "bestfit"}) {
        const PolicyConfig policy = PolicyConfig::parse(spec);
        const Decision a = select(ctx, t, policy);
        const Decision b = select(fctx, t, policy);
        CHECK(a.scheduled == b.scheduled);
        if (a.scheduled && b.scheduled) {
          CHECK(cluster.node(a.placement.node).id == flipped.node(b.placement.node).id);
          CHECK(a.placement.gpu_indices == b.placement.gpu_indices);
        }
        const Decision again = select(ctx, t, policy);
        CHECK(again.placement == a.placement);
      }
    }
  }
}
