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
#include "gpusched/engine.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "gpusched/csv.hpp"
#include "gpusched/errors.hpp"

namespace gpusched {

namespace {

constexpr std::string_view kLedgerHeader =
    "policy,seed,ratio,eopc_w,eopc_cpu_w,eopc_gpu_w,grar,frag_milli,tasks_arrived,tasks_failed";

}  // namespace

void write_ledger_csv(std::ostream& out, const RunLedger& ledger) {
  out << kLedgerHeader << '\n';
  for (const MetricSample& s : ledger.samples) {
    out << ledger.policy << ',' << ledger.seed << ',' << csv::format_real(s.ratio) << ','
        << csv::format_real(s.eopc_w) << ',' << csv::format_real(s.eopc_cpu_w) << ','
        << csv::format_real(s.eopc_gpu_w) << ',' << csv::format_real(s.grar) << ','
        << s.frag_milli << ',' << s.tasks_arrived << ',' << s.tasks_failed << '\n';
  }
}

void save_ledger_csv(const std::string& path, const RunLedger& ledger) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write ledger '" + path + "'");
  write_ledger_csv(out, ledger);
  if (!out) throw IoError("error writing ledger '" + path + "'");
}

RunLedger parse_ledger_csv(std::istream& in, const std::string& origin) {
  csv::expect_header(in, kLedgerHeader, origin);
  RunLedger ledger;
  std::string line;
  std::size_t row = 1;
  bool first = true;
  while (csv::read_line(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const std::string where = origin + " row " + std::to_string(row);
    auto f = csv::split(line);
    if (f.size() != 10) throw ConfigError(where + ": expected 10 fields");
    const std::string policy(csv::trim(f[0]));
    const auto seed = static_cast<std::uint64_t>(csv::parse_int(f[1], where + " seed"));
    if (first) {
      ledger.policy = policy;
      ledger.seed = seed;
      first = false;
    } else if (policy != ledger.policy || seed != ledger.seed) {
      throw ConfigError(where + ": ledger mixes policies or seeds");
    }
    MetricSample s;
    s.ratio = csv::parse_real(f[2], where + " ratio");
    s.eopc_w = csv::parse_real(f[3], where + " eopc_w");
    s.eopc_cpu_w = csv::parse_real(f[4], where + " eopc_cpu_w");
    s.eopc_gpu_w = csv::parse_real(f[5], where + " eopc_gpu_w");
    s.grar = csv::parse_real(f[6], where + " grar");
    s.frag_milli = csv::parse_int(f[7], where + " frag_milli");
    s.tasks_arrived = csv::parse_int(f[8], where + " tasks_arrived");
    s.tasks_failed = csv::parse_int(f[9], where + " tasks_failed");
    ledger.samples.push_back(s);
  }
  return ledger;
}

RunLedger load_ledger_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open ledger '" + path + "'");
  return parse_ledger_csv(in, path);
}

int checkpoints_for_step(double step) {
  if (!(step > 0.0) || step > 1.0) throw ConfigError("checkpoint step must be in (0, 1]");
  const double count = std::round(1.0 / step);
  if (std::abs(count * step - 1.0) > 1e-9 || count > 1e7) {
    throw ConfigError("checkpoint step must divide 1.0");
  }
  return static_cast<int>(count);
}

Simulator::Simulator(ClusterState cluster, const HardwareProfile& profile,
                     const TargetWorkload& workload, PolicyConfig policy, FragOptions frag)
    : cluster_(std::move(cluster)),
      profile_(&profile),
      workload_(&workload),
      policy_(std::move(policy)),
      frag_(frag) {
  check_models_known(cluster_, profile);
  node_power_.reserve(cluster_.size());
  node_frag_.reserve(cluster_.size());
  for (const NodeState& n : cluster_.nodes()) {
    node_power_.push_back(node_power(n, profile));
    node_frag_.push_back(frag_node_weighted(n, workload, frag_));
    cpu_w_ += node_power_.back().cpu_w;
    gpu_w_ += node_power_.back().gpu_w;
    frag_weighted_ += node_frag_.back();
  }
}

double Simulator::fragmentation() const {
  if (workload_->empty()) return 0.0;
  return static_cast<double>(frag_weighted_) / static_cast<double>(workload_->total_weight());
}

Decision Simulator::schedule_one(const TaskSpec& task) {
  const ScoringContext ctx{cluster_, *profile_, *workload_, frag_};
  Decision decision = select(ctx, task, policy_);
  if (!decision.scheduled) return decision;

  const std::size_t n = decision.placement.node;
  cluster_.apply(task, decision.placement);
  const NodeState& node = cluster_.node(n);
  const PowerBreakdown p = node_power(node, *profile_);
  cpu_w_ += p.cpu_w - node_power_[n].cpu_w;
  gpu_w_ += p.gpu_w - node_power_[n].gpu_w;
  node_power_[n] = p;
  const std::int64_t f = frag_node_weighted(node, *workload_, frag_);
  frag_weighted_ += f - node_frag_[n];
  node_frag_[n] = f;
  return decision;
}

void Simulator::verify() const {
  for (const NodeState& n : cluster_.nodes()) check_invariants(n);
  const PowerBreakdown fresh = datacenter_power(cluster_, *profile_);
  if (std::abs(fresh.cpu_w - cpu_w_) > 1e-6 || std::abs(fresh.gpu_w - gpu_w_) > 1e-6) {
    throw InvariantError("incremental power diverged from full recomputation");
  }
  std::int64_t frag = 0;
  for (const NodeState& n : cluster_.nodes()) frag += frag_node_weighted(n, *workload_, frag_);
  if (frag != frag_weighted_) {
    throw InvariantError("incremental fragmentation diverged from full recomputation");
  }
}

RunLedger run(const ClusterState& cluster, const HardwareProfile& profile, const Trace& trace,
              const TargetWorkload& workload, const PolicyConfig& policy,
              const RunOptions& options) {
  if (options.checkpoints < 1) throw ConfigError("need at least one checkpoint");
  Simulator sim(cluster, profile, workload, policy, options.frag);
  InflationStream stream(trace, cluster.total_gpu_milli(), options.seed, options.stop_ratio);

  RunLedger ledger;
  ledger.policy = policy.name();
  ledger.seed = options.seed;
  const Milli capacity = cluster.total_gpu_milli();
  const std::int64_t checkpoints = options.checkpoints;
  std::int64_t next_checkpoint = 1;
  const auto last_checkpoint =
      static_cast<std::int64_t>(std::floor(options.stop_ratio * static_cast<double>(checkpoints) + 1e-9));
  std::int64_t arrived = 0;
  std::int64_t failed = 0;

  while (const TaskSpec* task = stream.next()) {
    const Milli demand = task->gpu.total_milli();
    ++arrived;
    ledger.requested_milli += demand;
    const Decision decision = sim.schedule_one(*task);
    if (decision.scheduled) {
      ledger.allocated_milli += demand;
    } else {
      ++failed;
    }
    if (options.record_outcomes) {
      ledger.outcomes.push_back(
          {task->id,
           decision.scheduled ? static_cast<std::ptrdiff_t>(decision.placement.node) : -1,
           demand});
    }
    if (ledger.allocated_milli > ledger.requested_milli) {
      throw InvariantError("allocated GPU exceeds requested GPU");
    }

    while (next_checkpoint <= last_checkpoint &&
           ledger.requested_milli * checkpoints >= next_checkpoint * capacity) {
      if (options.verify) sim.verify();
      MetricSample s;
      s.ratio = static_cast<double>(next_checkpoint) / static_cast<double>(checkpoints);
      const PowerBreakdown p = sim.power();
      s.eopc_cpu_w = p.cpu_w;
      s.eopc_gpu_w = p.gpu_w;
      s.eopc_w = p.total_w();
      s.grar = static_cast<double>(ledger.allocated_milli) /
               static_cast<double>(ledger.requested_milli);
      s.frag_milli = std::llround(sim.fragmentation());
      s.tasks_arrived = arrived;
      s.tasks_failed = failed;
      ledger.samples.push_back(s);
      ++next_checkpoint;
    }
  }
  return ledger;
}

}  // namespace gpusched
