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
// Command-line front end of the gpusched simulator. Links only the C API.

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gpusched/gpusched.h"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;

// Status codes map onto the two documented exit codes: invariant
// violations exit 2, everything else that fails exits 1.
int exit_code(gpusched_status status) {
  if (status == GPUSCHED_OK) return 0;
  std::cerr << "gpusched: " << gpusched_last_error() << '\n';
  return status == GPUSCHED_ERR_INVARIANT ? kExitInvariant : kExitConfig;
}

struct ConfigFailure {
  std::string message;
};

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Trace = std::unique_ptr<gpusched_trace, Deleter<gpusched_trace, gpusched_trace_free>>;
using Cluster = std::unique_ptr<gpusched_cluster, Deleter<gpusched_cluster, gpusched_cluster_free>>;
using Policy = std::unique_ptr<gpusched_policy, Deleter<gpusched_policy, gpusched_policy_free>>;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint64_t parse_u64(const std::string& text, const char* what) {
  if (text.empty() || text[0] == '-' || text[0] == '+') {
    throw ConfigFailure{std::string("invalid ") + what + " '" + text + "'"};
  }
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (errno != 0 || end == text.c_str() || *end != '\0') {
    throw ConfigFailure{std::string("invalid ") + what + " '" + text + "'"};
  }
  return v;
}

// "--seeds N" runs seeds 1..N; a comma-separated value lists seeds
// explicitly ("--seeds 7," runs seed 7 alone).
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  if (text.find(',') == std::string::npos) {
    const std::uint64_t count = parse_u64(text, "seed count");
    if (count == 0 || count > 100000) throw ConfigFailure{"seed count must be in [1, 100000]"};
    for (std::uint64_t s = 1; s <= count; ++s) seeds.push_back(s);
  } else {
    for (const std::string& item : split_list(text)) seeds.push_back(parse_u64(item, "seed"));
    if (seeds.empty()) throw ConfigFailure{"empty seed list"};
  }
  return seeds;
}

std::vector<int> parse_alphas(const std::string& text) {
  std::vector<int> alphas;
  for (const std::string& item : split_list(text)) {
    const std::uint64_t a = parse_u64(item, "alpha");
    if (a > 1000) throw ConfigFailure{"alpha must be in [0, 1000] per-mille"};
    alphas.push_back(static_cast<int>(a));
  }
  if (alphas.empty()) throw ConfigFailure{"empty alpha list"};
  return alphas;
}

struct RunFlags {
  std::string cluster;
  std::string profiles;
  std::string trace;
  std::string workload;
  std::vector<std::string> policies;
  std::string baseline;
  std::string seeds = "1";
  std::string out;
  std::string name = "exp";
  double checkpoint_step = 0.01;
  double stop_ratio = 1.0;
  bool strict_cond3 = false;
  std::string cpuonly_frag = "literal";
  unsigned threads = 0;
  bool verify = false;
  std::string alphas = "0,50,100,200,300,400,500,600,700,800,900,1000";
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--cluster", f.cluster, "Cluster CSV")->required();
  cmd->add_option("--profiles", f.profiles, "Hardware profile CSV")->required();
  cmd->add_option("--trace", f.trace, "Task trace CSV")->required();
  cmd->add_option("--workload", f.workload, "Target workload CSV (default: derived from trace)");
  cmd->add_option("--seeds", f.seeds, "Seed count N (seeds 1..N) or comma-separated list");
  cmd->add_option("--out", f.out, "Output directory")->required();
  cmd->add_option("--exp", f.name, "Experiment name (subdirectory of --out)");
  cmd->add_option("--checkpoint-step", f.checkpoint_step, "Arrived-ratio sampling step");
  cmd->add_option("--stop-ratio", f.stop_ratio, "Stop once requested GPU reaches this ratio");
  cmd->add_flag("--strict-cond3", f.strict_cond3, "Literal fractional GPU budget rule");
  cmd->add_option("--cpuonly-frag", f.cpuonly_frag, "CpuOnly fragmentation: literal or zero")
      ->check(CLI::IsMember({"literal", "zero"}));
  cmd->add_option("--threads", f.threads, "Worker threads (default: GPUSCHED_THREADS or cores)");
  cmd->add_flag("--verify", f.verify, "Recompute totals at every checkpoint");
}

void validate_policies(const std::vector<std::string>& specs) {
  for (const std::string& spec : specs) {
    gpusched_policy* raw = nullptr;
    if (gpusched_policy_parse(spec.c_str(), &raw) != GPUSCHED_OK) {
      throw ConfigFailure{gpusched_last_error()};
    }
    Policy policy(raw);
    int alpha = 0;
    std::cout << "policy " << gpusched_policy_name(policy.get());
    if (gpusched_policy_alpha_permille(policy.get(), &alpha) == GPUSCHED_OK) {
      std::cout << " alpha=" << alpha / 1000.0;
    }
    std::cout << '\n';
  }
}

int run_experiment(const RunFlags& f, bool sweep) {
  const std::vector<std::uint64_t> seeds = parse_seeds(f.seeds);
  std::vector<int> alphas;
  if (sweep) alphas = parse_alphas(f.alphas);
  validate_policies(f.policies);

  std::vector<const char*> policies;
  for (const std::string& p : f.policies) policies.push_back(p.c_str());

  gpusched_experiment_config config;
  gpusched_experiment_config_init(&config);
  config.name = f.name.c_str();
  config.cluster_path = f.cluster.c_str();
  config.profiles_path = f.profiles.c_str();
  config.trace_path = f.trace.c_str();
  config.workload_path = f.workload.empty() ? nullptr : f.workload.c_str();
  config.policies = policies.data();
  config.policy_count = policies.size();
  config.baseline = f.baseline.empty() ? nullptr : f.baseline.c_str();
  config.alphas = alphas.data();
  config.alpha_count = alphas.size();
  config.seeds = seeds.data();
  config.seed_count = seeds.size();
  config.checkpoint_step = f.checkpoint_step;
  config.stop_ratio = f.stop_ratio;
  config.strict_cond3 = f.strict_cond3 ? 1 : 0;
  config.cpuonly_frag_zero = f.cpuonly_frag == "zero" ? 1 : 0;
  config.threads = f.threads;
  config.verify = f.verify ? 1 : 0;
  config.out_dir = f.out.c_str();
  const int code = exit_code(gpusched_experiment_run(&config));
  if (code == 0) std::cout << "wrote " << f.out << '/' << f.name << '\n';
  return code;
}

void print_warning(const char* message, void*) { std::cerr << "warning: " << message << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GPU datacenter scheduling simulator"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Run policies over seeds and report");
  add_run_flags(run, run_flags);
  run->add_option("--policy", run_flags.policies, "Policy spec (repeatable)")->required();
  run->add_option("--baseline", run_flags.baseline, "Policy to compute savings against");

  RunFlags sweep_flags;
  sweep_flags.name = "sweep";
  CLI::App* sweep = app.add_subcommand("sweep-alpha", "Sweep the PWR weight against FGD");
  add_run_flags(sweep, sweep_flags);
  sweep->add_option("--alphas", sweep_flags.alphas, "Comma-separated per-mille PWR weights");
  sweep->add_option("--baseline", sweep_flags.baseline, "Baseline policy (default: fgd)");
  sweep->add_option("--policy", sweep_flags.policies, "Additional policy to run alongside (repeatable)");

  std::string derive_trace_path;
  std::string derive_kind;
  int derive_pct = 0;
  std::uint64_t derive_seed = 1;
  std::string derive_cluster;
  std::string derive_out;
  CLI::App* derive = app.add_subcommand("derive-trace", "Derive a trace variant");
  derive->add_option("--trace", derive_trace_path, "Source trace CSV")->required();
  derive->add_option("--kind", derive_kind, "multigpu, sharinggpu or constrained")
      ->required()
      ->check(CLI::IsMember({"multigpu", "sharinggpu", "constrained"}));
  derive->add_option("--pct", derive_pct, "Target percentage")->required();
  derive->add_option("--seed", derive_seed, "Random seed");
  derive->add_option("--cluster", derive_cluster, "Cluster CSV (constrained only)");
  derive->add_option("--out", derive_out, "Output trace CSV")->required();

  std::size_t synth_tasks = 8152;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  CLI::App* synth = app.add_subcommand("synth-trace", "Synthesize a default-shaped trace");
  synth->add_option("--tasks", synth_tasks, "Number of tasks");
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--out", synth_out, "Output trace CSV")->required();

  std::string report_in;
  std::string report_baseline;
  CLI::App* report = app.add_subcommand("report", "Re-aggregate the ledgers of an experiment");
  report->add_option("--in", report_in, "Experiment directory")->required();
  report->add_option("--baseline", report_baseline, "Baseline policy (default: from manifest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_experiment(run_flags, false);
    if (*sweep) return run_experiment(sweep_flags, true);
    if (*derive) {
      gpusched_trace* raw = nullptr;
      if (gpusched_trace_load(derive_trace_path.c_str(), &raw) != GPUSCHED_OK) {
        return exit_code(GPUSCHED_ERR_CONFIG);
      }
      Trace source(raw);
      Cluster cluster;
      if (!derive_cluster.empty()) {
        gpusched_cluster* c = nullptr;
        if (gpusched_cluster_load(derive_cluster.c_str(), &c) != GPUSCHED_OK) {
          return exit_code(GPUSCHED_ERR_CONFIG);
        }
        cluster.reset(c);
      }
      gpusched_trace* derived = nullptr;
      const gpusched_status status = gpusched_trace_derive(
          source.get(), derive_kind.c_str(), derive_pct, derive_seed, cluster.get(), &derived);
      if (status != GPUSCHED_OK) return exit_code(status);
      Trace out(derived);
      if (const gpusched_status s = gpusched_trace_save(out.get(), derive_out.c_str());
          s != GPUSCHED_OK) {
        return exit_code(s);
      }
      std::cout << "wrote " << gpusched_trace_size(out.get()) << " tasks to " << derive_out << '\n';
      return 0;
    }
    if (*synth) {
      gpusched_trace* raw = nullptr;
      if (const gpusched_status s = gpusched_trace_synthesize(synth_tasks, synth_seed, &raw);
          s != GPUSCHED_OK) {
        return exit_code(s);
      }
      Trace out(raw);
      if (const gpusched_status s = gpusched_trace_save(out.get(), synth_out.c_str());
          s != GPUSCHED_OK) {
        return exit_code(s);
      }
      std::cout << "wrote " << gpusched_trace_size(out.get()) << " tasks to " << synth_out << '\n';
      return 0;
    }
    if (*report) {
      const gpusched_status s =
          gpusched_report(report_in.c_str(), report_baseline.empty() ? nullptr : report_baseline.c_str(),
                          print_warning, nullptr);
      if (s == GPUSCHED_OK) std::cout << "rewrote report in " << report_in << '\n';
      return exit_code(s);
    }
  } catch (const ConfigFailure& e) {
    std::cerr << "gpusched: " << e.message << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
