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
#include "gpusched/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "gpusched/csv.hpp"
#include "gpusched/errors.hpp"

namespace gpusched {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kLedgerPrefix = "ledger_seed";

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (const std::string& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  for (auto part : csv::split(text, ',')) out.emplace_back(csv::trim(part));
  return out;
}

std::string ledger_file_name(std::uint64_t seed) {
  return std::string(kLedgerPrefix) + std::to_string(seed) + ".csv";
}

std::optional<std::uint64_t> seed_from_file_name(const std::string& name) {
  if (name.rfind(kLedgerPrefix, 0) != 0 || name.size() <= kLedgerPrefix.size() + 4 ||
      name.substr(name.size() - 4) != ".csv") {
    return std::nullopt;
  }
  const std::string digits = name.substr(kLedgerPrefix.size(), name.size() - kLedgerPrefix.size() - 4);
  std::uint64_t seed = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return seed;
}

}  // namespace

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("GPUSCHED_THREADS")) {
      unsigned value = 0;
      const std::string_view text(env);
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec == std::errc() && ptr == text.data() + text.size()) n = value;
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (jobs < n) n = static_cast<unsigned>(std::max<std::size_t>(jobs, 1));
  return n;
}

void parallel_for(std::size_t jobs, unsigned threads, const std::function<void(std::size_t)>& job) {
  if (jobs == 0) return;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs)));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        stop.store(true);
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

Report run_experiment(const ExperimentConfig& config) {
  if (config.out_dir.empty()) throw ConfigError("an output directory is required");
  if (config.name.empty() || config.name.find('/') != std::string::npos) {
    throw ConfigError("experiment name must be a plain directory name");
  }
  if (config.seeds.empty()) throw ConfigError("at least one seed is required");
  if (config.policies.empty() && config.alphas.empty()) throw ConfigError("no policy given");
  const int checkpoints = checkpoints_for_step(config.checkpoint_step);
  if (!(config.stop_ratio > 0.0)) throw ConfigError("stop ratio must be positive");
  {
    auto seeds = config.seeds;
    std::sort(seeds.begin(), seeds.end());
    if (std::adjacent_find(seeds.begin(), seeds.end()) != seeds.end()) {
      throw ConfigError("duplicate seed");
    }
  }

  // Policies first, so flag mistakes surface before any file is read.
  std::vector<PolicyConfig> policies;
  std::vector<std::pair<int, std::string>> alpha_policies;
  std::optional<std::string> baseline = config.baseline;
  auto add_policy = [&](PolicyConfig p) {
    for (const PolicyConfig& q : policies) {
      if (q.name() == p.name()) return;
    }
    policies.push_back(std::move(p));
  };
  if (!config.alphas.empty()) {
    if (!baseline) baseline = "fgd";
    add_policy(PolicyConfig::parse(*baseline));
    for (int a : config.alphas) {
      PolicyConfig p = PolicyConfig::alpha(a);
      alpha_policies.emplace_back(a, p.name());
      add_policy(std::move(p));
    }
  } else if (baseline) {
    add_policy(PolicyConfig::parse(*baseline));
  }
  for (const std::string& spec : config.policies) add_policy(PolicyConfig::parse(spec));
  if (baseline) baseline = PolicyConfig::parse(*baseline).name();

  const HardwareProfile profile = load_profiles_csv(config.profiles_path);
  const ClusterState cluster = load_cluster_csv(config.cluster_path);
  check_models_known(cluster, profile);
  if (cluster.total_gpu_milli() == 0) throw ConfigError("cluster has no GPUs");
  const Trace trace = load_trace_csv(config.trace_path);
  TargetWorkload workload;
  if (!config.workload_path.empty()) {
    std::ifstream in(config.workload_path);
    if (!in) throw ConfigError("cannot open workload file '" + config.workload_path + "'");
    workload = parse_workload_csv(in, config.workload_path);
  } else if (!trace.tasks.empty()) {
    workload = derive_target_workload(trace.tasks);
  }

  const std::size_t n_seeds = config.seeds.size();
  const std::size_t jobs = policies.size() * n_seeds;
  std::vector<RunLedger> ledgers(jobs);
  parallel_for(jobs, worker_count(config.threads, jobs), [&](std::size_t j) {
    RunOptions options;
    options.seed = config.seeds[j % n_seeds];
    options.checkpoints = checkpoints;
    options.stop_ratio = config.stop_ratio;
    options.frag = config.frag;
    options.verify = config.verify;
    options.record_outcomes = false;
    ledgers[j] = run(cluster, profile, trace, workload, policies[j / n_seeds], options);
  });

  Report report;
  report.experiment = config.name;
  report.baseline = baseline;
  report.alpha_policies = alpha_policies;
  const fs::path exp_dir = fs::path(config.out_dir) / config.name;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    const fs::path dir = exp_dir / policy_dir_name(policies[p].name());
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    std::vector<RunLedger> group(ledgers.begin() + static_cast<std::ptrdiff_t>(p * n_seeds),
                                 ledgers.begin() + static_cast<std::ptrdiff_t>((p + 1) * n_seeds));
    for (const RunLedger& l : group) save_ledger_csv((dir / ledger_file_name(l.seed)).string(), l);
    report.curves.push_back(aggregate(group));
  }

  std::vector<std::string> names, seeds, alphas;
  for (const PolicyConfig& p : policies) names.push_back(p.name());
  for (std::uint64_t s : config.seeds) seeds.push_back(std::to_string(s));
  for (int a : config.alphas) alphas.push_back(std::to_string(a));
  report.manifest = {
      {"experiment", config.name},
      {"cluster", config.cluster_path},
      {"profiles", config.profiles_path},
      {"trace", config.trace_path},
      {"trace_descriptor", trace.provenance.descriptor},
      {"trace_tasks", std::to_string(trace.tasks.size())},
      {"workload", config.workload_path.empty() ? "derived-from-trace" : config.workload_path},
      {"workload_classes", std::to_string(workload.classes().size())},
      {"policies", join(names, ',')},
      {"baseline", baseline.value_or("")},
      {"alphas", join(alphas, ',')},
      {"seeds", join(seeds, ',')},
      {"checkpoint_step", csv::format_real(config.checkpoint_step)},
      {"stop_ratio", csv::format_real(config.stop_ratio)},
      {"strict_cond3", config.frag.rule == Cond3Rule::kStrict ? "true" : "false"},
      {"cpuonly_frag", config.frag.cpu_only == CpuOnlyFrag::kZero ? "zero" : "literal"},
      {"cluster_nodes", std::to_string(cluster.size())},
      {"cluster_gpus", std::to_string(cluster.total_gpus())},
  };
  emit(report, config.out_dir);
  return report;
}

Report report_from_directory(const std::string& experiment_dir,
                             const std::optional<std::string>& baseline,
                             std::vector<std::string>* warnings) {
  const fs::path dir(experiment_dir);
  if (!fs::is_directory(dir)) throw ConfigError("'" + experiment_dir + "' is not a directory");

  Manifest manifest;
  if (std::ifstream in(dir / "manifest.txt"); in) manifest = parse_manifest(in);
  const std::vector<std::string> manifest_policies = split_list(manifest_get(manifest, "policies").value_or(""));
  std::vector<std::uint64_t> manifest_seeds;
  for (const std::string& s : split_list(manifest_get(manifest, "seeds").value_or(""))) {
    manifest_seeds.push_back(static_cast<std::uint64_t>(csv::parse_int(s, "manifest seeds")));
  }

  // Ledgers grouped by policy, keyed by seed.
  std::vector<std::pair<std::string, std::vector<RunLedger>>> groups;
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) subdirs.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const fs::path& sub : subdirs) {
    std::vector<RunLedger> ledgers;
    for (const auto& entry : fs::directory_iterator(sub)) {
      if (!entry.is_regular_file()) continue;
      if (!seed_from_file_name(entry.path().filename().string())) continue;
      ledgers.push_back(load_ledger_csv(entry.path().string()));
    }
    if (ledgers.empty()) continue;
    // Manifest seed order first (matches the inline aggregation), then the rest by seed.
    auto rank = [&](std::uint64_t seed) {
      auto it = std::find(manifest_seeds.begin(), manifest_seeds.end(), seed);
      return std::make_pair(it == manifest_seeds.end() ? 1 : 0,
                            it == manifest_seeds.end() ? seed
                                                       : static_cast<std::uint64_t>(it - manifest_seeds.begin()));
    };
    std::sort(ledgers.begin(), ledgers.end(),
              [&](const RunLedger& a, const RunLedger& b) { return rank(a.seed) < rank(b.seed); });
    const std::string policy = ledgers.front().policy;
    if (warnings) {
      for (std::uint64_t s : manifest_seeds) {
        const bool found = std::any_of(ledgers.begin(), ledgers.end(),
                                       [&](const RunLedger& l) { return l.seed == s; });
        if (!found) {
          warnings->push_back("policy " + policy + ": ledger for seed " + std::to_string(s) +
                              " is missing; aggregating over available seeds");
        }
      }
    }
    groups.emplace_back(policy, std::move(ledgers));
  }
  if (groups.empty()) throw ConfigError("no ledgers found under '" + experiment_dir + "'");

  auto order = [&](const std::string& policy) {
    auto it = std::find(manifest_policies.begin(), manifest_policies.end(), policy);
    return it - manifest_policies.begin();
  };
  std::stable_sort(groups.begin(), groups.end(),
                   [&](const auto& a, const auto& b) { return order(a.first) < order(b.first); });

  Report report;
  report.experiment = dir.filename().string();
  if (report.experiment.empty()) report.experiment = dir.parent_path().filename().string();
  report.manifest = manifest;
  for (auto& [policy, ledgers] : groups) report.curves.push_back(aggregate(ledgers));

  std::optional<std::string> base = baseline;
  if (!base) {
    const std::string m = manifest_get(manifest, "baseline").value_or("");
    if (!m.empty()) base = m;
  }
  if (base) {
    base = PolicyConfig::parse(*base).name();
    const bool present = std::any_of(report.curves.begin(), report.curves.end(),
                                     [&](const Curve& c) { return c.policy == *base; });
    if (!present) throw ConfigError("baseline '" + *base + "' has no ledgers");
    report.baseline = base;
    for (const std::string& a : split_list(manifest_get(manifest, "alphas").value_or(""))) {
      const int alpha = static_cast<int>(csv::parse_int(a, "manifest alphas"));
      const std::string name = PolicyConfig::alpha(alpha).name();
      const bool have = std::any_of(report.curves.begin(), report.curves.end(),
                                    [&](const Curve& c) { return c.policy == name; });
      if (have) report.alpha_policies.emplace_back(alpha, name);
    }
  }

  fs::path parent = dir.filename().empty() ? dir.parent_path().parent_path() : dir.parent_path();
  if (parent.empty()) parent = ".";
  emit(report, parent.string(), /*write_manifest_file=*/false);
  return report;
}

}  // namespace gpusched
