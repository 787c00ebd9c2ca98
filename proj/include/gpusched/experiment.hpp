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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gpusched/reporting.hpp"

namespace gpusched {

struct ExperimentConfig {
  std::string name = "exp";
  std::string cluster_path;
  std::string profiles_path;
  std::string trace_path;
  std::string workload_path;  // optional; derived from the trace when empty
  std::vector<std::string> policies;
  std::optional<std::string> baseline;
  std::vector<int> alphas;  // per-mille; non-empty for alpha sweeps
  std::vector<std::uint64_t> seeds;
  double checkpoint_step = 0.01;
  double stop_ratio = 1.0;
  FragOptions frag{};
  unsigned threads = 0;  // 0: GPUSCHED_THREADS or hardware concurrency
  std::string out_dir;
  bool verify = false;
};

// Worker count: `requested` when non-zero, else GPUSCHED_THREADS, else the
// hardware concurrency; never more than `jobs`, never less than 1.
unsigned worker_count(unsigned requested, std::size_t jobs);

// Runs `jobs` indexed tasks on up to `threads` workers. Results are
// written by index, so output order never depends on scheduling. The
// first exception thrown by a job is rethrown after all workers stop.
void parallel_for(std::size_t jobs, unsigned threads, const std::function<void(std::size_t)>& job);

// Loads inputs, runs every (policy, seed) pair, writes per-seed ledgers to
// <out>/<name>/<policy>/ledger_seed<seed>.csv and emits the report.
// Alpha sweeps run policy pwr:a+fgd:(1000-a) for each alpha plus the fgd
// baseline. Throws ConfigError before any simulation on bad inputs.
Report run_experiment(const ExperimentConfig& config);

// Re-aggregates the ledgers under <dir> (an experiment directory written
// by run_experiment) and rewrites the curve and savings files. Missing
// seeds produce warnings. Throws ConfigError when no ledger is found.
Report report_from_directory(const std::string& experiment_dir,
                             const std::optional<std::string>& baseline,
                             std::vector<std::string>* warnings = nullptr);

}  // namespace gpusched
