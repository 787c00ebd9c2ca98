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
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gpusched/cluster.hpp"
#include "gpusched/rng.hpp"
#include "gpusched/types.hpp"

namespace gpusched {

// Where a trace came from. `details` carries achieved (not nominal)
// figures of a derivation, in insertion order.
struct TraceProvenance {
  std::string source;
  std::string descriptor = "original";
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> details;
};

struct Trace {
  std::vector<TaskSpec> tasks;
  TraceProvenance provenance;
};

// Trace file: name,cpu_milli,memory_mib,num_gpu,gpu_milli,gpu_spec
Trace parse_trace_csv(std::istream& in, const std::string& origin = "<stream>");
Trace load_trace_csv(const std::string& path);
void write_trace_csv(std::ostream& out, const Trace& trace);
// Writes `path` and the key=value sidecar `path + ".meta"`.
void save_trace(const std::string& path, const Trace& trace);
std::string provenance_text(const TraceProvenance& provenance);

struct DemandTotals {
  std::int64_t cpu_only_tasks = 0;
  std::int64_t partial_tasks = 0;
  std::int64_t full_tasks = 0;
  Milli partial_milli = 0;
  Milli full_milli = 0;
};
DemandTotals demand_totals(const std::vector<TaskSpec>& tasks);

// Grows the GPU demand of whole-GPU tasks by `pct` percent by adding
// resampled whole-GPU tasks. Throws ConfigError when there are none or pct < 0.
Trace derive_multigpu(const Trace& source, int pct, std::uint64_t seed);

// Resizes the partial and whole-GPU populations so partial tasks carry
// `pct` percent of GPU demand at constant total GPU demand, keeping the
// CpuOnly share of the task population. Throws ConfigError for pct outside
// [0, 100] or a missing population.
Trace derive_sharinggpu(const Trace& source, int pct, std::uint64_t seed);

// Pins `pct` percent of GPU tasks to one GPU model, drawn in proportion to
// the model's share of cluster GPUs among models with a node large enough
// for the task. Throws ConfigError for pct outside (0, 100).
Trace derive_constrained(const Trace& source, int pct, std::uint64_t seed,
                         const ClusterState& cluster);

// Task population shares of the default trace, by GPU request bucket
// 0, (0,1), 1, 2, 4, 8.
inline constexpr double kDefaultBucketShares[6] = {0.133, 0.378, 0.480, 0.002, 0.002, 0.005};

// Synthetic trace with the default trace's bucket population shares.
// Bucket counts are apportioned exactly (largest remainder) and shuffled.
Trace synthesize_default_trace(std::size_t tasks, std::uint64_t seed);

// Index into kDefaultBucketShares for a demand, or -1 for GPU counts
// outside {1, 2, 4, 8}.
int gpu_bucket(const GpuDemand& demand);

// With-replacement sampling of the base trace until the cumulative
// requested GPU milli reaches stop_ratio * capacity.
class InflationStream {
 public:
  InflationStream(const Trace& base, Milli cluster_gpu_milli, std::uint64_t seed,
                  double stop_ratio = 1.0);

  // Next drawn task, or nullptr once exhausted. The pointer stays valid
  // for the lifetime of the base trace.
  const TaskSpec* next();

  Milli requested_milli() const { return requested_; }
  std::int64_t draws() const { return draws_; }
  bool exhausted() const;

 private:
  const Trace* base_;
  Milli capacity_;
  double stop_ratio_;
  Rng rng_;
  Milli requested_ = 0;
  std::int64_t draws_ = 0;
  bool has_gpu_demand_ = false;
};

}  // namespace gpusched
