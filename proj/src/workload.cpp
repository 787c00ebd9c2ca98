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
#include "gpusched/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "gpusched/csv.hpp"
#include "gpusched/errors.hpp"

namespace gpusched {

namespace {

constexpr std::string_view kTraceHeader = "name,cpu_milli,memory_mib,num_gpu,gpu_milli,gpu_spec";

using Indices = std::vector<std::size_t>;

Milli demand_of(const std::vector<TaskSpec>& tasks, const Indices& idx) {
  Milli sum = 0;
  for (std::size_t i : idx) sum += tasks[i].gpu.total_milli();
  return sum;
}

// Adds with-replacement draws from `pool` to `chosen` until the summed GPU
// demand is as close to `target` as whole tasks allow. Draws that would
// overshoot further than stopping short are rejected.
void grow_by_demand(const std::vector<TaskSpec>& tasks, const Indices& pool, Indices& chosen,
                    Milli target, Rng& rng) {
  Milli sum = demand_of(tasks, chosen);
  int rejections = 0;
  while (sum < target && rejections < 10000) {
    const std::size_t pick = pool[rng.uniform_index(pool.size())];
    const Milli d = tasks[pick].gpu.total_milli();
    if (sum + d <= target || sum + d - target <= target - sum) {
      chosen.push_back(pick);
      sum += d;
      rejections = 0;
    } else {
      ++rejections;
    }
  }
}

// Random subset of `pool` whose summed GPU demand is nearest to `target`
// (target below the pool's total).
Indices shrink_by_demand(const std::vector<TaskSpec>& tasks, Indices pool, Milli target,
                         Rng& rng) {
  rng.shuffle(std::span<std::size_t>(pool));
  Indices chosen;
  Milli sum = 0;
  for (std::size_t i : pool) {
    if (sum >= target) break;
    const Milli d = tasks[i].gpu.total_milli();
    if (sum + d <= target || sum + d - target <= target - sum) {
      chosen.push_back(i);
      sum += d;
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

Indices resize_by_demand(const std::vector<TaskSpec>& tasks, const Indices& pool, Milli target,
                         Rng& rng) {
  if (target <= 0 || pool.empty()) return {};
  if (target >= demand_of(tasks, pool)) {
    Indices chosen = pool;
    grow_by_demand(tasks, pool, chosen, target, rng);
    return chosen;
  }
  return shrink_by_demand(tasks, pool, target, rng);
}

Indices resize_by_count(const Indices& pool, std::size_t count, Rng& rng) {
  if (count >= pool.size()) {
    Indices chosen = pool;
    while (chosen.size() < count && !pool.empty()) {
      chosen.push_back(pool[rng.uniform_index(pool.size())]);
    }
    return chosen;
  }
  Indices shuffled = pool;
  rng.shuffle(std::span<std::size_t>(shuffled));
  shuffled.resize(count);
  std::sort(shuffled.begin(), shuffled.end());
  return shuffled;
}

// Originals keep their ids; resampled copies get a derivation suffix.
void append_tasks(const std::vector<TaskSpec>& tasks, const Indices& chosen,
                  const std::string& suffix, std::vector<TaskSpec>& out,
                  std::vector<bool>& used) {
  std::size_t copy = 0;
  for (std::size_t i : chosen) {
    TaskSpec t = tasks[i];
    if (used[i]) t.id += suffix + std::to_string(++copy);
    used[i] = true;
    out.push_back(std::move(t));
  }
}

std::string pct_text(double fraction) { return csv::format_real(std::round(fraction * 1e6) / 1e4); }

Trace derived_from(const Trace& source, const std::string& descriptor, std::uint64_t seed) {
  Trace out;
  out.provenance.source = source.provenance.source;
  out.provenance.descriptor = source.provenance.descriptor == "original"
                                  ? descriptor
                                  : source.provenance.descriptor + "|" + descriptor;
  out.provenance.seed = seed;
  return out;
}

}  // namespace

Trace parse_trace_csv(std::istream& in, const std::string& origin) {
  csv::expect_header(in, kTraceHeader, origin);
  Trace trace;
  trace.provenance.source = origin;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t row = 1;
  while (csv::read_line(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const std::string where = origin + " row " + std::to_string(row);
    auto f = csv::split(line);
    if (f.size() != 6) {
      throw ConfigError(where + ": expected 6 fields, got " + std::to_string(f.size()));
    }
    TaskSpec t;
    t.id = std::string(csv::trim(f[0]));
    t.cpu_milli = csv::parse_int(f[1], where + " cpu_milli");
    t.memory_mib = csv::parse_int(f[2], where + " memory_mib");
    const std::int64_t num_gpu = csv::parse_int(f[3], where + " num_gpu");
    const Milli gpu_milli = csv::parse_int(f[4], where + " gpu_milli");
    if (t.id.empty()) throw ConfigError(where + ": empty task name");
    if (!ids.insert(t.id).second) throw ConfigError(where + ": duplicate task name '" + t.id + "'");
    if (num_gpu < 0 || gpu_milli < 0) throw ConfigError(where + ": negative GPU demand");
    if (num_gpu >= 1) {
      if (gpu_milli != 0 && gpu_milli != kMilliPerUnit) {
        throw ConfigError(where + ": num_gpu >= 1 requires gpu_milli of 0 or 1000, got " +
                          std::to_string(gpu_milli));
      }
      t.gpu = GpuDemand::full(num_gpu);
    } else if (gpu_milli == 0) {
      t.gpu = GpuDemand::cpu_only();
    } else if (gpu_milli < kMilliPerUnit) {
      t.gpu = GpuDemand::partial(gpu_milli);
    } else {
      throw ConfigError(where + ": fractional GPU demand must be below 1000 milli, got " +
                        std::to_string(gpu_milli));
    }
    std::vector<std::string> models;
    for (auto m : csv::split(csv::trim(f[5]), ';')) models.emplace_back(csv::trim(m));
    t.gpu_constraint = make_model_set(std::move(models));
    try {
      validate(t);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
    trace.tasks.push_back(std::move(t));
  }
  return trace;
}

Trace load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file '" + path + "'");
  return parse_trace_csv(in, path);
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceHeader << '\n';
  for (const TaskSpec& t : trace.tasks) {
    std::int64_t num_gpu = 0;
    Milli gpu_milli = 0;
    if (t.gpu.is_full()) {
      num_gpu = t.gpu.amount();
      gpu_milli = kMilliPerUnit;
    } else if (t.gpu.is_partial()) {
      gpu_milli = t.gpu.amount();
    }
    out << t.id << ',' << t.cpu_milli << ',' << t.memory_mib << ',' << num_gpu << ',' << gpu_milli
        << ',';
    for (std::size_t i = 0; i < t.gpu_constraint.size(); ++i) {
      if (i) out << ';';
      out << t.gpu_constraint[i];
    }
    out << '\n';
  }
}

std::string provenance_text(const TraceProvenance& provenance) {
  std::ostringstream out;
  out << "source=" << provenance.source << '\n';
  out << "descriptor=" << provenance.descriptor << '\n';
  out << "seed=" << provenance.seed << '\n';
  for (const auto& [key, value] : provenance.details) out << key << '=' << value << '\n';
  return out.str();
}

void save_trace(const std::string& path, const Trace& trace) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write trace file '" + path + "'");
    write_trace_csv(out, trace);
    if (!out) throw IoError("error writing '" + path + "'");
  }
  std::ofstream meta(path + ".meta", std::ios::binary);
  if (!meta) throw IoError("cannot write '" + path + ".meta'");
  meta << provenance_text(trace.provenance);
  if (!meta) throw IoError("error writing '" + path + ".meta'");
}

DemandTotals demand_totals(const std::vector<TaskSpec>& tasks) {
  DemandTotals d;
  for (const TaskSpec& t : tasks) {
    switch (t.gpu.kind()) {
      case GpuDemand::Kind::kCpuOnly: ++d.cpu_only_tasks; break;
      case GpuDemand::Kind::kPartial:
        ++d.partial_tasks;
        d.partial_milli += t.gpu.total_milli();
        break;
      case GpuDemand::Kind::kFull:
        ++d.full_tasks;
        d.full_milli += t.gpu.total_milli();
        break;
    }
  }
  return d;
}

Trace derive_multigpu(const Trace& source, int pct, std::uint64_t seed) {
  if (pct < 0) throw ConfigError("multi-GPU increase must be non-negative");
  const auto& tasks = source.tasks;
  Indices full;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].gpu.is_full()) full.push_back(i);
  }
  if (full.empty()) throw ConfigError("multi-GPU derivation needs whole-GPU tasks in the trace");

  Trace out = derived_from(source, "multigpu:" + std::to_string(pct), seed);
  out.tasks = tasks;
  const Milli before = demand_of(tasks, full);
  const Milli target = before * (100 + pct) / 100;
  Rng rng(seed);
  Indices chosen = full;
  grow_by_demand(tasks, full, chosen, target, rng);
  std::vector<bool> used(tasks.size(), true);
  std::vector<TaskSpec> added;
  append_tasks(tasks, Indices(chosen.begin() + static_cast<std::ptrdiff_t>(full.size()), chosen.end()),
               "#mg", added, used);
  for (TaskSpec& t : added) out.tasks.push_back(std::move(t));

  const Milli after = demand_of(tasks, chosen);
  out.provenance.details = {
      {"full_gpu_milli_before", std::to_string(before)},
      {"full_gpu_milli_after", std::to_string(after)},
      {"achieved_increase_pct", pct_text(static_cast<double>(after - before) / static_cast<double>(before))},
  };
  return out;
}

Trace derive_sharinggpu(const Trace& source, int pct, std::uint64_t seed) {
  if (pct < 0 || pct > 100) throw ConfigError("sharing-GPU share must be within 0..100");
  const auto& tasks = source.tasks;
  Indices cpu_only, partial, full;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    switch (tasks[i].gpu.kind()) {
      case GpuDemand::Kind::kCpuOnly: cpu_only.push_back(i); break;
      case GpuDemand::Kind::kPartial: partial.push_back(i); break;
      case GpuDemand::Kind::kFull: full.push_back(i); break;
    }
  }
  if (pct > 0 && partial.empty()) throw ConfigError("sharing-GPU derivation needs partial-GPU tasks");
  if (pct < 100 && full.empty()) throw ConfigError("sharing-GPU derivation needs whole-GPU tasks");

  const Milli total = demand_of(tasks, partial) + demand_of(tasks, full);
  const Milli partial_target = total * pct / 100;
  Rng rng(seed);
  const Indices new_partial = resize_by_demand(tasks, partial, partial_target, rng);
  const Indices new_full = resize_by_demand(tasks, full, total - partial_target, rng);

  const double cpu_share =
      tasks.empty() ? 0.0 : static_cast<double>(cpu_only.size()) / static_cast<double>(tasks.size());
  const std::size_t gpu_tasks = new_partial.size() + new_full.size();
  std::size_t cpu_count = 0;
  if (cpu_share < 1.0) {
    cpu_count = static_cast<std::size_t>(
        std::llround(cpu_share * static_cast<double>(gpu_tasks) / (1.0 - cpu_share)));
  }
  const Indices new_cpu = resize_by_count(cpu_only, cpu_count, rng);

  // Kept originals first in source order, then resampled copies.
  Trace out = derived_from(source, "sharinggpu:" + std::to_string(pct), seed);
  std::vector<bool> used(tasks.size(), false);
  Indices all;
  all.insert(all.end(), new_cpu.begin(), new_cpu.end());
  all.insert(all.end(), new_partial.begin(), new_partial.end());
  all.insert(all.end(), new_full.begin(), new_full.end());
  Indices originals, copies;
  {
    std::vector<bool> seen(tasks.size(), false);
    for (std::size_t i : all) {
      if (!seen[i]) {
        seen[i] = true;
        originals.push_back(i);
      } else {
        copies.push_back(i);
      }
    }
  }
  std::sort(originals.begin(), originals.end());
  append_tasks(tasks, originals, "#sg", out.tasks, used);
  append_tasks(tasks, copies, "#sg", out.tasks, used);

  const DemandTotals d = demand_totals(out.tasks);
  const Milli gpu_total = d.partial_milli + d.full_milli;
  out.provenance.details = {
      {"partial_gpu_share_pct",
       pct_text(gpu_total ? static_cast<double>(d.partial_milli) / static_cast<double>(gpu_total) : 0.0)},
      {"cpu_only_share_before_pct", pct_text(cpu_share)},
      {"cpu_only_share_after_pct",
       pct_text(out.tasks.empty() ? 0.0
                                  : static_cast<double>(d.cpu_only_tasks) /
                                        static_cast<double>(out.tasks.size()))},
      {"gpu_milli_before", std::to_string(total)},
      {"gpu_milli_after", std::to_string(gpu_total)},
  };
  return out;
}

Trace derive_constrained(const Trace& source, int pct, std::uint64_t seed,
                         const ClusterState& cluster) {
  if (pct <= 0 || pct >= 100) throw ConfigError("constrained-GPU share must be within (0, 100)");
  const auto models = gpu_model_counts(cluster);
  if (models.empty()) throw ConfigError("constrained-GPU derivation needs a cluster with GPUs");
  // Largest GPU count of any node, per model.
  std::vector<std::int64_t> widest(models.size(), 0);
  for (const NodeState& n : cluster.nodes()) {
    for (std::size_t m = 0; m < models.size(); ++m) {
      if (n.gpu_model == models[m].first) {
        widest[m] = std::max(widest[m], static_cast<std::int64_t>(n.gpu_count()));
      }
    }
  }

  Trace out = derived_from(source, "constrained:" + std::to_string(pct), seed);
  out.tasks = source.tasks;
  // Tasks that already name a model count toward the target share; the
  // remainder is drawn from the unconstrained GPU tasks, or constraints are
  // lifted when the source already exceeds the target.
  Indices open, pinned;
  for (std::size_t i = 0; i < out.tasks.size(); ++i) {
    if (out.tasks[i].gpu.is_cpu_only()) continue;
    (out.tasks[i].gpu_constraint.empty() ? open : pinned).push_back(i);
  }
  const std::size_t gpu_task_count = open.size() + pinned.size();
  const auto target = static_cast<std::size_t>(
      std::llround(static_cast<double>(gpu_task_count) * pct / 100.0));
  Rng rng(seed);
  std::size_t constrained = pinned.size();
  if (target < pinned.size()) {
    rng.shuffle(std::span<std::size_t>(pinned));
    for (std::size_t j = 0; j < pinned.size() - target; ++j) out.tasks[pinned[j]].gpu_constraint.clear();
    constrained = target;
  }
  rng.shuffle(std::span<std::size_t>(open));
  for (std::size_t j = 0; j < open.size() && constrained < target; ++j) {
    TaskSpec& t = out.tasks[open[j]];
    const std::int64_t need = t.gpu.is_full() ? t.gpu.amount() : 1;
    std::int64_t total = 0;
    for (std::size_t m = 0; m < models.size(); ++m) {
      if (widest[m] >= need) total += models[m].second;
    }
    if (total == 0) continue;
    auto pick = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(total)));
    for (std::size_t m = 0; m < models.size(); ++m) {
      if (widest[m] < need) continue;
      if (pick < models[m].second) {
        t.gpu_constraint = {models[m].first};
        ++constrained;
        break;
      }
      pick -= models[m].second;
    }
  }
  out.provenance.details = {
      {"gpu_tasks", std::to_string(gpu_task_count)},
      {"constrained_tasks", std::to_string(constrained)},
      {"constrained_share_pct",
       pct_text(gpu_task_count == 0 ? 0.0
                                    : static_cast<double>(constrained) /
                                          static_cast<double>(gpu_task_count))},
  };
  return out;
}

int gpu_bucket(const GpuDemand& demand) {
  switch (demand.kind()) {
    case GpuDemand::Kind::kCpuOnly: return 0;
    case GpuDemand::Kind::kPartial: return 1;
    case GpuDemand::Kind::kFull:
      switch (demand.amount()) {
        case 1: return 2;
        case 2: return 3;
        case 4: return 4;
        case 8: return 5;
        default: return -1;
      }
  }
  return -1;
}

namespace {

struct Choice {
  std::int64_t value;
  std::uint64_t weight;
};

std::int64_t draw(Rng& rng, std::span<const Choice> choices) {
  std::uint64_t total = 0;
  for (const Choice& c : choices) total += c.weight;
  std::uint64_t pick = rng.uniform_index(total);
  for (const Choice& c : choices) {
    if (pick < c.weight) return c.value;
    pick -= c.weight;
  }
  return choices.back().value;
}

// Fractional GPU sizes; mean 565 milli, so partial tasks carry about 28.5%
// of all GPU requests next to the whole-GPU buckets.
constexpr Choice kPartialMilli[] = {{100, 4}, {200, 7}, {250, 6}, {300, 6}, {400, 7}, {500, 26},
                                    {600, 6}, {700, 9}, {800, 9}, {900, 10}, {950, 10}};
constexpr Choice kCpuOnlyCpu[] = {{1000, 15}, {2000, 20}, {4000, 30}, {8000, 20}, {16000, 15}};
constexpr Choice kCpuOnlyMem[] = {{2048, 20}, {4096, 30}, {8192, 30}, {16384, 20}};
constexpr Choice kPartialCpu[] = {{1000, 10}, {2000, 20}, {4000, 40}, {6000, 15}, {8000, 15}};
constexpr Choice kPartialMem[] = {{4096, 20}, {8192, 30}, {16384, 35}, {24576, 15}};
constexpr Choice kPerGpuCpu[] = {{4000, 25}, {6000, 25}, {8000, 35}, {12000, 15}};
constexpr Choice kPerGpuMem[] = {{16384, 25}, {24576, 25}, {32768, 35}, {49152, 15}};

}  // namespace

Trace synthesize_default_trace(std::size_t tasks, std::uint64_t seed) {
  constexpr std::size_t kBuckets = std::size(kDefaultBucketShares);
  // Largest-remainder apportionment of the bucket counts.
  std::size_t counts[kBuckets];
  double remainders[kBuckets];
  std::size_t assigned = 0;
  for (std::size_t b = 0; b < kBuckets; ++b) {
    const double exact = kDefaultBucketShares[b] * static_cast<double>(tasks);
    counts[b] = static_cast<std::size_t>(std::floor(exact));
    remainders[b] = exact - std::floor(exact);
    assigned += counts[b];
  }
  std::size_t order[kBuckets];
  std::iota(order, order + kBuckets, std::size_t{0});
  std::stable_sort(order, order + kBuckets,
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < tasks; i = (i + 1) % kBuckets, ++assigned) ++counts[order[i]];

  constexpr std::int64_t kBucketGpus[kBuckets] = {0, 0, 1, 2, 4, 8};
  Rng rng(seed);
  std::vector<TaskSpec> out;
  out.reserve(tasks);
  for (std::size_t b = 0; b < kBuckets; ++b) {
    for (std::size_t i = 0; i < counts[b]; ++i) {
      TaskSpec t;
      if (b == 0) {
        t.gpu = GpuDemand::cpu_only();
        t.cpu_milli = draw(rng, kCpuOnlyCpu);
        t.memory_mib = draw(rng, kCpuOnlyMem);
      } else if (b == 1) {
        t.gpu = GpuDemand::partial(draw(rng, kPartialMilli));
        t.cpu_milli = draw(rng, kPartialCpu);
        t.memory_mib = draw(rng, kPartialMem);
      } else {
        t.gpu = GpuDemand::full(kBucketGpus[b]);
        t.cpu_milli = draw(rng, kPerGpuCpu) * kBucketGpus[b];
        t.memory_mib = draw(rng, kPerGpuMem) * kBucketGpus[b];
      }
      out.push_back(std::move(t));
    }
  }
  rng.shuffle(std::span<TaskSpec>(out));
  for (std::size_t i = 0; i < out.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "syn-%06zu", i);
    out[i].id = id;
  }

  Trace trace;
  trace.tasks = std::move(out);
  trace.provenance.source = "synthetic-default";
  trace.provenance.descriptor = "synth:" + std::to_string(tasks);
  trace.provenance.seed = seed;
  for (std::size_t b = 0; b < kBuckets; ++b) {
    static const char* const kNames[kBuckets] = {"bucket_0", "bucket_partial", "bucket_1",
                                                 "bucket_2", "bucket_4",       "bucket_8"};
    trace.provenance.details.emplace_back(kNames[b], std::to_string(counts[b]));
  }
  return trace;
}

InflationStream::InflationStream(const Trace& base, Milli cluster_gpu_milli, std::uint64_t seed,
                                 double stop_ratio)
    : base_(&base), capacity_(cluster_gpu_milli), stop_ratio_(stop_ratio), rng_(seed) {
  if (!(stop_ratio > 0.0) || !std::isfinite(stop_ratio)) {
    throw ConfigError("stop ratio must be positive");
  }
  has_gpu_demand_ = std::any_of(base.tasks.begin(), base.tasks.end(),
                                [](const TaskSpec& t) { return !t.gpu.is_cpu_only(); });
}

bool InflationStream::exhausted() const {
  if (base_->tasks.empty() || !has_gpu_demand_ || capacity_ <= 0) return true;
  return static_cast<double>(requested_) >= stop_ratio_ * static_cast<double>(capacity_);
}

const TaskSpec* InflationStream::next() {
  if (exhausted()) return nullptr;
  const TaskSpec& t = base_->tasks[rng_.uniform_index(base_->tasks.size())];
  requested_ += t.gpu.total_milli();
  ++draws_;
  return &t;
}

}  // namespace gpusched
