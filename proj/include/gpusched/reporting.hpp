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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gpusched/engine.hpp"

namespace gpusched {

// Mean of MetricSamples across repetitions at one checkpoint.
struct CurvePoint {
  double ratio = 0.0;
  double eopc_w = 0.0;
  double eopc_cpu_w = 0.0;
  double eopc_gpu_w = 0.0;
  double grar = 0.0;
  double frag_milli = 0.0;
  double tasks_arrived = 0.0;
  double tasks_failed = 0.0;

  bool operator==(const CurvePoint&) const = default;
};

struct Curve {
  std::string policy;
  std::size_t repetitions = 0;
  std::vector<CurvePoint> points;
};

// Per-checkpoint arithmetic mean. Throws ConfigError when `ledgers` is
// empty or the ledgers do not share one checkpoint grid.
Curve aggregate(const std::vector<RunLedger>& ledgers);

// 100 * (baseline - policy) / baseline per checkpoint; nullopt where the
// baseline is zero. Throws ConfigError on misaligned grids.
std::vector<std::optional<double>> power_savings(const Curve& policy, const Curve& baseline);

// eopc_gpu_w / eopc_w per checkpoint; nullopt where the total is zero.
std::vector<std::optional<double>> gpu_power_fraction(const Curve& curve);

// curve.csv: policy,ratio,eopc_w,eopc_cpu_w,eopc_gpu_w,gpu_power_fraction,
// grar,frag_milli,tasks_arrived,tasks_failed
void write_curve_csv(std::ostream& out, const Curve& curve);
Curve parse_curve_csv(std::istream& in, const std::string& origin = "<stream>");

// Ordered key=value pairs.
using Manifest = std::vector<std::pair<std::string, std::string>>;

void write_manifest(std::ostream& out, const Manifest& manifest);
Manifest parse_manifest(std::istream& in);
std::optional<std::string> manifest_get(const Manifest& manifest, const std::string& key);

struct Report {
  std::string experiment;
  std::vector<Curve> curves;             // one per policy, in run order
  std::optional<std::string> baseline;   // policy name savings are computed against
  // Optional sweep axis: alpha per-mille of each curve, same order as curves.
  std::vector<std::pair<int, std::string>> alpha_policies;
  Manifest manifest;
};

// Directory name used for a policy's files (":" and "+" are replaced).
std::string policy_dir_name(const std::string& policy);

// Writes <out>/<exp>/<policy>/curve.csv, <out>/<exp>/grar.csv,
// <out>/<exp>/savings_vs_<baseline>.csv (when a baseline is set),
// <out>/<exp>/savings_by_alpha.csv (sweeps) and <out>/<exp>/manifest.txt.
// Throws IoError.
void emit(const Report& report, const std::string& out_dir, bool write_manifest_file = true);

}  // namespace gpusched
