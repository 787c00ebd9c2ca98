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
#include "gpusched/reporting.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "gpusched/csv.hpp"
#include "gpusched/errors.hpp"

namespace gpusched {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kCurveHeader =
    "policy,ratio,eopc_w,eopc_cpu_w,eopc_gpu_w,gpu_power_fraction,grar,frag_milli,tasks_arrived,"
    "tasks_failed";

std::string optional_cell(const std::optional<double>& v) {
  return v ? csv::format_real(*v) : std::string();
}

void check_aligned(const Curve& a, const Curve& b) {
  if (a.points.size() != b.points.size()) throw ConfigError("curves have different checkpoint grids");
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (a.points[i].ratio != b.points[i].ratio) {
      throw ConfigError("curves have different checkpoint grids");
    }
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace

Curve aggregate(const std::vector<RunLedger>& ledgers) {
  if (ledgers.empty()) throw ConfigError("nothing to aggregate");
  const RunLedger& first = ledgers.front();
  for (const RunLedger& l : ledgers) {
    if (l.policy != first.policy) throw ConfigError("cannot aggregate ledgers of different policies");
    if (l.samples.size() != first.samples.size()) {
      throw ConfigError("ledgers have different checkpoint grids");
    }
    for (std::size_t i = 0; i < l.samples.size(); ++i) {
      if (l.samples[i].ratio != first.samples[i].ratio) {
        throw ConfigError("ledgers have different checkpoint grids");
      }
    }
  }
  Curve curve;
  curve.policy = first.policy;
  curve.repetitions = ledgers.size();
  const auto n = static_cast<double>(ledgers.size());
  for (std::size_t i = 0; i < first.samples.size(); ++i) {
    CurvePoint p;
    p.ratio = first.samples[i].ratio;
    for (const RunLedger& l : ledgers) {
      const MetricSample& s = l.samples[i];
      p.eopc_w += s.eopc_w;
      p.eopc_cpu_w += s.eopc_cpu_w;
      p.eopc_gpu_w += s.eopc_gpu_w;
      p.grar += s.grar;
      p.frag_milli += static_cast<double>(s.frag_milli);
      p.tasks_arrived += static_cast<double>(s.tasks_arrived);
      p.tasks_failed += static_cast<double>(s.tasks_failed);
    }
    p.eopc_w /= n;
    p.eopc_cpu_w /= n;
    p.eopc_gpu_w /= n;
    p.grar /= n;
    p.frag_milli /= n;
    p.tasks_arrived /= n;
    p.tasks_failed /= n;
    curve.points.push_back(p);
  }
  return curve;
}

std::vector<std::optional<double>> power_savings(const Curve& policy, const Curve& baseline) {
  check_aligned(policy, baseline);
  std::vector<std::optional<double>> out;
  out.reserve(policy.points.size());
  for (std::size_t i = 0; i < policy.points.size(); ++i) {
    const double base = baseline.points[i].eopc_w;
    if (base == 0.0) {
      out.emplace_back();
    } else {
      out.emplace_back(100.0 * (base - policy.points[i].eopc_w) / base);
    }
  }
  return out;
}

std::vector<std::optional<double>> gpu_power_fraction(const Curve& curve) {
  std::vector<std::optional<double>> out;
  out.reserve(curve.points.size());
  for (const CurvePoint& p : curve.points) {
    if (p.eopc_w == 0.0) {
      out.emplace_back();
    } else {
      out.emplace_back(p.eopc_gpu_w / p.eopc_w);
    }
  }
  return out;
}

void write_curve_csv(std::ostream& out, const Curve& curve) {
  const auto fraction = gpu_power_fraction(curve);
  out << kCurveHeader << '\n';
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const CurvePoint& p = curve.points[i];
    out << curve.policy << ',' << csv::format_real(p.ratio) << ',' << csv::format_real(p.eopc_w)
        << ',' << csv::format_real(p.eopc_cpu_w) << ',' << csv::format_real(p.eopc_gpu_w) << ','
        << optional_cell(fraction[i]) << ',' << csv::format_real(p.grar) << ','
        << csv::format_real(p.frag_milli) << ',' << csv::format_real(p.tasks_arrived) << ','
        << csv::format_real(p.tasks_failed) << '\n';
  }
}

Curve parse_curve_csv(std::istream& in, const std::string& origin) {
  csv::expect_header(in, kCurveHeader, origin);
  Curve curve;
  std::string line;
  std::size_t row = 1;
  while (csv::read_line(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const std::string where = origin + " row " + std::to_string(row);
    auto f = csv::split(line);
    if (f.size() != 10) throw ConfigError(where + ": expected 10 fields");
    curve.policy = std::string(csv::trim(f[0]));
    CurvePoint p;
    p.ratio = csv::parse_real(f[1], where + " ratio");
    p.eopc_w = csv::parse_real(f[2], where + " eopc_w");
    p.eopc_cpu_w = csv::parse_real(f[3], where + " eopc_cpu_w");
    p.eopc_gpu_w = csv::parse_real(f[4], where + " eopc_gpu_w");
    p.grar = csv::parse_real(f[6], where + " grar");
    p.frag_milli = csv::parse_real(f[7], where + " frag_milli");
    p.tasks_arrived = csv::parse_real(f[8], where + " tasks_arrived");
    p.tasks_failed = csv::parse_real(f[9], where + " tasks_failed");
    curve.points.push_back(p);
  }
  return curve;
}

void write_manifest(std::ostream& out, const Manifest& manifest) {
  for (const auto& [key, value] : manifest) out << key << '=' << value << '\n';
}

Manifest parse_manifest(std::istream& in) {
  Manifest manifest;
  std::string line;
  while (csv::read_line(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    manifest.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return manifest;
}

std::optional<std::string> manifest_get(const Manifest& manifest, const std::string& key) {
  for (const auto& [k, v] : manifest) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string policy_dir_name(const std::string& policy) {
  std::string out = policy;
  for (char& c : out) {
    if (c == ':') c = '-';
    if (c == '+') c = '_';
  }
  return out;
}

void emit(const Report& report, const std::string& out_dir, bool write_manifest_file) {
  const fs::path exp_dir = fs::path(out_dir) / report.experiment;
  std::error_code ec;
  fs::create_directories(exp_dir, ec);
  if (ec) throw IoError("cannot create '" + exp_dir.string() + "': " + ec.message());

  for (const Curve& curve : report.curves) {
    const fs::path dir = exp_dir / policy_dir_name(curve.policy);
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    const fs::path path = dir / "curve.csv";
    std::ofstream out = open_out(path);
    write_curve_csv(out, curve);
    finish(out, path);
  }

  {
    const fs::path path = exp_dir / "grar.csv";
    std::ofstream out = open_out(path);
    out << "policy,ratio,grar\n";
    for (const Curve& curve : report.curves) {
      for (const CurvePoint& p : curve.points) {
        out << curve.policy << ',' << csv::format_real(p.ratio) << ',' << csv::format_real(p.grar)
            << '\n';
      }
    }
    finish(out, path);
  }

  const Curve* baseline = nullptr;
  if (report.baseline) {
    for (const Curve& c : report.curves) {
      if (c.policy == *report.baseline) baseline = &c;
    }
    if (!baseline) throw ConfigError("baseline policy '" + *report.baseline + "' has no curve");
    const fs::path path = exp_dir / ("savings_vs_" + policy_dir_name(*report.baseline) + ".csv");
    std::ofstream out = open_out(path);
    out << "policy,ratio,savings_pct\n";
    for (const Curve& curve : report.curves) {
      if (&curve == baseline) continue;
      const auto savings = power_savings(curve, *baseline);
      for (std::size_t i = 0; i < curve.points.size(); ++i) {
        out << curve.policy << ',' << csv::format_real(curve.points[i].ratio) << ','
            << optional_cell(savings[i]) << '\n';
      }
    }
    finish(out, path);
  }

  if (!report.alpha_policies.empty()) {
    if (!baseline) throw ConfigError("alpha sweep report needs a baseline");
    const fs::path path = exp_dir / "savings_by_alpha.csv";
    std::ofstream out = open_out(path);
    out << "alpha_permille,ratio,savings_pct\n";
    for (const auto& [alpha, policy] : report.alpha_policies) {
      const Curve* curve = nullptr;
      for (const Curve& c : report.curves) {
        if (c.policy == policy) curve = &c;
      }
      if (!curve) throw ConfigError("alpha sweep policy '" + policy + "' has no curve");
      const auto savings = power_savings(*curve, *baseline);
      for (std::size_t i = 0; i < curve->points.size(); ++i) {
        out << alpha << ',' << csv::format_real(curve->points[i].ratio) << ','
            << optional_cell(savings[i]) << '\n';
      }
    }
    finish(out, path);
  }

  if (write_manifest_file) {
    const fs::path path = exp_dir / "manifest.txt";
    std::ofstream out = open_out(path);
    write_manifest(out, report.manifest);
    finish(out, path);
  }
}

}  // namespace gpusched
