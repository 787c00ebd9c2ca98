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
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gpusched/errors.hpp"
#include "gpusched/reporting.hpp"
#include "support.hpp"

using namespace gpusched;
using namespace gpusched::testing;

namespace fs = std::filesystem;

namespace {

RunLedger ledger(const std::string& policy, std::uint64_t seed, std::vector<double> eopc) {
  RunLedger l;
  l.policy = policy;
  l.seed = seed;
  for (std::size_t i = 0; i < eopc.size(); ++i) {
    MetricSample s;
    s.ratio = static_cast<double>(i + 1) / static_cast<double>(eopc.size());
    s.eopc_w = eopc[i];
    s.eopc_gpu_w = eopc[i] * 0.75;
    s.eopc_cpu_w = eopc[i] - s.eopc_gpu_w;
    s.grar = 1.0 - 0.1 * static_cast<double>(i);
    l.samples.push_back(s);
  }
  return l;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_SUITE("reporting") {
  TEST_CASE("aggregate means") {
    const Curve one = aggregate({ledger("fgd", 1, {100.0, 300.0})});
    CHECK(one.points[0].eopc_w == 100.0);
    CHECK(one.points[1].eopc_w == 300.0);
    const Curve two = aggregate({ledger("fgd", 1, {100.0}), ledger("fgd", 2, {200.0})});
    CHECK(two.points[0].eopc_w == 150.0);
    CHECK(two.repetitions == 2);
    CHECK_THROWS_AS(aggregate({}), ConfigError);
    CHECK_THROWS_AS(aggregate({ledger("fgd", 1, {1.0}), ledger("pwr", 1, {1.0})}), ConfigError);
    CHECK_THROWS_AS(aggregate({ledger("fgd", 1, {1.0}), ledger("fgd", 2, {1.0, 2.0})}), ConfigError);
  }

  TEST_CASE("grar mean stays in the unit interval") {
    const Curve c = aggregate({ledger("fgd", 1, {1.0, 1.0, 1.0}), ledger("fgd", 2, {1.0, 1.0, 1.0})});
    for (const CurvePoint& p : c.points) {
      CHECK(p.grar >= 0.0);
      CHECK(p.grar <= 1.0);
    }
  }

  TEST_CASE("power savings") {
    const Curve base = aggregate({ledger("fgd", 1, {1000.0, 500.0})});
    const Curve pol = aggregate({ledger("pwr", 1, {870.0, 550.0})});
    const auto same = power_savings(base, base);
    CHECK(*same[0] == 0.0);
    const auto s = power_savings(pol, base);
    CHECK(*s[0] == doctest::Approx(13.0));
    CHECK(*s[1] == doctest::Approx(-10.0));
    const Curve zero = aggregate({ledger("fgd", 1, {0.0, 0.0})});
    CHECK_FALSE(power_savings(pol, zero)[0].has_value());
  }

  TEST_CASE("gpu power fraction") {
    Curve c;
    c.points.push_back({0.5, 100.0, 0.0, 100.0, 1.0, 0.0, 0.0, 0.0});
    c.points.push_back({1.0, 100.0, 100.0, 0.0, 1.0, 0.0, 0.0, 0.0});
    c.points.push_back({1.5, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0});
    const auto f = gpu_power_fraction(c);
    CHECK(*f[0] == 1.0);
    CHECK(*f[1] == 0.0);
    CHECK_FALSE(f[2].has_value());
  }

  TEST_CASE("curve csv round trip") {
    const Curve c = aggregate({ledger("pwr:100+fgd:900", 1, {100.5, 200.25})});
    std::ostringstream out;
    write_curve_csv(out, c);
    CHECK(out.str().rfind("policy,ratio,eopc_w,eopc_cpu_w,eopc_gpu_w,gpu_power_fraction,grar,frag_milli,"
                          "tasks_arrived,tasks_failed\n",
                          0) == 0);
    std::istringstream in(out.str());
    const Curve back = parse_curve_csv(in);
    CHECK(back.policy == c.policy);
    CHECK(back.points == c.points);
  }

  TEST_CASE("manifest round trip") {
    const Manifest m = {{"experiment", "x"}, {"seeds", "1,2,3"}};
    std::ostringstream out;
    write_manifest(out, m);
    std::istringstream in(out.str());
    CHECK(parse_manifest(in) == m);
    CHECK(manifest_get(m, "seeds") == std::optional<std::string>("1,2,3"));
    CHECK_FALSE(manifest_get(m, "missing").has_value());
  }

  TEST_CASE("emit writes stable files") {
    const fs::path dir = fs::temp_directory_path() / "gpusched_emit_test";
    fs::remove_all(dir);
    Report r;
    r.experiment = "demo";
    r.curves = {aggregate({ledger("fgd", 1, {100.0, 200.0})}),
                aggregate({ledger("pwr:100+fgd:900", 1, {90.0, 190.0})})};
    r.baseline = "fgd";
    r.alpha_policies = {{0, "fgd"}, {100, "pwr:100+fgd:900"}};
    r.manifest = {{"experiment", "demo"}, {"seeds", "1,2,3,4,5,6,7,8,9,10"}};
    emit(r, dir.string());
    const fs::path exp = dir / "demo";
    CHECK(fs::exists(exp / "fgd" / "curve.csv"));
    CHECK(fs::exists(exp / "pwr-100_fgd-900" / "curve.csv"));
    const std::string savings = slurp(exp / "savings_vs_fgd.csv");
    CHECK(savings == "policy,ratio,savings_pct\npwr:100+fgd:900,0.5,10\npwr:100+fgd:900,1,5\n");
    const std::string by_alpha = slurp(exp / "savings_by_alpha.csv");
    CHECK(by_alpha == "alpha_permille,ratio,savings_pct\n0,0.5,0\n0,1,0\n100,0.5,10\n100,1,5\n");
    CHECK(slurp(exp / "manifest.txt").find("seeds=1,2,3,4,5,6,7,8,9,10") != std::string::npos);

    const std::string first = slurp(exp / "fgd" / "curve.csv") + slurp(exp / "grar.csv");
    emit(r, dir.string());
    CHECK(slurp(exp / "fgd" / "curve.csv") + slurp(exp / "grar.csv") == first);
    fs::remove_all(dir);
  }

  TEST_CASE("policy directory names") {
    CHECK(policy_dir_name("fgd") == "fgd");
    CHECK(policy_dir_name("pwr:50+fgd:950") == "pwr-50_fgd-950");
  }
}
