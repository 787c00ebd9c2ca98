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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "gpusched/gpusched.h"

namespace fs = std::filesystem;

namespace {

std::string data(const char* name) { return std::string(GPUSCHED_DATA_DIR) + "/" + name; }

}  // namespace

TEST_SUITE("capi") {
  TEST_CASE("profiles lookup") {
    gpusched_profiles* p = nullptr;
    REQUIRE(gpusched_profiles_load(data("profiles_default.csv").c_str(), &p) == GPUSCHED_OK);
    double idle = 0.0;
    double max = 0.0;
    int64_t cores = 0;
    CHECK(gpusched_profiles_cpu(p, "Xeon ES-2682 V4", &idle, &max, &cores) == GPUSCHED_OK);
    CHECK(idle == 15.0);
    CHECK(max == 120.0);
    CHECK(cores == 16);
    CHECK(gpusched_profiles_gpu(p, "T4", &idle, &max) == GPUSCHED_OK);
    CHECK(max == 70.0);
    CHECK(gpusched_profiles_gpu(p, "H100", &idle, &max) == GPUSCHED_ERR_CONFIG);
    CHECK(std::strstr(gpusched_last_error(), "H100") != nullptr);
    gpusched_profiles_free(p);
  }

  TEST_CASE("error codes") {
    gpusched_cluster* c = nullptr;
    CHECK(gpusched_cluster_load("/nonexistent.csv", &c) == GPUSCHED_ERR_CONFIG);
    CHECK(c == nullptr);
    CHECK(std::strlen(gpusched_last_error()) > 0);
    CHECK(gpusched_cluster_load(nullptr, &c) == GPUSCHED_ERR_ARGUMENT);
    gpusched_policy* pol = nullptr;
    CHECK(gpusched_policy_parse("pwr:1+nope:2", &pol) == GPUSCHED_ERR_CONFIG);
    gpusched_cluster_free(nullptr);
  }

  TEST_CASE("policy alpha") {
    gpusched_policy* pol = nullptr;
    REQUIRE(gpusched_policy_parse("pwr:100+fgd:900", &pol) == GPUSCHED_OK);
    int alpha = -1;
    CHECK(gpusched_policy_alpha_permille(pol, &alpha) == GPUSCHED_OK);
    CHECK(alpha == 100);
    CHECK(std::string(gpusched_policy_name(pol)) == "pwr:100+fgd:900");
    gpusched_policy_free(pol);
    REQUIRE(gpusched_policy_parse("bestfit", &pol) == GPUSCHED_OK);
    CHECK(gpusched_policy_alpha_permille(pol, &alpha) == GPUSCHED_ERR_CONFIG);
    gpusched_policy_free(pol);
  }

  TEST_CASE("simulate through handles") {
    gpusched_profiles* p = nullptr;
    gpusched_cluster* c = nullptr;
    gpusched_trace* t = nullptr;
    gpusched_policy* pol = nullptr;
    REQUIRE(gpusched_profiles_load(data("profiles_default.csv").c_str(), &p) == GPUSCHED_OK);
    REQUIRE(gpusched_cluster_load(data("cluster_toy.csv").c_str(), &c) == GPUSCHED_OK);
    REQUIRE(gpusched_trace_synthesize(300, 4, &t) == GPUSCHED_OK);
    REQUIRE(gpusched_policy_parse("fgd", &pol) == GPUSCHED_OK);
    CHECK(gpusched_cluster_node_count(c) == 6);
    CHECK(gpusched_cluster_gpu_count(c) == 32);

    double cpu_w = 0.0;
    double gpu_w = 0.0;
    REQUIRE(gpusched_cluster_power(c, p, &cpu_w, &gpu_w) == GPUSCHED_OK);
    CHECK(gpu_w == 16 * 30.0 + 4 * 10.0 + 4 * 25.0 + 8 * 50.0);

    gpusched_run_options o;
    gpusched_run_options_init(&o);
    o.seed = 9;
    o.verify = 1;
    gpusched_ledger* l = nullptr;
    REQUIRE(gpusched_simulate(c, p, t, nullptr, pol, &o, &l) == GPUSCHED_OK);
    CHECK(gpusched_ledger_sample_count(l) == 100);
    gpusched_sample s;
    REQUIRE(gpusched_ledger_sample(l, 99, &s) == GPUSCHED_OK);
    CHECK(s.ratio == 1.0);
    CHECK(s.eopc_w == s.eopc_cpu_w + s.eopc_gpu_w);
    CHECK(gpusched_ledger_sample(l, 100, &s) == GPUSCHED_ERR_ARGUMENT);
    CHECK(gpusched_ledger_allocated_milli(l) <= gpusched_ledger_requested_milli(l));
    CHECK(gpusched_ledger_outcome_count(l) == static_cast<size_t>(s.tasks_arrived));

    int64_t buckets[6];
    REQUIRE(gpusched_trace_bucket_counts(t, buckets) == GPUSCHED_OK);
    int64_t total = 0;
    for (int64_t b : buckets) total += b;
    CHECK(total == 300);

    gpusched_ledger_free(l);
    gpusched_policy_free(pol);
    gpusched_trace_free(t);
    gpusched_cluster_free(c);
    gpusched_profiles_free(p);
  }

  TEST_CASE("experiment and report") {
    const fs::path out = fs::temp_directory_path() / "gpusched_capi_exp";
    fs::remove_all(out);
    const std::string cluster = data("cluster_toy.csv");
    const std::string profiles = data("profiles_default.csv");
    const std::string trace = data("trace_default_synth.csv");
    const char* policies[] = {"fgd", "pwr"};
    const uint64_t seeds[] = {1, 2};
    gpusched_experiment_config cfg;
    gpusched_experiment_config_init(&cfg);
    cfg.name = "capi";
    cfg.cluster_path = cluster.c_str();
    cfg.profiles_path = profiles.c_str();
    cfg.trace_path = trace.c_str();
    cfg.policies = policies;
    cfg.policy_count = 2;
    cfg.baseline = "fgd";
    cfg.seeds = seeds;
    cfg.seed_count = 2;
    const std::string out_dir = out.string();
    cfg.out_dir = out_dir.c_str();
    REQUIRE(gpusched_experiment_run(&cfg) == GPUSCHED_OK);
    CHECK(fs::exists(out / "capi" / "pwr" / "ledger_seed2.csv"));
    CHECK(fs::exists(out / "capi" / "savings_vs_fgd.csv"));

    int warnings = 0;
    fs::remove(out / "capi" / "pwr" / "ledger_seed2.csv");
    CHECK(gpusched_report((out / "capi").string().c_str(), nullptr,
                          [](const char*, void* user) { ++*static_cast<int*>(user); },
                          &warnings) == GPUSCHED_OK);
    CHECK(warnings == 1);

    cfg.profiles_path = "/nonexistent.csv";
    CHECK(gpusched_experiment_run(&cfg) == GPUSCHED_ERR_CONFIG);
    fs::remove_all(out);
  }
}
