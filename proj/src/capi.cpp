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
#include "gpusched/gpusched.h"

#include <fstream>
#include <new>
#include <string>

#include "gpusched/engine.hpp"
#include "gpusched/errors.hpp"
#include "gpusched/experiment.hpp"

using namespace gpusched;

struct gpusched_profiles {
  HardwareProfile value;
};
struct gpusched_cluster {
  ClusterState value;
};
struct gpusched_trace {
  Trace value;
};
struct gpusched_workload {
  TargetWorkload value;
};
struct gpusched_policy {
  PolicyConfig value;
};
struct gpusched_ledger {
  RunLedger value;
};

namespace {

thread_local std::string last_error;

template <typename Fn>
gpusched_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return GPUSCHED_OK;
  } catch (const ConfigError& e) {
    last_error = e.what();
    return GPUSCHED_ERR_CONFIG;
  } catch (const InvariantError& e) {
    last_error = e.what();
    return GPUSCHED_ERR_INVARIANT;
  } catch (const IoError& e) {
    last_error = e.what();
    return GPUSCHED_ERR_IO;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return GPUSCHED_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GPUSCHED_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return GPUSCHED_ERR_INTERNAL;
  }
}

gpusched_status bad_argument(const char* what) {
  last_error = std::string("invalid argument: ") + what;
  return GPUSCHED_ERR_ARGUMENT;
}

FragOptions frag_options(int strict_cond3, int cpuonly_frag_zero) {
  FragOptions f;
  f.rule = strict_cond3 ? Cond3Rule::kStrict : Cond3Rule::kPermissive;
  f.cpu_only = cpuonly_frag_zero ? CpuOnlyFrag::kZero : CpuOnlyFrag::kLiteral;
  return f;
}

}  // namespace

extern "C" {

const char* gpusched_version(void) { return "1.0.0"; }

const char* gpusched_last_error(void) { return last_error.c_str(); }

gpusched_status gpusched_profiles_load(const char* path, gpusched_profiles** out) {
  if (!path || !out) return bad_argument("path/out");
  return guarded([&] { *out = new gpusched_profiles{load_profiles_csv(path)}; });
}

void gpusched_profiles_free(gpusched_profiles* profiles) { delete profiles; }

gpusched_status gpusched_profiles_cpu(const gpusched_profiles* profiles, const char* model,
                                      double* idle_w, double* max_w, int64_t* ncores) {
  if (!profiles || !model || !idle_w || !max_w || !ncores) return bad_argument("profiles/model/out");
  return guarded([&] {
    const CpuProfile& p = profiles->value.cpu(model);
    *idle_w = p.idle_w;
    *max_w = p.max_w;
    *ncores = p.ncores;
  });
}

gpusched_status gpusched_profiles_gpu(const gpusched_profiles* profiles, const char* model,
                                      double* idle_w, double* max_w) {
  if (!profiles || !model || !idle_w || !max_w) return bad_argument("profiles/model/out");
  return guarded([&] {
    const GpuProfile& p = profiles->value.gpu(model);
    *idle_w = p.idle_w;
    *max_w = p.max_w;
  });
}

gpusched_status gpusched_cluster_load(const char* path, gpusched_cluster** out) {
  if (!path || !out) return bad_argument("path/out");
  return guarded([&] { *out = new gpusched_cluster{load_cluster_csv(path)}; });
}

void gpusched_cluster_free(gpusched_cluster* cluster) { delete cluster; }

size_t gpusched_cluster_node_count(const gpusched_cluster* cluster) {
  return cluster ? cluster->value.size() : 0;
}

int64_t gpusched_cluster_gpu_count(const gpusched_cluster* cluster) {
  return cluster ? cluster->value.total_gpus() : 0;
}

int64_t gpusched_cluster_cpu_milli(const gpusched_cluster* cluster) {
  return cluster ? cluster->value.total_cpu_milli() : 0;
}

gpusched_status gpusched_cluster_power(const gpusched_cluster* cluster,
                                       const gpusched_profiles* profiles, double* cpu_w,
                                       double* gpu_w) {
  if (!cluster || !profiles || !cpu_w || !gpu_w) return bad_argument("cluster/profiles/out");
  return guarded([&] {
    const PowerBreakdown p = datacenter_power(cluster->value, profiles->value);
    *cpu_w = p.cpu_w;
    *gpu_w = p.gpu_w;
  });
}

gpusched_status gpusched_cluster_fragmentation(const gpusched_cluster* cluster,
                                               const gpusched_workload* workload,
                                               double* frag_milli) {
  if (!cluster || !workload || !frag_milli) return bad_argument("cluster/workload/out");
  return guarded([&] { *frag_milli = frag_datacenter(cluster->value, workload->value); });
}

gpusched_status gpusched_trace_load(const char* path, gpusched_trace** out) {
  if (!path || !out) return bad_argument("path/out");
  return guarded([&] { *out = new gpusched_trace{load_trace_csv(path)}; });
}

gpusched_status gpusched_trace_save(const gpusched_trace* trace, const char* path) {
  if (!trace || !path) return bad_argument("trace/path");
  return guarded([&] { save_trace(path, trace->value); });
}

void gpusched_trace_free(gpusched_trace* trace) { delete trace; }

size_t gpusched_trace_size(const gpusched_trace* trace) {
  return trace ? trace->value.tasks.size() : 0;
}

gpusched_status gpusched_trace_synthesize(size_t tasks, uint64_t seed, gpusched_trace** out) {
  if (!out) return bad_argument("out");
  return guarded([&] { *out = new gpusched_trace{synthesize_default_trace(tasks, seed)}; });
}

gpusched_status gpusched_trace_derive(const gpusched_trace* trace, const char* kind, int pct,
                                      uint64_t seed, const gpusched_cluster* cluster,
                                      gpusched_trace** out) {
  if (!trace || !kind || !out) return bad_argument("trace/kind/out");
  return guarded([&] {
    const std::string k(kind);
    if (k == "multigpu") {
      *out = new gpusched_trace{derive_multigpu(trace->value, pct, seed)};
    } else if (k == "sharinggpu") {
      *out = new gpusched_trace{derive_sharinggpu(trace->value, pct, seed)};
    } else if (k == "constrained") {
      if (!cluster) throw ConfigError("constrained derivation needs a cluster");
      *out = new gpusched_trace{derive_constrained(trace->value, pct, seed, cluster->value)};
    } else {
      throw ConfigError("unknown derivation kind '" + k + "'");
    }
  });
}

gpusched_status gpusched_trace_bucket_counts(const gpusched_trace* trace, int64_t counts[6]) {
  if (!trace || !counts) return bad_argument("trace/counts");
  for (int b = 0; b < 6; ++b) counts[b] = 0;
  for (const TaskSpec& t : trace->value.tasks) {
    const int b = gpu_bucket(t.gpu);
    if (b >= 0) ++counts[b];
  }
  last_error.clear();
  return GPUSCHED_OK;
}

gpusched_status gpusched_workload_derive(const gpusched_trace* trace, gpusched_workload** out) {
  if (!trace || !out) return bad_argument("trace/out");
  return guarded([&] { *out = new gpusched_workload{derive_target_workload(trace->value.tasks)}; });
}

gpusched_status gpusched_workload_load(const char* path, gpusched_workload** out) {
  if (!path || !out) return bad_argument("path/out");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string("cannot open workload file '") + path + "'");
    *out = new gpusched_workload{parse_workload_csv(in, path)};
  });
}

gpusched_status gpusched_workload_save(const gpusched_workload* workload, const char* path) {
  if (!workload || !path) return bad_argument("workload/path");
  return guarded([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(std::string("cannot write '") + path + "'");
    write_workload_csv(out, workload->value);
    if (!out) throw IoError(std::string("error writing '") + path + "'");
  });
}

void gpusched_workload_free(gpusched_workload* workload) { delete workload; }

size_t gpusched_workload_class_count(const gpusched_workload* workload) {
  return workload ? workload->value.classes().size() : 0;
}

gpusched_status gpusched_policy_parse(const char* spec, gpusched_policy** out) {
  if (!spec || !out) return bad_argument("spec/out");
  return guarded([&] { *out = new gpusched_policy{PolicyConfig::parse(spec)}; });
}

void gpusched_policy_free(gpusched_policy* policy) { delete policy; }

const char* gpusched_policy_name(const gpusched_policy* policy) {
  return policy ? policy->value.name().c_str() : "";
}

gpusched_status gpusched_policy_alpha_permille(const gpusched_policy* policy,
                                               int* alpha_permille) {
  if (!policy || !alpha_permille) return bad_argument("policy/out");
  return guarded([&] {
    double pwr = 0.0;
    double total = 0.0;
    for (const PolicyComponent& c : policy->value.components()) {
      const auto name = c.plugin->name();
      if (name != "pwr" && name != "fgd") {
        throw ConfigError("policy " + policy->value.name() + " is not a pwr/fgd combination");
      }
      if (name == "pwr") pwr += c.weight;
      total += c.weight;
    }
    *alpha_permille = static_cast<int>(std::lround(1000.0 * pwr / total));
  });
}

void gpusched_run_options_init(gpusched_run_options* options) {
  if (!options) return;
  *options = gpusched_run_options{};
  options->checkpoint_step = 0.01;
  options->stop_ratio = 1.0;
}

gpusched_status gpusched_simulate(const gpusched_cluster* cluster,
                                  const gpusched_profiles* profiles, const gpusched_trace* trace,
                                  const gpusched_workload* workload, const gpusched_policy* policy,
                                  const gpusched_run_options* options, gpusched_ledger** out) {
  if (!cluster || !profiles || !trace || !policy || !options || !out) {
    return bad_argument("cluster/profiles/trace/policy/options/out");
  }
  return guarded([&] {
    RunOptions o;
    o.seed = options->seed;
    o.checkpoints = checkpoints_for_step(options->checkpoint_step);
    o.stop_ratio = options->stop_ratio;
    o.frag = frag_options(options->strict_cond3, options->cpuonly_frag_zero);
    o.verify = options->verify != 0;
    TargetWorkload derived;
    if (!workload && !trace->value.tasks.empty()) derived = derive_target_workload(trace->value.tasks);
    const TargetWorkload& m = workload ? workload->value : derived;
    *out = new gpusched_ledger{
        run(cluster->value, profiles->value, trace->value, m, policy->value, o)};
  });
}

void gpusched_ledger_free(gpusched_ledger* ledger) { delete ledger; }

size_t gpusched_ledger_sample_count(const gpusched_ledger* ledger) {
  return ledger ? ledger->value.samples.size() : 0;
}

gpusched_status gpusched_ledger_sample(const gpusched_ledger* ledger, size_t index,
                                       gpusched_sample* out) {
  if (!ledger || !out) return bad_argument("ledger/out");
  if (index >= ledger->value.samples.size()) return bad_argument("sample index out of range");
  const MetricSample& s = ledger->value.samples[index];
  *out = gpusched_sample{s.ratio, s.eopc_w, s.eopc_cpu_w, s.eopc_gpu_w, s.grar,
                         s.frag_milli, s.tasks_arrived, s.tasks_failed};
  last_error.clear();
  return GPUSCHED_OK;
}

int64_t gpusched_ledger_requested_milli(const gpusched_ledger* ledger) {
  return ledger ? ledger->value.requested_milli : 0;
}

int64_t gpusched_ledger_allocated_milli(const gpusched_ledger* ledger) {
  return ledger ? ledger->value.allocated_milli : 0;
}

size_t gpusched_ledger_outcome_count(const gpusched_ledger* ledger) {
  return ledger ? ledger->value.outcomes.size() : 0;
}

int64_t gpusched_ledger_outcome_node(const gpusched_ledger* ledger, size_t index) {
  if (!ledger || index >= ledger->value.outcomes.size()) return -1;
  return ledger->value.outcomes[index].node;
}

gpusched_status gpusched_ledger_save(const gpusched_ledger* ledger, const char* path) {
  if (!ledger || !path) return bad_argument("ledger/path");
  return guarded([&] { save_ledger_csv(path, ledger->value); });
}

void gpusched_experiment_config_init(gpusched_experiment_config* config) {
  if (!config) return;
  *config = gpusched_experiment_config{};
  config->name = "exp";
  config->checkpoint_step = 0.01;
  config->stop_ratio = 1.0;
}

gpusched_status gpusched_experiment_run(const gpusched_experiment_config* config) {
  if (!config) return bad_argument("config");
  return guarded([&] {
    ExperimentConfig c;
    auto str = [](const char* s) { return s ? std::string(s) : std::string(); };
    c.name = config->name ? config->name : "exp";
    c.cluster_path = str(config->cluster_path);
    c.profiles_path = str(config->profiles_path);
    c.trace_path = str(config->trace_path);
    c.workload_path = str(config->workload_path);
    for (size_t i = 0; i < config->policy_count; ++i) {
      if (!config->policies || !config->policies[i]) throw ConfigError("NULL policy entry");
      c.policies.emplace_back(config->policies[i]);
    }
    if (config->baseline) c.baseline = std::string(config->baseline);
    for (size_t i = 0; i < config->alpha_count; ++i) c.alphas.push_back(config->alphas[i]);
    for (size_t i = 0; i < config->seed_count; ++i) c.seeds.push_back(config->seeds[i]);
    c.checkpoint_step = config->checkpoint_step;
    c.stop_ratio = config->stop_ratio;
    c.frag = frag_options(config->strict_cond3, config->cpuonly_frag_zero);
    c.threads = config->threads;
    c.verify = config->verify != 0;
    c.out_dir = str(config->out_dir);
    run_experiment(c);
  });
}

gpusched_status gpusched_report(const char* experiment_dir, const char* baseline,
                                 gpusched_warning_fn warn, void* user) {
  if (!experiment_dir) return bad_argument("experiment_dir");
  return guarded([&] {
    std::vector<std::string> warnings;
    std::optional<std::string> base;
    if (baseline) base = std::string(baseline);
    report_from_directory(experiment_dir, base, &warnings);
    if (warn) {
      for (const std::string& w : warnings) warn(w.c_str(), user);
    }
  });
}

}  // extern "C"
