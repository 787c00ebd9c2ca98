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
/* C interface of the gpusched simulator library.
 *
 * Every object is an opaque handle created by a *_load / *_create style
 * function and released by the matching *_free. Functions return a
 * gpusched_status; on failure gpusched_last_error() describes the problem
 * (thread-local, valid until the next call on the same thread). */

#ifndef GPUSCHED_H_
#define GPUSCHED_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GPUSCHED_API __declspec(dllexport)
#else
#define GPUSCHED_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gpusched_status {
  GPUSCHED_OK = 0,
  GPUSCHED_ERR_CONFIG = 1,    /* bad input file, flag or argument value */
  GPUSCHED_ERR_INVARIANT = 2, /* internal invariant violated (simulator bug) */
  GPUSCHED_ERR_IO = 3,        /* failure writing output */
  GPUSCHED_ERR_ARGUMENT = 4,  /* NULL handle or out-pointer */
  GPUSCHED_ERR_INTERNAL = 5
} gpusched_status;

typedef struct gpusched_profiles gpusched_profiles;
typedef struct gpusched_cluster gpusched_cluster;
typedef struct gpusched_trace gpusched_trace;
typedef struct gpusched_workload gpusched_workload;
typedef struct gpusched_policy gpusched_policy;
typedef struct gpusched_ledger gpusched_ledger;

GPUSCHED_API const char* gpusched_version(void);
GPUSCHED_API const char* gpusched_last_error(void);

/* Hardware profiles */
GPUSCHED_API gpusched_status gpusched_profiles_load(const char* path, gpusched_profiles** out);
GPUSCHED_API void gpusched_profiles_free(gpusched_profiles* profiles);
GPUSCHED_API gpusched_status gpusched_profiles_cpu(const gpusched_profiles* profiles,
                                                   const char* model, double* idle_w,
                                                   double* max_w, int64_t* ncores);
GPUSCHED_API gpusched_status gpusched_profiles_gpu(const gpusched_profiles* profiles,
                                                   const char* model, double* idle_w,
                                                   double* max_w);

/* Clusters */
GPUSCHED_API gpusched_status gpusched_cluster_load(const char* path, gpusched_cluster** out);
GPUSCHED_API void gpusched_cluster_free(gpusched_cluster* cluster);
GPUSCHED_API size_t gpusched_cluster_node_count(const gpusched_cluster* cluster);
GPUSCHED_API int64_t gpusched_cluster_gpu_count(const gpusched_cluster* cluster);
GPUSCHED_API int64_t gpusched_cluster_cpu_milli(const gpusched_cluster* cluster);
/* Current datacenter power, split into CPU and GPU watts. */
GPUSCHED_API gpusched_status gpusched_cluster_power(const gpusched_cluster* cluster,
                                                    const gpusched_profiles* profiles,
                                                    double* cpu_w, double* gpu_w);
/* Current datacenter fragmentation in milli for the given workload. */
GPUSCHED_API gpusched_status gpusched_cluster_fragmentation(const gpusched_cluster* cluster,
                                                            const gpusched_workload* workload,
                                                            double* frag_milli);

/* Traces */
GPUSCHED_API gpusched_status gpusched_trace_load(const char* path, gpusched_trace** out);
/* Writes the trace CSV and its ".meta" sidecar. */
GPUSCHED_API gpusched_status gpusched_trace_save(const gpusched_trace* trace, const char* path);
GPUSCHED_API void gpusched_trace_free(gpusched_trace* trace);
GPUSCHED_API size_t gpusched_trace_size(const gpusched_trace* trace);
GPUSCHED_API gpusched_status gpusched_trace_synthesize(size_t tasks, uint64_t seed,
                                                       gpusched_trace** out);
/* kind is "multigpu", "sharinggpu" or "constrained"; cluster is required
 * for "constrained" and ignored otherwise. */
GPUSCHED_API gpusched_status gpusched_trace_derive(const gpusched_trace* trace, const char* kind,
                                                   int pct, uint64_t seed,
                                                   const gpusched_cluster* cluster,
                                                   gpusched_trace** out);
/* Task counts per GPU request bucket 0, (0,1), 1, 2, 4, 8; tasks with
 * other whole-GPU counts are not counted. */
GPUSCHED_API gpusched_status gpusched_trace_bucket_counts(const gpusched_trace* trace,
                                                          int64_t counts[6]);

/* Target workloads */
GPUSCHED_API gpusched_status gpusched_workload_derive(const gpusched_trace* trace,
                                                      gpusched_workload** out);
GPUSCHED_API gpusched_status gpusched_workload_load(const char* path, gpusched_workload** out);
GPUSCHED_API gpusched_status gpusched_workload_save(const gpusched_workload* workload,
                                                    const char* path);
GPUSCHED_API void gpusched_workload_free(gpusched_workload* workload);
GPUSCHED_API size_t gpusched_workload_class_count(const gpusched_workload* workload);

/* Policies: "pwr", "fgd", "bestfit", "dotprod", "gpupacking",
 * "gpuclustering" or "name:w+name:w" with integer per-mille weights. */
GPUSCHED_API gpusched_status gpusched_policy_parse(const char* spec, gpusched_policy** out);
GPUSCHED_API void gpusched_policy_free(gpusched_policy* policy);
/* Canonical name; owned by the policy. */
GPUSCHED_API const char* gpusched_policy_name(const gpusched_policy* policy);
/* PWR share of the total weight in per-mille, for policies made only of
 * pwr and fgd components. */
GPUSCHED_API gpusched_status gpusched_policy_alpha_permille(const gpusched_policy* policy,
                                                            int* alpha_permille);

/* Single simulation runs */
typedef struct gpusched_run_options {
  uint64_t seed;
  double checkpoint_step; /* default 0.01 */
  double stop_ratio;      /* default 1.0 */
  int strict_cond3;       /* literal fractional budget rule */
  int cpuonly_frag_zero;  /* CpuOnly classes contribute no fragmentation */
  int verify;             /* recompute totals at every checkpoint */
} gpusched_run_options;

typedef struct gpusched_sample {
  double ratio;
  double eopc_w;
  double eopc_cpu_w;
  double eopc_gpu_w;
  double grar;
  int64_t frag_milli;
  int64_t tasks_arrived;
  int64_t tasks_failed;
} gpusched_sample;

GPUSCHED_API void gpusched_run_options_init(gpusched_run_options* options);
/* workload may be NULL: it is then derived from the trace. */
GPUSCHED_API gpusched_status gpusched_simulate(const gpusched_cluster* cluster,
                                               const gpusched_profiles* profiles,
                                               const gpusched_trace* trace,
                                               const gpusched_workload* workload,
                                               const gpusched_policy* policy,
                                               const gpusched_run_options* options,
                                               gpusched_ledger** out);
GPUSCHED_API void gpusched_ledger_free(gpusched_ledger* ledger);
GPUSCHED_API size_t gpusched_ledger_sample_count(const gpusched_ledger* ledger);
GPUSCHED_API gpusched_status gpusched_ledger_sample(const gpusched_ledger* ledger, size_t index,
                                                    gpusched_sample* out);
GPUSCHED_API int64_t gpusched_ledger_requested_milli(const gpusched_ledger* ledger);
GPUSCHED_API int64_t gpusched_ledger_allocated_milli(const gpusched_ledger* ledger);
/* Node index per drawn task in draw order, -1 for failed tasks. */
GPUSCHED_API size_t gpusched_ledger_outcome_count(const gpusched_ledger* ledger);
GPUSCHED_API int64_t gpusched_ledger_outcome_node(const gpusched_ledger* ledger, size_t index);
GPUSCHED_API gpusched_status gpusched_ledger_save(const gpusched_ledger* ledger,
                                                  const char* path);

/* Experiments: every policy x seed, aggregated and written under
 * out_dir/name/. */
typedef struct gpusched_experiment_config {
  const char* name;
  const char* cluster_path;
  const char* profiles_path;
  const char* trace_path;
  const char* workload_path; /* NULL: derived from the trace */
  const char* const* policies;
  size_t policy_count;
  const char* baseline; /* NULL: no savings file (sweeps default to fgd) */
  const int* alphas;    /* per-mille; non-empty for alpha sweeps */
  size_t alpha_count;
  const uint64_t* seeds;
  size_t seed_count;
  double checkpoint_step;
  double stop_ratio;
  int strict_cond3;
  int cpuonly_frag_zero;
  unsigned threads; /* 0: GPUSCHED_THREADS or hardware concurrency */
  int verify;
  const char* out_dir;
} gpusched_experiment_config;

typedef void (*gpusched_warning_fn)(const char* message, void* user);

GPUSCHED_API void gpusched_experiment_config_init(gpusched_experiment_config* config);
GPUSCHED_API gpusched_status gpusched_experiment_run(const gpusched_experiment_config* config);
/* Re-aggregates the ledgers of an experiment directory. baseline may be
 * NULL to use the one recorded in the manifest. */
GPUSCHED_API gpusched_status gpusched_report(const char* experiment_dir, const char* baseline,
                                             gpusched_warning_fn warn, void* user);

#ifdef __cplusplus
}
#endif

#endif /* GPUSCHED_H_ */
