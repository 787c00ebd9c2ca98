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
#include "gpusched/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "gpusched/errors.hpp"

namespace gpusched {

namespace {

double ratio_or_zero(double value, double scale) { return scale > 0.0 ? value / scale : 0.0; }

// Sum over cpu, memory and GPU milli of what stays free on the node,
// each scaled by the largest node capacity in that dimension.
double remaining_score(const ScoringContext& ctx, const NodeState& after) {
  const ClusterState& c = ctx.cluster;
  return ratio_or_zero(static_cast<double>(after.cpu_unalloc_milli()),
                       static_cast<double>(c.max_cpu_capacity())) +
         ratio_or_zero(static_cast<double>(after.mem_unalloc_mib()),
                       static_cast<double>(c.max_mem_capacity())) +
         ratio_or_zero(static_cast<double>(after.gpu_unalloc_total()),
                       static_cast<double>(c.max_gpu_capacity()));
}

NodeState after_placement(const ScoringContext& ctx, const TaskSpec& task, const Placement& p) {
  return hypothetical_apply(ctx.cluster.node(p.node), task, p.gpu_indices);
}

class PwrPlugin final : public ScorePlugin {
 public:
  std::string_view name() const override { return "pwr"; }
  double raw_score(const ScoringContext& ctx, const TaskSpec& task,
                   const Placement& placement) const override {
    return pwr_raw(ctx, task, placement);
  }
  void score_node(const ScoringContext& ctx, const TaskSpec& task,
                  std::span<const Placement> placements, std::span<double> out) const override {
    const NodeState& before = ctx.cluster.node(placements.front().node);
    const double base = node_power(before, ctx.profile).total_w();
    for (std::size_t i = 0; i < placements.size(); ++i) {
      const NodeState after = hypothetical_apply(before, task, placements[i].gpu_indices);
      out[i] = node_power(after, ctx.profile).total_w() - base;
    }
  }
};

class FgdPlugin final : public ScorePlugin {
 public:
  std::string_view name() const override { return "fgd"; }
  double raw_score(const ScoringContext& ctx, const TaskSpec& task,
                   const Placement& placement) const override {
    return fgd_raw(ctx, task, placement);
  }
  void score_node(const ScoringContext& ctx, const TaskSpec& task,
                  std::span<const Placement> placements, std::span<double> out) const override {
    if (ctx.workload.empty()) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    const NodeState& before = ctx.cluster.node(placements.front().node);
    const std::int64_t base = frag_node_weighted(before, ctx.workload, ctx.frag);
    const auto total = static_cast<double>(ctx.workload.total_weight());
    for (std::size_t i = 0; i < placements.size(); ++i) {
      const NodeState after = hypothetical_apply(before, task, placements[i].gpu_indices);
      out[i] = static_cast<double>(frag_node_weighted(after, ctx.workload, ctx.frag) - base) / total;
    }
  }
};

template <double (*Fn)(const ScoringContext&, const TaskSpec&, const Placement&), const char* Name>
class FunctionPlugin final : public ScorePlugin {
 public:
  std::string_view name() const override { return Name; }
  double raw_score(const ScoringContext& ctx, const TaskSpec& task,
                   const Placement& placement) const override {
    return Fn(ctx, task, placement);
  }
};

constexpr char kBestFit[] = "bestfit";
constexpr char kDotProd[] = "dotprod";
constexpr char kGpuPacking[] = "gpupacking";
constexpr char kGpuClustering[] = "gpuclustering";

// Affine map used for both node-level and placement-level normalization.
struct Normalizer {
  double vmin = 0.0;
  double vmax = 0.0;

  double operator()(double v) const {
    if (vmax > vmin) return 100.0 * (vmax - v) / (vmax - vmin);
    // Degenerate range: every node scores 100; placements worse than the
    // common value still rank below it.
    return 100.0 - (v - vmin);
  }
};

}  // namespace

void ScorePlugin::score_node(const ScoringContext& ctx, const TaskSpec& task,
                             std::span<const Placement> placements, std::span<double> out) const {
  for (std::size_t i = 0; i < placements.size(); ++i) out[i] = raw_score(ctx, task, placements[i]);
}

double pwr_raw(const ScoringContext& ctx, const TaskSpec& task, const Placement& placement) {
  return power_delta(ctx.cluster, task, placement, ctx.profile);
}

double fgd_raw(const ScoringContext& ctx, const TaskSpec& task, const Placement& placement) {
  return frag_delta(ctx.cluster, task, placement, ctx.workload, ctx.frag);
}

double bestfit_raw(const ScoringContext& ctx, const TaskSpec& task, const Placement& placement) {
  return remaining_score(ctx, after_placement(ctx, task, placement));
}

double dotprod_raw(const ScoringContext& ctx, const TaskSpec& task, const Placement& placement) {
  const ClusterState& c = ctx.cluster;
  const NodeState& node = c.node(placement.node);
  auto term = [](double available, double demand, double scale) {
    if (scale <= 0.0) return 0.0;
    return (available / scale) * (demand / scale);
  };
  return term(static_cast<double>(node.cpu_unalloc_milli()), static_cast<double>(task.cpu_milli),
              static_cast<double>(c.max_cpu_capacity())) +
         term(static_cast<double>(node.mem_unalloc_mib()), static_cast<double>(task.memory_mib),
              static_cast<double>(c.max_mem_capacity())) +
         term(static_cast<double>(node.gpu_unalloc_total()),
              static_cast<double>(task.gpu.total_milli()),
              static_cast<double>(c.max_gpu_capacity()));
}

double gpupacking_raw(const ScoringContext& ctx, const TaskSpec& task, const Placement& placement) {
  const NodeState& node = ctx.cluster.node(placement.node);
  double tier = 0.0;
  if (node.is_idle()) {
    tier = 2.0;
  } else {
    const bool touches_idle_gpu =
        std::any_of(placement.gpu_indices.begin(), placement.gpu_indices.end(), [&](int g) {
          return node.gpu_unalloc_milli[static_cast<std::size_t>(g)] == kMilliPerUnit;
        });
    tier = touches_idle_gpu ? 1.0 : 0.0;
  }
  return tier + bestfit_raw(ctx, task, placement) / 1000.0;
}

double gpuclustering_raw(const ScoringContext& ctx, const TaskSpec& task,
                         const Placement& placement) {
  const NodeState& node = ctx.cluster.node(placement.node);
  double tier = 2.0;
  if (node.hosts_demand(task.gpu)) {
    tier = 0.0;
  } else if (!node.resident_demands.empty()) {
    tier = 1.0;
  }
  return tier + bestfit_raw(ctx, task, placement) / 1000.0;
}

const std::vector<std::string>& plugin_names() {
  static const std::vector<std::string> names = {"pwr",     "fgd",        "bestfit",
                                                 "dotprod", "gpupacking", "gpuclustering"};
  return names;
}

std::shared_ptr<const ScorePlugin> make_plugin(std::string_view name) {
  if (name == "pwr") return std::make_shared<PwrPlugin>();
  if (name == "fgd") return std::make_shared<FgdPlugin>();
  if (name == kBestFit) return std::make_shared<FunctionPlugin<bestfit_raw, kBestFit>>();
  if (name == kDotProd) return std::make_shared<FunctionPlugin<dotprod_raw, kDotProd>>();
  if (name == kGpuPacking) return std::make_shared<FunctionPlugin<gpupacking_raw, kGpuPacking>>();
  if (name == kGpuClustering) {
    return std::make_shared<FunctionPlugin<gpuclustering_raw, kGpuClustering>>();
  }
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

std::vector<double> normalize(std::span<const double> raw) {
  if (raw.empty()) throw ConfigError("normalize: no scores");
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const Normalizer norm{*lo, *hi};
  std::vector<double> out;
  out.reserve(raw.size());
  for (double v : raw) out.push_back(*hi > *lo ? norm(v) : 100.0);
  return out;
}

PolicyConfig::PolicyConfig(std::vector<PolicyComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ConfigError("policy needs at least one component");
  bool any_positive = false;
  for (const PolicyComponent& c : components_) {
    if (!c.plugin) throw ConfigError("policy component without plugin");
    if (!std::isfinite(c.weight) || c.weight < 0.0) {
      throw ConfigError("policy weights must be finite and non-negative");
    }
    any_positive = any_positive || c.weight > 0.0;
    for (const PolicyComponent& other : components_) {
      if (&other != &c && other.plugin->name() == c.plugin->name()) {
        throw ConfigError("policy lists '" + std::string(c.plugin->name()) + "' twice");
      }
    }
  }
  if (!any_positive) throw ConfigError("policy weights are all zero");
  if (components_.size() == 1) {
    name_ = std::string(components_.front().plugin->name());
  } else {
    for (const PolicyComponent& c : components_) {
      if (!name_.empty()) name_ += '+';
      name_ += std::string(c.plugin->name()) + ':';
      const double w = c.weight;
      if (w == std::floor(w) && w < 1e15) {
        name_ += std::to_string(static_cast<long long>(w));
      } else {
        name_ += std::to_string(w);
      }
    }
  }
}

PolicyConfig PolicyConfig::single(std::string_view plugin) {
  return PolicyConfig({PolicyComponent{make_plugin(plugin), 1.0}});
}

PolicyConfig PolicyConfig::alpha(int alpha_permille) {
  if (alpha_permille < 0 || alpha_permille > 1000) {
    throw ConfigError("alpha must be within 0..1000 per-mille, got " +
                      std::to_string(alpha_permille));
  }
  return PolicyConfig({PolicyComponent{make_plugin("pwr"), static_cast<double>(alpha_permille)},
                       PolicyComponent{make_plugin("fgd"), 1000.0 - alpha_permille}});
}

PolicyConfig PolicyConfig::parse(std::string_view spec) {
  if (spec.find(':') == std::string_view::npos && spec.find('+') == std::string_view::npos) {
    return single(spec);
  }
  std::vector<PolicyComponent> components;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t end = spec.find('+', start);
    if (end == std::string_view::npos) end = spec.size();
    const std::string_view part = spec.substr(start, end - start);
    const std::size_t colon = part.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("policy component '" + std::string(part) + "' needs a :weight");
    }
    const std::string_view weight_text = part.substr(colon + 1);
    long long weight = 0;
    auto [ptr, ec] = std::from_chars(weight_text.data(), weight_text.data() + weight_text.size(),
                                     weight);
    if (weight_text.empty() || ec != std::errc() || ptr != weight_text.data() + weight_text.size() ||
        weight < 0) {
      throw ConfigError("policy weight '" + std::string(weight_text) +
                        "' is not a non-negative integer per-mille value");
    }
    components.push_back({make_plugin(part.substr(0, colon)), static_cast<double>(weight)});
    start = end + 1;
  }
  return PolicyConfig(std::move(components));
}

Decision select(const ScoringContext& ctx, const TaskSpec& task, const PolicyConfig& policy,
                bool audit) {
  std::vector<const ScorePlugin*> plugins;
  std::vector<double> coeffs;
  double weight_sum = 0.0;
  for (const PolicyComponent& c : policy.components()) weight_sum += c.weight;
  for (const PolicyComponent& c : policy.components()) {
    if (c.weight <= 0.0) continue;  // contributes exactly zero
    plugins.push_back(c.plugin.get());
    coeffs.push_back(c.weight / weight_sum);
  }
  const std::size_t k = plugins.size();

  struct Candidate {
    std::size_t node;
    std::vector<Placement> placements;
    std::vector<double> raw;  // placement-major: raw[p * k + i]
    std::vector<double> best;
  };
  std::vector<Candidate> cands;
  std::vector<double> scratch;
  for (std::size_t n = 0; n < ctx.cluster.size(); ++n) {
    std::vector<Placement> placements =
        candidate_placements(ctx.cluster.node(n), n, task, ctx.frag.rule);
    if (placements.empty()) continue;
    Candidate c{n, std::move(placements), {}, {}};
    const std::size_t np = c.placements.size();
    c.raw.resize(np * k);
    c.best.assign(k, std::numeric_limits<double>::infinity());
    scratch.resize(np);
    for (std::size_t i = 0; i < k; ++i) {
      plugins[i]->score_node(ctx, task, c.placements, scratch);
      for (std::size_t p = 0; p < np; ++p) {
        c.raw[p * k + i] = scratch[p];
        c.best[i] = std::min(c.best[i], scratch[p]);
      }
    }
    cands.push_back(std::move(c));
  }

  Decision decision;
  if (cands.empty()) {
    decision.reason = "no feasible node";
    return decision;
  }

  std::vector<Normalizer> norms(k);
  for (std::size_t i = 0; i < k; ++i) {
    norms[i].vmin = norms[i].vmax = cands.front().best[i];
    for (const Candidate& c : cands) {
      norms[i].vmin = std::min(norms[i].vmin, c.best[i]);
      norms[i].vmax = std::max(norms[i].vmax, c.best[i]);
    }
  }

  std::size_t winner = 0;
  double winner_score = -std::numeric_limits<double>::infinity();
  for (std::size_t ci = 0; ci < cands.size(); ++ci) {
    const Candidate& c = cands[ci];
    double score = 0.0;
    NodeScore ns;
    if (audit) ns.node = c.node;
    for (std::size_t i = 0; i < k; ++i) {
      const double normalized = norms[i].vmax > norms[i].vmin ? norms[i](c.best[i]) : 100.0;
      score += coeffs[i] * normalized;
      if (audit) {
        ns.raw.push_back(c.best[i]);
        ns.normalized.push_back(normalized);
      }
    }
    if (audit) {
      ns.combined = score;
      decision.scores.push_back(std::move(ns));
    }
    if (score > winner_score ||
        (score == winner_score &&
         ctx.cluster.id_rank(c.node) < ctx.cluster.id_rank(cands[winner].node))) {
      winner = ci;
      winner_score = score;
    }
  }

  const Candidate& w = cands[winner];
  std::size_t best_p = 0;
  double best_p_score = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < w.placements.size(); ++p) {
    double score = 0.0;
    for (std::size_t i = 0; i < k; ++i) score += coeffs[i] * norms[i](w.raw[p * k + i]);
    if (score > best_p_score) {
      best_p = p;
      best_p_score = score;
    }
  }
  decision.scheduled = true;
  decision.placement = w.placements[best_p];
  return decision;
}

}  // namespace gpusched
