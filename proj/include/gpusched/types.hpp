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
#include <compare>
#include <string>
#include <vector>

namespace gpusched {

using Milli = std::int64_t;
using MiB = std::int64_t;

inline constexpr Milli kMilliPerUnit = 1000;

// GPU demand of a task: nothing, a fraction of one GPU (1..999 milli), or
// k whole GPUs. A fractional demand above one GPU is not representable.
class GpuDemand {
 public:
  enum class Kind : std::uint8_t { kCpuOnly = 0, kPartial = 1, kFull = 2 };

  constexpr GpuDemand() = default;

  static constexpr GpuDemand cpu_only() { return GpuDemand(Kind::kCpuOnly, 0); }
  // Throws ConfigError unless 1 <= milli <= 999.
  static GpuDemand partial(Milli milli);
  // Throws ConfigError unless count >= 1.
  static GpuDemand full(std::int64_t count);

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_cpu_only() const { return kind_ == Kind::kCpuOnly; }
  constexpr bool is_partial() const { return kind_ == Kind::kPartial; }
  constexpr bool is_full() const { return kind_ == Kind::kFull; }

  // Milli of one GPU for partial demands, GPU count for full demands.
  constexpr std::int64_t amount() const { return amount_; }

  // Total requested GPU milli (k * 1000 for full demands).
  constexpr Milli total_milli() const {
    return kind_ == Kind::kFull ? amount_ * kMilliPerUnit : amount_;
  }

  std::string to_string() const;

  constexpr auto operator<=>(const GpuDemand&) const = default;

 private:
  constexpr GpuDemand(Kind kind, std::int64_t amount) : kind_(kind), amount_(amount) {}

  Kind kind_ = Kind::kCpuOnly;
  std::int64_t amount_ = 0;
};

// Sorted, deduplicated list of model names. Empty means unconstrained.
using ModelSet = std::vector<std::string>;

ModelSet make_model_set(std::vector<std::string> names);
bool model_set_admits(const ModelSet& set, const std::string& model);

struct TaskSpec {
  std::string id;
  Milli cpu_milli = 0;
  MiB memory_mib = 0;
  GpuDemand gpu;
  ModelSet cpu_constraint;
  ModelSet gpu_constraint;
};

// Throws ConfigError when cpu/memory are negative.
void validate(const TaskSpec& task);

}  // namespace gpusched
