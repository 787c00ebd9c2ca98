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
#include "gpusched/types.hpp"

#include <algorithm>

#include "gpusched/errors.hpp"

namespace gpusched {

GpuDemand GpuDemand::partial(Milli milli) {
  if (milli < 1 || milli >= kMilliPerUnit) {
    throw ConfigError("partial GPU demand must be in [1, 999] milli, got " +
                      std::to_string(milli));
  }
  return GpuDemand(Kind::kPartial, milli);
}

GpuDemand GpuDemand::full(std::int64_t count) {
  if (count < 1) {
    throw ConfigError("whole-GPU demand must be at least 1, got " + std::to_string(count));
  }
  return GpuDemand(Kind::kFull, count);
}

std::string GpuDemand::to_string() const {
  switch (kind_) {
    case Kind::kCpuOnly:
      return "CpuOnly";
    case Kind::kPartial:
      return "Partial(" + std::to_string(amount_) + ")";
    case Kind::kFull:
      return "Full(" + std::to_string(amount_) + ")";
  }
  return "?";
}

ModelSet make_model_set(std::vector<std::string> names) {
  names.erase(std::remove(names.begin(), names.end(), std::string()), names.end());
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

bool model_set_admits(const ModelSet& set, const std::string& model) {
  return set.empty() || std::binary_search(set.begin(), set.end(), model);
}

void validate(const TaskSpec& task) {
  if (task.cpu_milli < 0) throw ConfigError("task " + task.id + ": negative cpu_milli");
  if (task.memory_mib < 0) throw ConfigError("task " + task.id + ": negative memory_mib");
}

}  // namespace gpusched
