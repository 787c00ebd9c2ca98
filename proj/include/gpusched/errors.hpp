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

#include <stdexcept>
#include <string>

namespace gpusched {

// Bad input: unreadable file, malformed row, unknown model, invalid flag.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// I/O failure while writing results.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A broken internal invariant. Always a simulator bug, never a normal
// scheduling outcome.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised by apply() when a placement does not fit the node.
class ResourceOverflow : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

}  // namespace gpusched
