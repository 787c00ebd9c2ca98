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
#include <string>
#include <string_view>
#include <vector>

// Minimal CSV helpers for the simulator's own file formats. Fields never
// contain commas or quotes, so no quoting is supported.
namespace gpusched::csv {

std::vector<std::string_view> split(std::string_view line, char sep = ',');

std::string_view trim(std::string_view s);

// Strict integer / real parsing; throw ConfigError with `what` on failure.
std::int64_t parse_int(std::string_view field, const std::string& what);
double parse_real(std::string_view field, const std::string& what);

// Shortest representation that parses back to the same double.
std::string format_real(double value);

// Reads lines, stripping a trailing '\r'. Returns false at EOF.
bool read_line(std::istream& in, std::string& line);

// Reads the header line and checks it equals `expected` exactly.
void expect_header(std::istream& in, std::string_view expected, const std::string& origin);

}  // namespace gpusched::csv
