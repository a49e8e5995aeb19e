// Copyright 2026 The tempalign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Small helpers shared by the CSV readers and writers.

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace tempalign::csv {

// Splits on ',' without quoting support. Entity and channel identifiers are
// opaque tokens that never contain commas.
std::vector<std::string_view> split(std::string_view line, char sep = ',');

// Reads one line, stripping a trailing '\r'. Returns false at EOF.
bool read_line(std::istream& in, std::string& line);

// Strict base-10 parsers; return false on any stray character.
bool parse_int(std::string_view s, std::int64_t& out);
bool parse_uint(std::string_view s, std::uint64_t& out);
bool parse_double(std::string_view s, double& out);

// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);

// Reads the header line and checks it matches `expected` exactly.
void expect_header(std::istream& in, std::string_view expected);

}  // namespace tempalign::csv
