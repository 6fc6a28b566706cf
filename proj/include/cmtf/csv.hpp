// Copyright 2026 The cmtf Authors
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

// Minimal comma-separated file support: header row, no quoting. Fields that
// need to carry lists use ';' as the inner separator.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmtf::csv {

struct Table {
  std::filesystem::path source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws DataError naming the file when absent.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;
};

/// Throws DataError naming the path when the file is missing or ragged.
Table read(const std::filesystem::path& path);

void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows);

std::vector<std::string> split(std::string_view s, char sep);

/// Shortest representation that parses back to the same double.
std::string format(double x);

double parse_double(std::string_view s, std::string_view what);
std::optional<double> parse_optional_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

/// Validates a YYYY-MM-DD calendar date.
bool is_iso_date(std::string_view s);

}  // namespace cmtf::csv
