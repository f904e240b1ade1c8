/*
 * Copyright 2026 The Velotrace Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Minimal RFC-4180-style CSV reading and writing plus the file helpers the
// pipeline uses. Fields are exposed as views into the buffer.

#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace velotrace {

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view content);

// Shortest decimal representation that round-trips to the same double.
std::string FormatDouble(double value);
// Finite decimal number, nullopt otherwise (including nan/inf spellings).
std::optional<double> ParseDouble(std::string_view text);
std::optional<long long> ParseInt(std::string_view text);

class CsvReader {
 public:
  explicit CsvReader(std::string text);
  static CsvReader FromFile(const std::filesystem::path& path);

  // Reads the first line and requires it to equal `columns` exactly.
  void ExpectHeader(std::initializer_list<std::string_view> columns);

  // Advances to the next non-blank row. Returns false at end of input.
  bool Next();

  // 1-based line number of the current row.
  std::size_t line() const { return line_; }
  std::size_t size() const { return fields_.size(); }
  std::string_view operator[](std::size_t i) const { return fields_[i]; }

 private:
  bool ReadRow();

  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
  std::size_t next_line_ = 1;
  std::vector<std::string_view> fields_;
  std::vector<std::string> unescaped_;
};

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void Row(std::initializer_list<std::string_view> fields);
  void Row(const std::vector<std::string>& fields);

 private:
  void Field(std::string_view field, bool first);

  std::ostream& out_;
};

}  // namespace velotrace
