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

#include "velotrace/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "velotrace/error.hpp"

namespace velotrace {

std::string ReadFile(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kMissingFile, "missing input file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void WriteFile(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(content.data(), std::streamsize(content.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

std::string FormatDouble(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::optional<double> ParseDouble(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<long long> ParseInt(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  long long value = 0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

CsvReader::CsvReader(std::string text) : text_(std::move(text)) {
  if (text_.starts_with("\xEF\xBB\xBF")) pos_ = 3;
}

CsvReader CsvReader::FromFile(const std::filesystem::path& path) {
  return CsvReader(ReadFile(path));
}

void CsvReader::ExpectHeader(std::initializer_list<std::string_view> columns) {
  if (!ReadRow()) throw Error(ErrorKind::kSchema, "missing header row");
  bool match = fields_.size() == columns.size();
  std::size_t i = 0;
  for (auto it = columns.begin(); match && it != columns.end(); ++it, ++i) {
    match = fields_[i] == *it;
  }
  if (!match) {
    std::string expected;
    for (auto c : columns) {
      if (!expected.empty()) expected += ',';
      expected += c;
    }
    throw Error(ErrorKind::kSchema, "line 1: expected header '" + expected + "'");
  }
}

bool CsvReader::Next() {
  while (ReadRow()) {
    if (!(fields_.size() == 1 && fields_[0].empty())) return true;
  }
  return false;
}

bool CsvReader::ReadRow() {
  fields_.clear();
  unescaped_.clear();
  if (pos_ >= text_.size()) return false;
  line_ = next_line_;
  const std::size_t n = text_.size();
  std::string_view view(text_);
  while (true) {
    if (pos_ < n && text_[pos_] == '"') {
      // Quoted field; "" is an escaped quote.
      std::size_t i = pos_ + 1;
      std::string value;
      bool escaped = false;
      while (true) {
        if (i >= n) throw Error(ErrorKind::kSchema,
                                "line " + std::to_string(line_) +
                                    ": unterminated quoted field");
        if (text_[i] == '"') {
          if (i + 1 < n && text_[i + 1] == '"') {
            value += '"';
            escaped = true;
            i += 2;
            continue;
          }
          break;
        }
        if (text_[i] == '\n') ++next_line_;
        value += text_[i++];
      }
      if (escaped) {
        unescaped_.push_back(std::move(value));
        fields_.emplace_back();  // patched below
      } else {
        fields_.push_back(view.substr(pos_ + 1, i - pos_ - 1));
      }
      pos_ = i + 1;
    } else {
      std::size_t i = pos_;
      while (i < n && text_[i] != ',' && text_[i] != '\n' && text_[i] != '\r') {
        ++i;
      }
      fields_.push_back(view.substr(pos_, i - pos_));
      pos_ = i;
    }
    if (pos_ < n && text_[pos_] == ',') {
      ++pos_;
      continue;
    }
    if (pos_ < n && text_[pos_] == '\r') ++pos_;
    if (pos_ < n && text_[pos_] == '\n') ++pos_;
    ++next_line_;
    break;
  }
  // Re-point escaped fields now that the vector of owned strings is stable.
  if (!unescaped_.empty()) {
    std::size_t k = 0;
    for (auto& f : fields_) {
      if (f.data() == nullptr) f = unescaped_[k++];
    }
  }
  return true;
}

void CsvWriter::Field(std::string_view field, bool first) {
  if (!first) out_ << ',';
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    out_ << field;
    return;
  }
  out_ << '"';
  for (char c : field) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
}

void CsvWriter::Row(std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (auto f : fields) {
    Field(f, first);
    first = false;
  }
  out_ << '\n';
}

void CsvWriter::Row(const std::vector<std::string>& fields) {
  bool first = true;
  for (const auto& f : fields) {
    Field(f, first);
    first = false;
  }
  out_ << '\n';
}

}  // namespace velotrace
