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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace velotrace {

// Broad failure classes. The CLI maps them onto exit codes.
enum class ErrorKind {
  kInput,        // malformed or non-finite input values
  kRange,        // value outside its documented domain
  kSchema,       // structurally wrong file (header, half-present pairs, duplicates)
  kParameter,    // caller-supplied option out of range
  kState,        // object used before it was ready (e.g. unfitted scaler)
  kUndefined,    // statistic is mathematically undefined for the input
  kMissingFile,  // referenced path does not exist
  kIo,           // read/write failure
  kTraining,     // optimizer diverged or otherwise failed
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace velotrace
