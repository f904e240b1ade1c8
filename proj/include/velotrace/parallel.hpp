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

#include <cstddef>
#include <functional>

namespace velotrace {

// Worker count: VELOTRACE_THREADS when set to a positive integer, otherwise
// the hardware concurrency (at least 1).
std::size_t ThreadCount();

// Runs body(i) for i in [0, n) on up to ThreadCount() threads. Work is split
// into contiguous chunks; callers write results into per-index slots so the
// outcome never depends on scheduling.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace velotrace
