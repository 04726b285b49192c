// Copyright 2025 The gsodp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GSODP_PARALLEL_HPP_
#define GSODP_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace gsodp {

// Worker count: GSODP_THREADS if set (clamped to [1, 256]), otherwise the
// hardware concurrency.
std::size_t WorkerCount();

// Runs fn(i) for i in [0, count). Work items must not depend on execution
// order; results keyed by i stay deterministic under any partitioning.
// Exceptions from workers are rethrown on the calling thread.
void ParallelFor(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace gsodp

#endif  // GSODP_PARALLEL_HPP_
