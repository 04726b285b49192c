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

#ifndef GSODP_CHECKS_HPP_
#define GSODP_CHECKS_HPP_

#include <string>
#include <vector>

namespace gsodp {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Built-in property suite on fixed seeds: dual-form agreement, structured
// vs dense covariance algebra, the alpha -> 1 KL limit, monotonicity of
// the divergence in alpha, and scale-freeness of the large-noise regime.
//
// b_alpha_scale perturbs the precision-mixture route inside the dual-form
// check; it is 1.0 in production and exists only so tests can prove the
// check would catch a broken formula.
std::vector<CheckResult> RunPropertyChecks(double b_alpha_scale = 1.0);

bool AllPassed(const std::vector<CheckResult>& results);

// One line per check plus a trailing summary line.
std::string FormatCheckReport(const std::vector<CheckResult>& results);

}  // namespace gsodp

#endif  // GSODP_CHECKS_HPP_
