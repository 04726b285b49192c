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

#ifndef GSODP_FILTER_HPP_
#define GSODP_FILTER_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsodp/graph.hpp"

namespace gsodp {

// Graph filter description: either a polynomial in the shift operator,
//   H(S) = sum_k h_k S^k,
// or the diffusion resolvent
//   H(S) = (I - c S)^{-1},  c > 0.
class FilterSpec {
 public:
  enum class Kind { kPolynomial, kDiffusion };

  static FilterSpec Polynomial(std::vector<double> coefficients);
  static FilterSpec Diffusion(double c);

  Kind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  double diffusion_c() const { return c_; }
  std::string Describe() const;

 private:
  FilterSpec() = default;
  Kind kind_ = Kind::kDiffusion;
  std::vector<double> coefficients_;
  double c_ = 0.0;
};

// Spectral constants of a filter over the class { S : ||S||_2 <= B }:
//   gamma <= sigma_min(H(S)),  ||H(S)||_2 <= Gamma,
//   ||H(S) - H(S')||_2 <= kappa * ||S - S'||_2.
// gamma is absent when no uniform positive lower bound exists over the
// class; the closed-form certificate then needs per-instance bounds.
struct FilterBounds {
  std::optional<double> gamma;
  double Gamma = 0.0;
  double kappa = 0.0;
  double B = 0.0;
  // "certified" for closed-form class bounds, "empirical" for instance maxima.
  std::string source;

  double gamma_or_throw() const;
};

// Condition numbers above this make determinant-based likelihoods
// meaningless in double precision; inversions refuse to proceed.
inline constexpr double kConditionLimit = 1e12;

// Materializes H(S) as a dense matrix. Throws NotInvertibleError when the
// diffusion resolvent is singular or has condition number above
// kConditionLimit.
Eigen::MatrixXd FilterMatrix(const FilterSpec& spec, const Eigen::MatrixXd& s);
Eigen::MatrixXd FilterMatrix(const FilterSpec& spec, const Gso& g);

// Certified closed-form class bounds over ||S||_2 <= B.
// Diffusion: Gamma = 1/(1-cB), gamma = 1/(1+cB), kappa = c*Gamma^2.
// Polynomial: Gamma = sum |h_k| B^k, kappa = sum |h_k| k B^{k-1}; gamma is
// present only when |h_0| - sum_{k>=1} |h_k| B^k > 0.
FilterBounds CertifiedFilterBounds(const FilterSpec& spec, double b);

// Tight instance bounds over the concrete shift operators appearing in
// `pairs`: min sigma_min, max ||H||, and max ||H(S)-H(S')|| / delta_s.
FilterBounds EmpiricalInstanceBounds(const FilterSpec& spec,
                                     const std::vector<AdjacentPair>& pairs);

// Orthonormal basis of range(M). Rank is the number of singular values
// above tol * sigma_max; the zero matrix yields an empty basis.
Eigen::MatrixXd ColumnSpaceBasis(const Eigen::MatrixXd& m, double tol = 1e-10);

}  // namespace gsodp

#endif  // GSODP_FILTER_HPP_
