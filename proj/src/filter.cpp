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

#include "gsodp/filter.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "gsodp/errors.hpp"

namespace gsodp {

FilterSpec FilterSpec::Polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) {
    throw InvalidArgumentError("polynomial filter needs at least one coefficient");
  }
  for (double h : coefficients) {
    if (!std::isfinite(h)) {
      throw InvalidArgumentError("polynomial coefficients must be finite");
    }
  }
  FilterSpec spec;
  spec.kind_ = Kind::kPolynomial;
  spec.coefficients_ = std::move(coefficients);
  return spec;
}

FilterSpec FilterSpec::Diffusion(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InvalidArgumentError("diffusion coefficient must be positive");
  }
  FilterSpec spec;
  spec.kind_ = Kind::kDiffusion;
  spec.c_ = c;
  return spec;
}

std::string FilterSpec::Describe() const {
  if (kind_ == Kind::kDiffusion) {
    return "diffusion(c=" + std::to_string(c_) + ")";
  }
  return "polynomial(degree=" + std::to_string(coefficients_.size() - 1) + ")";
}

double FilterBounds::gamma_or_throw() const {
  if (!gamma.has_value()) {
    throw NoUniformLowerBoundError(
        "no uniform positive lower bound on sigma_min over this filter class");
  }
  return *gamma;
}

Eigen::MatrixXd FilterMatrix(const FilterSpec& spec, const Eigen::MatrixXd& s) {
  if (s.rows() != s.cols() || s.rows() < 1) {
    throw InvalidArgumentError("shift matrix must be square");
  }
  const auto n = s.rows();

  if (spec.kind() == FilterSpec::Kind::kPolynomial) {
    const auto& h = spec.coefficients();
    // Horner in the matrix argument.
    Eigen::MatrixXd result =
        h.back() * Eigen::MatrixXd::Identity(n, n);
    for (auto k = static_cast<std::ptrdiff_t>(h.size()) - 2; k >= 0; --k) {
      result = (result * s).eval();
      result.diagonal().array() += h[static_cast<std::size_t>(k)];
    }
    return result;
  }

  // Diffusion: invert I - cS through the eigendecomposition of the
  // symmetric argument, which also yields the condition number.
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(n, n) - spec.diffusion_c() * s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) {
    throw NotInvertibleError("eigendecomposition of I - cS failed");
  }
  const Eigen::VectorXd lambda = eig.eigenvalues();
  const double max_abs = lambda.cwiseAbs().maxCoeff();
  const double min_abs = lambda.cwiseAbs().minCoeff();
  if (min_abs <= 0.0 || max_abs / min_abs > kConditionLimit) {
    throw NotInvertibleError("I - cS is singular or near-singular");
  }
  return eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

Eigen::MatrixXd FilterMatrix(const FilterSpec& spec, const Gso& g) {
  return FilterMatrix(spec, g.matrix());
}

FilterBounds CertifiedFilterBounds(const FilterSpec& spec, double b) {
  if (!(b >= 0.0) || !std::isfinite(b)) {
    throw InvalidArgumentError("class radius B must be finite and >= 0");
  }
  FilterBounds bounds;
  bounds.B = b;
  bounds.source = "certified";

  if (spec.kind() == FilterSpec::Kind::kDiffusion) {
    const double c = spec.diffusion_c();
    if (!(c * b < 1.0)) {
      throw NotInvertibleError("diffusion class requires c*B < 1");
    }
    bounds.Gamma = 1.0 / (1.0 - c * b);
    bounds.gamma = 1.0 / (1.0 + c * b);
    // Resolvent identity A^{-1} - B^{-1} = A^{-1}(B - A)B^{-1} gives the
    // Lipschitz constant c * Gamma^2.
    bounds.kappa = c * bounds.Gamma * bounds.Gamma;
    return bounds;
  }

  const auto& h = spec.coefficients();
  double big_gamma = std::abs(h[0]);
  double kappa = 0.0;
  double tail = 0.0;       // sum_{k>=1} |h_k| B^k
  double power_km1 = 1.0;  // B^{k-1}
  for (std::size_t k = 1; k < h.size(); ++k) {
    const double a = std::abs(h[k]);
    kappa += a * static_cast<double>(k) * power_km1;
    tail += a * power_km1 * b;
    power_km1 *= b;
  }
  bounds.Gamma = big_gamma + tail;
  bounds.kappa = kappa;
  const double lower = std::abs(h[0]) - tail;
  if (lower > 0.0) bounds.gamma = lower;
  return bounds;
}

FilterBounds EmpiricalInstanceBounds(const FilterSpec& spec,
                                     const std::vector<AdjacentPair>& pairs) {
  if (pairs.empty()) {
    throw InvalidArgumentError("empirical bounds need at least one pair");
  }
  double min_sigma = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  double max_lipschitz = 0.0;
  double max_shift_norm = 0.0;

  auto account = [&](const Eigen::MatrixXd& h_mat, const Eigen::MatrixXd& s) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(h_mat);
    const auto& sv = svd.singularValues();
    max_norm = std::max(max_norm, sv(0));
    min_sigma = std::min(min_sigma, sv(sv.size() - 1));
    max_shift_norm = std::max(max_shift_norm, SpectralNorm(s));
  };

  for (const AdjacentPair& pair : pairs) {
    const Eigen::MatrixXd h_base = FilterMatrix(spec, pair.base);
    const Eigen::MatrixXd h_other = FilterMatrix(spec, pair.other);
    account(h_base, pair.base.matrix());
    account(h_other, pair.other.matrix());
    const double dist = SpectralNorm(h_base - h_other);
    max_lipschitz = std::max(max_lipschitz, dist / pair.delta_s);
  }

  FilterBounds bounds;
  bounds.gamma = min_sigma;
  bounds.Gamma = max_norm;
  bounds.kappa = max_lipschitz;
  bounds.B = max_shift_norm;
  bounds.source = "empirical";
  return bounds;
}

Eigen::MatrixXd ColumnSpaceBasis(const Eigen::MatrixXd& m, double tol) {
  if (m.size() == 0) return Eigen::MatrixXd(m.rows(), 0);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return Eigen::MatrixXd(m.rows(), 0);
  const double cutoff = tol * sv(0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  return svd.matrixU().leftCols(rank);
}

}  // namespace gsodp
