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

#ifndef GSODP_MECHANISM_HPP_
#define GSODP_MECHANISM_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gsodp {

// Structured PSD covariance of the vec-stacked input noise. vec stacks the
// columns of the n x T signal matrix, so entry (t, i) of the signal sits at
// index t*n + i.
//
// Two layouts:
//   Dense:        an explicit Tn x Tn matrix.
//   KronTemporal: Sigma_T (x) P with a T x T temporal factor and an n x n
//                 spatial factor (identity unless stated otherwise).
class CovarianceModel {
 public:
  static CovarianceModel Dense(Eigen::MatrixXd sigma, int n, int t);
  static CovarianceModel KronTemporal(Eigen::MatrixXd sigma_t, int n);
  static CovarianceModel KronTemporal(Eigen::MatrixXd sigma_t,
                                      Eigen::MatrixXd spatial);

  bool is_kron() const { return kron_; }
  int n() const { return n_; }
  int t() const { return t_; }
  int dim() const { return n_ * t_; }

  // Kron layout only.
  const Eigen::MatrixXd& temporal() const;
  const Eigen::MatrixXd& spatial() const;

  // Explicit Tn x Tn matrix (expands the Kron layout).
  Eigen::MatrixXd ToDense() const;

  // Extreme eigenvalues, computed factor-wise for the Kron layout.
  double MinEigenvalue() const;
  double MaxEigenvalue() const;

 private:
  CovarianceModel() = default;
  bool kron_ = false;
  int n_ = 0;
  int t_ = 0;
  Eigen::MatrixXd dense_;     // dense layout
  Eigen::MatrixXd temporal_;  // kron layout
  Eigen::MatrixXd spatial_;   // kron layout
};

// AR(1) temporal covariance with entries sigma^2 * rho^|i-j|.
Eigen::MatrixXd Ar1Covariance(int t, double sigma, double rho);

// PSD factor A with A A^T = m (Cholesky when positive definite, symmetric
// eigenfactor otherwise, with negative rounding noise clamped to zero).
Eigen::MatrixXd PsdFactor(const Eigen::MatrixXd& m);

// Draws `count` samples U~ with vec(U~) ~ N(vec(m), cov). Sample r is fully
// determined by (seed, r), so replicates can be drawn concurrently.
std::vector<Eigen::MatrixXd> SampleInputs(const Eigen::MatrixXd& m,
                                          const CovarianceModel& cov,
                                          int count, std::uint64_t seed);

struct InputEpsilon {
  double epsilon = 0.0;
  // The classical Gaussian-mechanism formula is derived for epsilon < 1;
  // larger values are reported but flagged.
  bool classical_formula_extrapolation = false;
};

// epsilon of the classical additive Gaussian mechanism on the inputs, with
// correlated noise reduced to its worst eigen-direction:
//   epsilon = delta_u * sqrt(2 ln(1.25/delta)) / sqrt(lambda_min(cov)).
InputEpsilon ComputeInputEpsilon(double delta_u, const CovarianceModel& cov,
                                 double delta);

// Mean squared entrywise error between two equally shaped matrices.
double MeanSquaredError(const Eigen::MatrixXd& released,
                        const Eigen::MatrixXd& clean);

// Mean matrix from CSV: n rows, T comma-separated columns, no header.
Eigen::MatrixXd LoadMeanCsv(const std::string& path);

}  // namespace gsodp

#endif  // GSODP_MECHANISM_HPP_
