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

#include "gsodp/mechanism.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "gsodp/errors.hpp"
#include "gsodp/rng.hpp"

namespace gsodp {

namespace {

constexpr double kPsdSlack = 1e-10;

void CheckPsd(const Eigen::MatrixXd& m, const char* label) {
  if (m.rows() != m.cols()) {
    throw InvalidArgumentError(std::string(label) + " must be square");
  }
  if (!m.allFinite()) {
    throw InvalidArgumentError(std::string(label) + " must be finite");
  }
  if (m.size() == 0) return;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw InvalidArgumentError(std::string(label) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m,
                                                     Eigen::EigenvaluesOnly);
  const double min_l = eig.eigenvalues().minCoeff();
  const double max_l = eig.eigenvalues().maxCoeff();
  if (min_l < -kPsdSlack * std::max(max_l, 1.0)) {
    throw InvalidArgumentError(std::string(label) +
                               " must be positive semidefinite");
  }
}

// Fills an n x T matrix with standard normals in vec (column-major) order.
Eigen::MatrixXd NormalMatrix(Rng& rng, int n, int t) {
  Eigen::MatrixXd z(n, t);
  for (int col = 0; col < t; ++col) {
    for (int row = 0; row < n; ++row) {
      z(row, col) = rng.Normal();
    }
  }
  return z;
}

}  // namespace

CovarianceModel CovarianceModel::Dense(Eigen::MatrixXd sigma, int n, int t) {
  if (n < 1 || t < 1) throw InvalidArgumentError("n and T must be >= 1");
  if (sigma.rows() != static_cast<Eigen::Index>(n) * t) {
    throw DimensionMismatchError("dense covariance must be Tn x Tn");
  }
  CheckPsd(sigma, "covariance");
  CovarianceModel cov;
  cov.kron_ = false;
  cov.n_ = n;
  cov.t_ = t;
  cov.dense_ = std::move(sigma);
  return cov;
}

CovarianceModel CovarianceModel::KronTemporal(Eigen::MatrixXd sigma_t, int n) {
  if (n < 1) throw InvalidArgumentError("n must be >= 1");
  return KronTemporal(std::move(sigma_t),
                      Eigen::MatrixXd::Identity(n, n));
}

CovarianceModel CovarianceModel::KronTemporal(Eigen::MatrixXd sigma_t,
                                              Eigen::MatrixXd spatial) {
  CheckPsd(sigma_t, "temporal covariance");
  CheckPsd(spatial, "spatial covariance");
  CovarianceModel cov;
  cov.kron_ = true;
  cov.n_ = static_cast<int>(spatial.rows());
  cov.t_ = static_cast<int>(sigma_t.rows());
  cov.temporal_ = std::move(sigma_t);
  cov.spatial_ = std::move(spatial);
  return cov;
}

const Eigen::MatrixXd& CovarianceModel::temporal() const {
  if (!kron_) throw InvalidArgumentError("dense covariance has no temporal factor");
  return temporal_;
}

const Eigen::MatrixXd& CovarianceModel::spatial() const {
  if (!kron_) throw InvalidArgumentError("dense covariance has no spatial factor");
  return spatial_;
}

Eigen::MatrixXd CovarianceModel::ToDense() const {
  if (!kron_) return dense_;
  Eigen::MatrixXd out(dim(), dim());
  for (int a = 0; a < t_; ++a) {
    for (int b = 0; b < t_; ++b) {
      out.block(a * n_, b * n_, n_, n_) = temporal_(a, b) * spatial_;
    }
  }
  return out;
}

double CovarianceModel::MinEigenvalue() const {
  if (!kron_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense_,
                                                       Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> et(temporal_,
                                                    Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spatial_,
                                                    Eigen::EigenvaluesOnly);
  // Factors are PSD, so the Kronecker minimum is the product of minima.
  return std::max(et.eigenvalues().minCoeff(), 0.0) *
         std::max(es.eigenvalues().minCoeff(), 0.0);
}

double CovarianceModel::MaxEigenvalue() const {
  if (!kron_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense_,
                                                       Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> et(temporal_,
                                                    Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spatial_,
                                                    Eigen::EigenvaluesOnly);
  return std::max(et.eigenvalues().maxCoeff(), 0.0) *
         std::max(es.eigenvalues().maxCoeff(), 0.0);
}

Eigen::MatrixXd Ar1Covariance(int t, double sigma, double rho) {
  if (t < 1) throw InvalidArgumentError("T must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgumentError("noise scale sigma must be positive");
  }
  if (!(std::abs(rho) < 1.0)) {
    throw InvalidCorrelationError("AR(1) correlation must satisfy |rho| < 1");
  }
  const double s2 = sigma * sigma;
  Eigen::MatrixXd cov(t, t);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < t; ++j) {
      cov(i, j) = s2 * std::pow(rho, std::abs(i - j));
    }
  }
  return cov;
}

Eigen::MatrixXd PsdFactor(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return m;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  return eig.eigenvectors() *
         eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

std::vector<Eigen::MatrixXd> SampleInputs(const Eigen::MatrixXd& m,
                                          const CovarianceModel& cov,
                                          int count, std::uint64_t seed) {
  const int n = static_cast<int>(m.rows());
  const int t = static_cast<int>(m.cols());
  if (n != cov.n() || t != cov.t()) {
    throw DimensionMismatchError("mean matrix and covariance disagree on n, T");
  }
  if (count < 0) throw InvalidArgumentError("sample count must be >= 0");

  std::vector<Eigen::MatrixXd> samples;
  samples.reserve(static_cast<std::size_t>(count));

  if (cov.is_kron()) {
    const Eigen::MatrixXd a_t = PsdFactor(cov.temporal());
    const Eigen::MatrixXd a_s = PsdFactor(cov.spatial());
    for (int r = 0; r < count; ++r) {
      Rng rng(seed, static_cast<std::uint64_t>(r));
      const Eigen::MatrixXd z = NormalMatrix(rng, n, t);
      samples.push_back(m + a_s * z * a_t.transpose());
    }
    return samples;
  }

  const Eigen::MatrixXd a = PsdFactor(cov.ToDense());
  for (int r = 0; r < count; ++r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    const Eigen::MatrixXd z = NormalMatrix(rng, n, t);
    Eigen::VectorXd noise =
        a * Eigen::Map<const Eigen::VectorXd>(z.data(), z.size());
    samples.push_back(
        m + Eigen::Map<const Eigen::MatrixXd>(noise.data(), n, t));
  }
  return samples;
}

InputEpsilon ComputeInputEpsilon(double delta_u, const CovarianceModel& cov,
                                 double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgumentError("delta must lie in (0, 1)");
  }
  if (delta_u < 0.0 || !std::isfinite(delta_u)) {
    throw InvalidArgumentError("input sensitivity must be finite and >= 0");
  }
  InputEpsilon out;
  if (delta_u == 0.0) return out;  // identical adjacent inputs
  const double min_eig = cov.MinEigenvalue();
  if (min_eig <= 0.0) {
    throw SingularCovarianceError(
        "input covariance is singular; the Gaussian-mechanism epsilon is undefined");
  }
  out.epsilon = delta_u * std::sqrt(2.0 * std::log(1.25 / delta)) /
                std::sqrt(min_eig);
  out.classical_formula_extrapolation = out.epsilon > 1.0;
  return out;
}

double MeanSquaredError(const Eigen::MatrixXd& released,
                        const Eigen::MatrixXd& clean) {
  if (released.rows() != clean.rows() || released.cols() != clean.cols()) {
    throw DimensionMismatchError("MSE arguments must have equal shape");
  }
  if (released.size() == 0) return 0.0;
  return (released - clean).squaredNorm() /
         static_cast<double>(released.size());
}

Eigen::MatrixXd LoadMeanCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mean CSV: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("bad number at " + path + ":" + std::to_string(line_no));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("ragged CSV row at " + path + ":" + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) {
    throw IoError("mean CSV is empty: " + path);
  }
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  if (!m.allFinite()) throw IoError("mean CSV has non-finite entries: " + path);
  return m;
}

}  // namespace gsodp
