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

#include "gsodp/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <Eigen/Cholesky>

#include "gsodp/errors.hpp"
#include "gsodp/mechanism.hpp"
#include "gsodp/parallel.hpp"
#include "gsodp/rng.hpp"

namespace gsodp {
namespace {

// Fixed batch size: substream b always covers samples [b*kBatch,
// (b+1)*kBatch), so estimates cannot depend on the worker count.
constexpr int kBatch = 8192;

double CholeskyLogDet(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// Density pieces of one full-rank Gaussian, ready for batched evaluation.
struct DensityTerms {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double logdet = 0.0;
  Eigen::VectorXd mu;
};

DensityTerms MakeDensityTerms(const OutputGaussian& g) {
  DensityTerms terms;
  terms.mu = g.mean();
  terms.llt.compute(g.CovarianceDense());
  if (terms.llt.info() != Eigen::Success) {
    throw SupportMismatchError(
        "covariance is not positive definite; restrict both distributions "
        "to the common support first");
  }
  terms.logdet = CholeskyLogDet(terms.llt);
  return terms;
}

// Squared Mahalanobis distances of the columns of y.
Eigen::VectorXd BatchQuadForm(const DensityTerms& terms,
                              const Eigen::MatrixXd& y) {
  const Eigen::MatrixXd centered = y.colwise() - terms.mu;
  const Eigen::MatrixXd whitened = terms.llt.matrixL().solve(centered);
  return whitened.colwise().squaredNorm().transpose();
}

// Sampling factors of P (structure-aware).
struct Sampler {
  bool kron = false;
  Eigen::MatrixXd a_dense;
  Eigen::MatrixXd a_spatial;
  Eigen::MatrixXd a_temporal;
  int n = 0;
  int t = 0;
};

Sampler MakeSampler(const OutputGaussian& p) {
  Sampler s;
  if (p.is_kron()) {
    s.kron = true;
    s.a_spatial = PsdFactor(p.spatial());
    s.a_temporal = PsdFactor(p.temporal());
    s.n = static_cast<int>(p.spatial().rows());
    s.t = static_cast<int>(p.temporal().rows());
  } else {
    s.a_dense = PsdFactor(p.CovarianceDense());
  }
  return s;
}

void FillBatch(const Sampler& sampler, const Eigen::VectorXd& mu,
               std::uint64_t seed, std::uint64_t batch_index,
               Eigen::MatrixXd& out) {
  Rng rng(seed, batch_index);
  const int dim = static_cast<int>(mu.size());
  if (sampler.kron) {
    Eigen::MatrixXd z(sampler.n, sampler.t);
    for (Eigen::Index col = 0; col < out.cols(); ++col) {
      for (int j = 0; j < sampler.t; ++j) {
        for (int i = 0; i < sampler.n; ++i) z(i, j) = rng.Normal();
      }
      const Eigen::MatrixXd y =
          sampler.a_spatial * z * sampler.a_temporal.transpose();
      out.col(col) = mu + Eigen::Map<const Eigen::VectorXd>(y.data(), dim);
    }
  } else {
    Eigen::VectorXd z(dim);
    for (Eigen::Index col = 0; col < out.cols(); ++col) {
      for (int i = 0; i < dim; ++i) z(i) = rng.Normal();
      out.col(col) = mu + sampler.a_dense * z;
    }
  }
}

}  // namespace

double LogLikelihoodRatio(const Eigen::VectorXd& y, const OutputGaussian& p,
                          const OutputGaussian& q) {
  if (p.dim() != q.dim()) {
    throw DimensionMismatchError("distributions have different dimensions");
  }
  Eigen::VectorXd point;
  if (y.size() == p.dim()) {
    point = y;
  } else if (p.support().has_value() &&
             y.size() == p.support()->rows()) {
    const Eigen::MatrixXd& basis = *p.support();
    point = basis.transpose() * y;
    const Eigen::VectorXd off = y - basis * point - p.support_offset();
    if (off.norm() > 1e-8 * (1.0 + y.norm())) {
      throw SupportMismatchError(
          "point lies off the support of the distributions");
    }
  } else {
    throw DimensionMismatchError(
        "point length matches neither the distribution nor its original "
        "coordinates");
  }
  if (p.dim() == 0) return 0.0;
  const DensityTerms tp = MakeDensityTerms(p);
  const DensityTerms tq = MakeDensityTerms(q);
  const Eigen::VectorXd dp = point - tp.mu;
  const Eigen::VectorXd dq = point - tq.mu;
  const double quad_p = tp.llt.matrixL().solve(dp).squaredNorm();
  const double quad_q = tq.llt.matrixL().solve(dq).squaredNorm();
  return 0.5 * (tq.logdet - tp.logdet + quad_q - quad_p);
}

ReleaseStats SampleReleaseStats(const OutputGaussian& p,
                                const OutputGaussian& q, int n_samples,
                                std::uint64_t seed) {
  if (p.dim() != q.dim()) {
    throw DimensionMismatchError("distributions have different dimensions");
  }
  if (n_samples < 1) {
    throw InvalidArgumentError("sample count must be at least 1");
  }
  ReleaseStats stats;
  stats.losses = Eigen::VectorXd::Zero(n_samples);
  stats.mse = Eigen::VectorXd::Zero(n_samples);
  const int dim = p.dim();
  if (dim == 0) return stats;

  const DensityTerms tp = MakeDensityTerms(p);
  const DensityTerms tq = MakeDensityTerms(q);
  const Sampler sampler = MakeSampler(p);
  const double logdet_shift = 0.5 * (tq.logdet - tp.logdet);

  const std::size_t batches =
      (static_cast<std::size_t>(n_samples) + kBatch - 1) / kBatch;
  ParallelFor(batches, [&](std::size_t b) {
    const int start = static_cast<int>(b) * kBatch;
    const int size = std::min(kBatch, n_samples - start);
    Eigen::MatrixXd y(dim, size);
    FillBatch(sampler, tp.mu, seed, b, y);
    const Eigen::VectorXd quad_p = BatchQuadForm(tp, y);
    const Eigen::VectorXd quad_q = BatchQuadForm(tq, y);
    stats.losses.segment(start, size) =
        ((0.5 * (quad_q - quad_p)).array() + logdet_shift).matrix();
    stats.mse.segment(start, size) =
        (y.colwise() - tp.mu).colwise().squaredNorm().transpose() /
        static_cast<double>(dim);
  });
  return stats;
}

Eigen::VectorXd SampleLosses(const OutputGaussian& p, const OutputGaussian& q,
                             int n_samples, std::uint64_t seed) {
  return SampleReleaseStats(p, q, n_samples, seed).losses;
}

TailEstimate TailFromLosses(const Eigen::VectorXd& losses, double epsilon,
                            bool two_sided) {
  if (losses.size() == 0) {
    throw InvalidArgumentError("loss vector is empty");
  }
  std::int64_t count = 0;
  for (Eigen::Index i = 0; i < losses.size(); ++i) {
    const double l = two_sided ? std::abs(losses(i)) : losses(i);
    if (l > epsilon) ++count;
  }
  TailEstimate estimate;
  estimate.n_samples = losses.size();
  estimate.p_hat =
      static_cast<double>(count) / static_cast<double>(losses.size());
  estimate.std_error = std::sqrt(estimate.p_hat * (1.0 - estimate.p_hat) /
                                 static_cast<double>(losses.size()));
  estimate.epsilon = epsilon;
  estimate.two_sided = two_sided;
  return estimate;
}

TailEstimate EstimateTail(const OutputGaussian& p, const OutputGaussian& q,
                          double epsilon, int n_samples, std::uint64_t seed,
                          bool two_sided) {
  if (n_samples < 1000) {
    throw InvalidArgumentError(
        "tail estimation needs at least 1000 samples");
  }
  if (!std::isfinite(epsilon)) {
    throw InvalidArgumentError("epsilon must be finite");
  }
  return TailFromLosses(SampleLosses(p, q, n_samples, seed), epsilon,
                        two_sided);
}

}  // namespace gsodp
