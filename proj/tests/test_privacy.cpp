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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "gsodp/errors.hpp"
#include "gsodp/filter.hpp"
#include "gsodp/graph.hpp"
#include "gsodp/mechanism.hpp"
#include "gsodp/montecarlo.hpp"
#include "gsodp/privacy.hpp"
#include "gsodp/rng.hpp"

using gsodp::Ar1Covariance;
using gsodp::AdjacentPair;
using gsodp::CovarianceModel;
using gsodp::DeltaBound;
using gsodp::EpsilonForDelta;
using gsodp::FilterBounds;
using gsodp::FilterSpec;
using gsodp::Gso;
using gsodp::OutputDistribution;
using gsodp::OutputGaussian;
using gsodp::RenyiDualRoutes;
using gsodp::RenyiEvaluator;
using gsodp::RenyiExact;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd RandomPd(gsodp::Rng& rng, int dim) {
  Eigen::MatrixXd a(dim, dim);
  for (int c = 0; c < dim; ++c) {
    for (int r = 0; r < dim; ++r) a(r, c) = rng.Normal();
  }
  return a * a.transpose() + 0.25 * dim * Eigen::MatrixXd::Identity(dim, dim);
}

Eigen::VectorXd RandomVector(gsodp::Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.Normal();
  return v;
}

Eigen::MatrixXd RandomMean(int n, int t, std::uint64_t seed) {
  gsodp::Rng rng(seed);
  Eigen::MatrixXd m(n, t);
  for (int c = 0; c < t; ++c) {
    for (int r = 0; r < n; ++r) m(r, c) = rng.Normal();
  }
  return m;
}

OutputGaussian Scalar(double mean, double variance) {
  Eigen::VectorXd mu(1);
  mu << mean;
  Eigen::MatrixXd k(1, 1);
  k << variance;
  return OutputGaussian::Dense(mu, k);
}

}  // namespace

TEST_CASE("identity shift passes mean and covariance through") {
  const int n = 3;
  const int t = 4;
  const Gso empty(Eigen::MatrixXd::Zero(n, n));
  const FilterSpec spec = FilterSpec::Polynomial({1.0});
  const Eigen::MatrixXd m = RandomMean(n, t, 3);
  const CovarianceModel cov =
      CovarianceModel::KronTemporal(Ar1Covariance(t, 0.9, 0.4), n);

  const OutputGaussian out = OutputDistribution(spec, empty, m, cov);
  CHECK(out.mean().isApprox(Eigen::Map<const Eigen::VectorXd>(m.data(), n * t),
                            1e-14));
  CHECK((out.CovarianceDense() - cov.ToDense()).norm() < 1e-12);
}

TEST_CASE("kron output layout matches the dense one") {
  const int n = 3;
  const int t = 4;
  const Gso g = gsodp::GenerateErdosRenyi(n, 0.8, 21);
  const FilterSpec spec = FilterSpec::Diffusion(0.1);
  const Eigen::MatrixXd m = RandomMean(n, t, 5);
  const Eigen::MatrixXd sigma_t = Ar1Covariance(t, 0.7, 0.5);

  const OutputGaussian kron = OutputDistribution(
      spec, g, m, CovarianceModel::KronTemporal(sigma_t, n));
  Eigen::MatrixXd dense_in = Eigen::MatrixXd::Zero(n * t, n * t);
  for (int a = 0; a < t; ++a) {
    for (int b = 0; b < t; ++b) {
      dense_in.block(a * n, b * n, n, n) =
          sigma_t(a, b) * Eigen::MatrixXd::Identity(n, n);
    }
  }
  const OutputGaussian dense = OutputDistribution(
      spec, g, m, CovarianceModel::Dense(dense_in, n, t));

  CHECK(kron.is_kron());
  CHECK(!dense.is_kron());
  CHECK(kron.mean().isApprox(dense.mean(), 1e-12));
  CHECK((kron.CovarianceDense() - dense.CovarianceDense()).norm() < 1e-10);
  CHECK(kron.LogDetCovariance() ==
        doctest::Approx(dense.LogDetCovariance()).epsilon(1e-10));
}

TEST_CASE("release dimension is n times t") {
  const Gso g = gsodp::GenerateErdosRenyi(7, 0.5, 7);
  const OutputGaussian out = OutputDistribution(
      FilterSpec::Diffusion(0.01), g, RandomMean(7, 20, 9),
      CovarianceModel::KronTemporal(Ar1Covariance(20, 1.0, 0.5), 7));
  CHECK(out.dim() == 140);
}

TEST_CASE("renyi divergence of a distribution against itself is zero") {
  gsodp::Rng rng(41);
  const Eigen::MatrixXd k = RandomPd(rng, 4);
  const OutputGaussian p = OutputGaussian::Dense(RandomVector(rng, 4), k);
  const RenyiEvaluator ev(p, p);
  CHECK(std::abs(ev.DAlpha(2.0)) < 1e-12);
  CHECK(std::abs(ev.DAlpha(7.5)) < 1e-12);
  CHECK(std::abs(ev.Kl()) < 1e-12);
  // Unbounded up to eigenvalue rounding noise.
  CHECK(ev.AlphaMax() > 1e12);
}

TEST_CASE("scalar variance pair has a textbook order-2 divergence") {
  // D_2(N(0,1) || N(0,2)) = (1/2) ln(4/3).
  const OutputGaussian p = Scalar(0.0, 1.0);
  const OutputGaussian q = Scalar(0.0, 2.0);
  const RenyiEvaluator ev(p, q);
  CHECK(std::abs(ev.DAlpha(2.0) - 0.5 * std::log(4.0 / 3.0)) < 1e-10);
  CHECK(std::abs(RenyiExact(p, q, 2.0) - 0.5 * std::log(4.0 / 3.0)) < 1e-10);

  // The reverse ordering hits the feasibility wall at alpha = 2.
  const RenyiEvaluator rev(q, p);
  CHECK(rev.AlphaMax() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(rev.DAlpha(2.5), gsodp::AlphaInfeasibleError);
}

TEST_CASE("equal covariance reduces to the mean-shift formula") {
  // D_alpha = (alpha/2) d^T Sigma^{-1} d when K = K'.
  gsodp::Rng rng(77);
  const int dim = 3;
  const Eigen::MatrixXd k = RandomPd(rng, dim);
  const Eigen::VectorXd mu = RandomVector(rng, dim);
  const Eigen::VectorXd d = RandomVector(rng, dim);
  const OutputGaussian p = OutputGaussian::Dense(mu + d, k);
  const OutputGaussian q = OutputGaussian::Dense(mu, k);
  const RenyiEvaluator ev(p, q);
  const double quad = d.dot(k.llt().solve(d));
  for (const double alpha : {1.5, 2.0, 4.0, 16.0}) {
    CHECK(ev.DAlpha(alpha) ==
          doctest::Approx(alpha / 2.0 * quad).epsilon(1e-10));
  }
  CHECK(ev.AlphaMax() > 1e12);
}

TEST_CASE("divergence matches a direct monte carlo moment estimate") {
  // D_alpha = ln E_Q[(dP/dQ)^alpha] / (alpha - 1), estimated by sampling
  // under Q and averaging exp(-alpha * ln(dQ/dP)).
  gsodp::Rng rng(301);
  const int dim = 2;
  const Eigen::MatrixXd k = RandomPd(rng, dim);
  const Eigen::VectorXd mu = RandomVector(rng, dim);
  Eigen::VectorXd d = RandomVector(rng, dim);
  d *= 0.2 / d.norm();
  const OutputGaussian p = OutputGaussian::Dense(mu + d, k);
  const OutputGaussian q = OutputGaussian::Dense(mu, k);

  const double alpha = 2.0;
  const double exact = RenyiEvaluator(p, q).DAlpha(alpha);

  const int count = 200000;
  const Eigen::VectorXd q_losses = gsodp::SampleLosses(q, p, count, 8080);
  const Eigen::ArrayXd weights = (-alpha * q_losses.array()).exp();
  const double mean = weights.mean();
  const double sd = std::sqrt((weights - mean).square().sum() / count);
  const double se_mean = sd / std::sqrt(static_cast<double>(count));
  const double estimate = std::log(mean) / (alpha - 1.0);
  const double se_estimate = se_mean / ((alpha - 1.0) * mean);
  CHECK(std::abs(estimate - exact) < 3.0 * se_estimate + 1e-6);
}

TEST_CASE("both closed-form routes agree and the tamper hook works") {
  gsodp::Rng rng(500);
  const int dim = 4;
  const OutputGaussian p =
      OutputGaussian::Dense(RandomVector(rng, dim), RandomPd(rng, dim));
  const OutputGaussian q =
      OutputGaussian::Dense(RandomVector(rng, dim), RandomPd(rng, dim));
  const RenyiEvaluator ev(p, q);
  const double alpha = std::isfinite(ev.AlphaMax())
                           ? 1.0 + 0.8 * (ev.AlphaMax() - 1.0)
                           : 1.7;
  const auto routes = RenyiDualRoutes(p, q, alpha);
  CHECK(std::abs(routes.covariance_route - routes.precision_route) <
        1e-8 * (1.0 + std::abs(routes.covariance_route)));

  const auto skewed = RenyiDualRoutes(p, q, alpha, 1.05);
  CHECK(std::abs(skewed.covariance_route - skewed.precision_route) >
        1e-6 * (1.0 + std::abs(skewed.covariance_route)));
}

TEST_CASE("structured evaluator equals the dense one") {
  const int n = 4;
  const int t = 5;
  const Gso g = gsodp::GenerateErdosRenyi(n, 0.6, 11);
  const auto pairs = gsodp::EnumerateAdjacent(g);
  REQUIRE(!pairs.empty());
  const FilterSpec spec = FilterSpec::Diffusion(0.08);
  const Eigen::MatrixXd m = RandomMean(n, t, 23);
  const Eigen::MatrixXd sigma_t = Ar1Covariance(t, 0.8, 0.45);
  const CovarianceModel cov = CovarianceModel::KronTemporal(sigma_t, n);

  const OutputGaussian p = OutputDistribution(spec, pairs[0].base, m, cov);
  const OutputGaussian q = OutputDistribution(spec, pairs[0].other, m, cov);
  const RenyiEvaluator fast(p, q);
  const RenyiEvaluator dense(p, q, /*force_dense=*/true);
  CHECK(fast.structured());
  CHECK(!dense.structured());
  CHECK(fast.AlphaMax() == doctest::Approx(dense.AlphaMax()).epsilon(1e-8));
  for (const double alpha : {1.2, 2.0, 5.0}) {
    if (alpha >= fast.AlphaMax()) continue;
    const double a = fast.DAlpha(alpha);
    const double b = dense.DAlpha(alpha);
    CHECK(std::abs(a - b) <= 1e-8 * (1.0 + std::abs(b)));
  }
  CHECK(std::abs(fast.Kl() - dense.Kl()) <= 1e-8 * (1.0 + dense.Kl()));
}

TEST_CASE("divergence approaches the kl limit near order one") {
  // P is a strict contraction of Q plus a small mean offset, which keeps
  // the loss variance below twice the KL; the first-order expansion then
  // bounds the relative gap at 1.001 strictly below 1e-3.
  gsodp::Rng rng(909);
  const int dim = 4;
  const Eigen::MatrixXd k = RandomPd(rng, dim);
  const Eigen::MatrixXd f = k.llt().matrixL();
  Eigen::MatrixXd s(dim, dim);
  for (int c = 0; c < dim; ++c) {
    for (int r = 0; r < dim; ++r) s(r, c) = rng.Normal();
  }
  s = (s * s.transpose()).eval();
  s /= Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues()
           .maxCoeff();
  const Eigen::MatrixXd e =
      -(0.2 * Eigen::MatrixXd::Identity(dim, dim) + 0.3 * s);
  const Eigen::MatrixXd kp = f * (Eigen::MatrixXd::Identity(dim, dim) + e) *
                             f.transpose();
  Eigen::VectorXd d = RandomVector(rng, dim);
  d *= 0.3 / d.norm();
  const Eigen::VectorXd mu = RandomVector(rng, dim);
  const OutputGaussian p = OutputGaussian::Dense(mu, kp);
  const OutputGaussian q = OutputGaussian::Dense(mu + f * d, k);

  const RenyiEvaluator ev(p, q);
  const double kl = ev.Kl();
  REQUIRE(kl > 1e-3);
  CHECK(std::abs(ev.DAlpha(1.001) - kl) < 1e-3 * kl);
  CHECK(ev.Kl() == doctest::Approx(gsodp::GaussianKl(p, q)).epsilon(1e-10));
}

TEST_CASE("divergence is nondecreasing in the order") {
  gsodp::Rng rng(1234);
  const int dim = 3;
  const OutputGaussian p =
      OutputGaussian::Dense(RandomVector(rng, dim), RandomPd(rng, dim));
  const OutputGaussian q =
      OutputGaussian::Dense(RandomVector(rng, dim), RandomPd(rng, dim));
  const RenyiEvaluator ev(p, q);
  const double hi = std::isfinite(ev.AlphaMax())
                        ? 1.0 + 0.95 * (ev.AlphaMax() - 1.0)
                        : 50.0;
  double prev = ev.Kl();
  for (int k = 0; k <= 30; ++k) {
    const double alpha =
        1.0 + (hi - 1.0) * std::pow(2.0, (k - 30.0) / 3.0);
    const double value = ev.DAlpha(alpha);
    CHECK(value >= prev - 1e-10 * (1.0 + std::abs(prev)));
    prev = value;
  }
}

TEST_CASE("divergence is invariant under invertible post-processing") {
  gsodp::Rng rng(555);
  const int dim = 3;
  const Eigen::VectorXd mu_p = RandomVector(rng, dim);
  const Eigen::VectorXd mu_q = RandomVector(rng, dim);
  const Eigen::MatrixXd kp = RandomPd(rng, dim);
  const Eigen::MatrixXd kq = RandomPd(rng, dim);
  Eigen::MatrixXd a(dim, dim);
  do {
    for (int c = 0; c < dim; ++c) {
      for (int r = 0; r < dim; ++r) a(r, c) = rng.Normal();
    }
  } while (std::abs(a.determinant()) < 0.1);

  const OutputGaussian p = OutputGaussian::Dense(mu_p, kp);
  const OutputGaussian q = OutputGaussian::Dense(mu_q, kq);
  const OutputGaussian tp =
      OutputGaussian::Dense(a * mu_p, a * kp * a.transpose());
  const OutputGaussian tq =
      OutputGaussian::Dense(a * mu_q, a * kq * a.transpose());

  const RenyiEvaluator ev(p, q);
  const RenyiEvaluator tev(tp, tq);
  for (const double alpha : {1.3, 2.0, 3.7}) {
    if (alpha >= ev.AlphaMax()) continue;
    CHECK(tev.DAlpha(alpha) ==
          doctest::Approx(ev.DAlpha(alpha)).epsilon(1e-8));
  }
}

TEST_CASE("divergence is free of measurement units") {
  gsodp::Rng rng(808);
  const int dim = 3;
  const Eigen::VectorXd mu_p = RandomVector(rng, dim);
  const Eigen::VectorXd mu_q = RandomVector(rng, dim);
  const Eigen::MatrixXd kp = RandomPd(rng, dim);
  const Eigen::MatrixXd kq = RandomPd(rng, dim);
  const RenyiEvaluator base(OutputGaussian::Dense(mu_p, kp),
                            OutputGaussian::Dense(mu_q, kq));
  for (const double c : {10.0, 100.0, 1000.0}) {
    const RenyiEvaluator scaled(OutputGaussian::Dense(c * mu_p, c * c * kp),
                                OutputGaussian::Dense(c * mu_q, c * c * kq));
    for (const double alpha : {1.5, 2.5}) {
      if (alpha >= base.AlphaMax()) continue;
      CHECK(scaled.DAlpha(alpha) ==
            doctest::Approx(base.DAlpha(alpha)).epsilon(1e-9));
    }
  }
}

TEST_CASE("identical distributions certify at any epsilon") {
  gsodp::Rng rng(31);
  const OutputGaussian p =
      OutputGaussian::Dense(RandomVector(rng, 3), RandomPd(rng, 3));
  const auto at_zero = DeltaBound(p, p, 0.0);
  CHECK(at_zero.value == doctest::Approx(1.0));
  CHECK(at_zero.absolutely_continuous);
  const auto at_small = DeltaBound(p, p, 0.1);
  CHECK(at_small.value < 1e-12);
}

TEST_CASE("delta bound is a valid chernoff bound on the loss tail") {
  const int n = 3;
  const int t = 4;
  const Gso g = gsodp::GenerateErdosRenyi(n, 0.6, 5);
  const auto pairs = gsodp::EnumerateAdjacent(g);
  REQUIRE(!pairs.empty());
  const FilterSpec spec = FilterSpec::Diffusion(0.05);
  const Eigen::MatrixXd m = RandomMean(n, t, 12);
  const CovarianceModel cov =
      CovarianceModel::KronTemporal(Ar1Covariance(t, 0.5, 0.3), n);
  const OutputGaussian p = OutputDistribution(spec, pairs[0].base, m, cov);
  const OutputGaussian q = OutputDistribution(spec, pairs[0].other, m, cov);

  const int count = 100000;
  const Eigen::VectorXd losses = gsodp::SampleLosses(p, q, count, 404);
  const double kl = RenyiEvaluator(p, q).Kl();
  for (int k = 0; k < 8; ++k) {
    const double eps = kl * (0.5 + 0.5 * k);
    const auto bound = DeltaBound(p, q, eps);
    const auto tail = gsodp::TailFromLosses(losses, eps, false);
    CHECK(bound.value >= tail.p_hat - 3.0 * tail.std_error);
  }
}

TEST_CASE("epsilon conversion basics") {
  gsodp::Rng rng(92);
  const OutputGaussian p =
      OutputGaussian::Dense(RandomVector(rng, 3), RandomPd(rng, 3));
  const auto self = EpsilonForDelta(p, p, 1e-5);
  CHECK(self.value == doctest::Approx(0.0).epsilon(1e-12));

  const OutputGaussian q =
      OutputGaussian::Dense(RandomVector(rng, 3), RandomPd(rng, 3));
  const auto strict = EpsilonForDelta(p, q, 1e-7);
  const auto loose = EpsilonForDelta(p, q, 1e-3);
  CHECK(strict.absolutely_continuous);
  CHECK(strict.value > loose.value);
  CHECK(strict.alpha_star > 1.0);

  // Converting back may only tighten: delta(epsilon(delta)) <= delta.
  for (const double delta : {1e-3, 1e-5, 1e-7}) {
    const auto eps = EpsilonForDelta(p, q, delta);
    const auto back = DeltaBound(p, q, eps.value);
    CHECK(back.value <= delta * (1.0 + 1e-6));
  }
}

TEST_CASE("mismatched supports admit no finite certificate") {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd ka = Eigen::MatrixXd::Zero(2, 2);
  ka(0, 0) = 1.0;
  Eigen::MatrixXd kb = Eigen::MatrixXd::Zero(2, 2);
  kb(1, 1) = 1.0;
  const OutputGaussian p = OutputGaussian::Dense(mu, ka);
  const OutputGaussian q = OutputGaussian::Dense(mu, kb);

  const auto delta = DeltaBound(p, q, 1.0);
  CHECK(delta.value == 1.0);
  CHECK(!delta.absolutely_continuous);
  const auto eps = EpsilonForDelta(p, q, 1e-5);
  CHECK(eps.value == kInf);
  CHECK(!eps.absolutely_continuous);
}

TEST_CASE("spectral certificate vanishes for a perfectly conditioned filter") {
  FilterBounds bounds;
  bounds.gamma = 1.0;
  bounds.Gamma = 1.0;
  bounds.kappa = 0.0;
  bounds.B = 1.0;
  bounds.source = "certified";
  CHECK(gsodp::Theorem2ClosedForm(bounds, 1.0, 1.0, 4, 3, 1.0, 2.0, 2.0) ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK(gsodp::Theorem2AlphaMax(bounds, 1.0, 1.0) == kInf);
}

TEST_CASE("spectral certificate mean term scales with the noise floor") {
  FilterBounds bounds;
  bounds.gamma = 1.0;
  bounds.Gamma = 1.0;
  bounds.kappa = 0.2;
  bounds.B = 1.0;
  bounds.source = "certified";
  FilterBounds no_push = bounds;
  no_push.kappa = 0.0;

  const double alpha = 2.0;
  // With Omega = omega the determinant term is kappa-free, so the
  // difference isolates the mean term, proportional to 1 / omega^2.
  const double at_one =
      gsodp::Theorem2ClosedForm(bounds, 1.0, 1.0, 4, 3, 1.0, 2.0, alpha) -
      gsodp::Theorem2ClosedForm(no_push, 1.0, 1.0, 4, 3, 1.0, 2.0, alpha);
  const double at_four =
      gsodp::Theorem2ClosedForm(bounds, 4.0, 4.0, 4, 3, 1.0, 2.0, alpha) -
      gsodp::Theorem2ClosedForm(no_push, 4.0, 4.0, 4, 3, 1.0, 2.0, alpha);
  const double push = bounds.kappa * 1.0 * 2.0;
  CHECK(at_one == doctest::Approx(alpha * (2.0 * alpha - 1.0) * push * push /
                                  (2.0 * (alpha - 1.0)))
                      .epsilon(1e-12));
  CHECK(at_four == doctest::Approx(at_one / 16.0).epsilon(1e-12));
}

TEST_CASE("spectral certificate rejects orders past its feasibility wall") {
  FilterBounds bounds;
  bounds.gamma = 0.5;
  bounds.Gamma = 2.0;
  bounds.kappa = 0.1;
  bounds.B = 1.0;
  bounds.source = "certified";
  // Omega / omega = (2^2) / (0.5^2) = 16, so the wall is 16/15.
  const double wall = gsodp::Theorem2AlphaMax(bounds, 1.0, 1.0);
  CHECK(wall == doctest::Approx(16.0 / 15.0).epsilon(1e-12));
  CHECK_NOTHROW(
      gsodp::Theorem2ClosedForm(bounds, 1.0, 1.0, 4, 3, 1.0, 2.0, 1.05));
  CHECK_THROWS_AS(gsodp::Theorem2ClosedForm(bounds, 1.0, 1.0, 4, 3, 1.0, 2.0,
                                            wall * (1.0 + 1e-6)),
                  gsodp::AlphaInfeasibleError);
  CHECK_THROWS_AS(
      gsodp::Theorem2ClosedForm(bounds, 1.0, 1.0, 4, 3, 1.0, 2.0, 2.0),
      gsodp::AlphaInfeasibleError);
}

TEST_CASE("identical shifts collapse the privacy loss") {
  const Gso g = gsodp::GenerateErdosRenyi(3, 0.5, 2);
  const AdjacentPair same{g, g, 0, 1, 0.0};
  const Eigen::MatrixXd m = RandomMean(3, 2, 8);
  const CovarianceModel cov =
      CovarianceModel::KronTemporal(Ar1Covariance(2, 1.0, 0.2), 3);
  CHECK(gsodp::KernelCollapseCheck(FilterSpec::Diffusion(0.1), same, m, cov));
  CHECK(gsodp::KernelCollapseResidual(FilterSpec::Diffusion(0.1), same, m,
                                      cov) < 1e-12);
}

TEST_CASE("edge toggles invisible to the signal support collapse") {
  // H(S) = S, input support on vertices {2, 3} only, toggled edge (0, 1):
  // (S - S') annihilates everything the release can depend on.
  const int n = 4;
  const int t = 3;
  Eigen::MatrixXd shift = Eigen::MatrixXd::Zero(n, n);
  shift(2, 3) = shift(3, 2) = 1.0;
  shift(1, 2) = shift(2, 1) = 1.0;
  const Gso base(shift);
  const Gso other = base.WithEdge(0, 1, 1.0);
  const AdjacentPair pair{base, other, 0, 1, 1.0};

  const FilterSpec spec = FilterSpec::Polynomial({0.0, 1.0});
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, t);
  m.row(2).setConstant(1.0);
  m.row(3).setConstant(-0.5);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  diag(2) = diag(3) = 1.0;
  const CovarianceModel cov = CovarianceModel::KronTemporal(
      Ar1Covariance(t, 1.0, 0.4),
      Eigen::MatrixXd(diag.asDiagonal()));

  CHECK(gsodp::KernelCollapseCheck(spec, pair, m, cov));

  const auto assessment = gsodp::AssessPair(spec, pair, m, cov, 1e-5);
  CHECK(assessment.method == gsodp::AssessmentMethod::kKernelCollapse);
  CHECK(assessment.epsilon == 0.0);
  CHECK(assessment.epsilon_two_sided == 0.0);

  // Full-rank noise sees the toggle, so no collapse.
  const CovarianceModel full =
      CovarianceModel::KronTemporal(Ar1Covariance(t, 1.0, 0.4), n);
  CHECK(!gsodp::KernelCollapseCheck(spec, pair, m, full));
}

TEST_CASE("projection leaves full-rank pairs unchanged") {
  const int n = 3;
  const int t = 2;
  const Gso g = gsodp::GenerateErdosRenyi(n, 0.7, 6);
  const auto pairs = gsodp::EnumerateAdjacent(g);
  REQUIRE(!pairs.empty());
  const FilterSpec spec = FilterSpec::Diffusion(0.07);
  const Eigen::MatrixXd m = RandomMean(n, t, 44);
  const CovarianceModel cov =
      CovarianceModel::KronTemporal(Ar1Covariance(t, 0.9, 0.25), n);
  const OutputGaussian p = OutputDistribution(spec, pairs[0].base, m, cov);
  const OutputGaussian q = OutputDistribution(spec, pairs[0].other, m, cov);

  const auto [pp, pq] = gsodp::ProjectSingular(p, q);
  CHECK(pp.dim() == p.dim());
  const RenyiEvaluator before(p, q);
  const RenyiEvaluator after(pp, pq);
  for (const double alpha : {1.5, 2.0, 3.0}) {
    if (alpha >= before.AlphaMax()) continue;
    CHECK(after.DAlpha(alpha) ==
          doctest::Approx(before.DAlpha(alpha)).epsilon(1e-8));
  }
}

TEST_CASE("rank-deficient noise restricts to its support") {
  // On the complete 4-vertex graph, u = e2 - e3 is an eigenvector of both
  // the shift and its (0,1)-toggle, so rank-1 noise along u stays rank 1
  // through H(S) = S for both; the common support has dimension T.
  const int n = 4;
  const int t = 3;
  Eigen::MatrixXd shift = Eigen::MatrixXd::Ones(n, n);
  shift.diagonal().setZero();
  const Gso base(shift);
  const Gso other = base.WithEdge(0, 1, 0.0);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  u(2) = 1.0;
  u(3) = -1.0;
  const Eigen::MatrixXd spatial = u * u.transpose();
  const CovarianceModel cov =
      CovarianceModel::KronTemporal(Ar1Covariance(t, 1.0, 0.3), spatial);
  const Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, t);
  const FilterSpec spec = FilterSpec::Polynomial({0.0, 1.0});

  const OutputGaussian p = OutputDistribution(spec, base, m, cov);
  const OutputGaussian q = OutputDistribution(spec, other, m, cov);
  CHECK(p.CovarianceRank() == t);

  const auto [pp, pq] = gsodp::ProjectSingular(p, q);
  CHECK(pp.dim() == t);
  CHECK(pq.dim() == t);
  CHECK_NOTHROW(RenyiEvaluator(pp, pq));
}

TEST_CASE("zero covariance projects to an empty release") {
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(3, 0.7);
  const OutputGaussian p =
      OutputGaussian::Dense(mu, Eigen::MatrixXd::Zero(3, 3));
  const auto [pp, pq] = gsodp::ProjectSingular(p, p);
  CHECK(pp.dim() == 0);
  const RenyiEvaluator ev(pp, pq);
  CHECK(ev.DAlpha(2.0) == 0.0);
  CHECK(ev.Kl() == 0.0);
}

TEST_CASE("projection refuses genuinely different supports") {
  Eigen::MatrixXd ka = Eigen::MatrixXd::Zero(2, 2);
  ka(0, 0) = 1.0;
  Eigen::MatrixXd kb = Eigen::MatrixXd::Zero(2, 2);
  kb(1, 1) = 1.0;
  const OutputGaussian p =
      OutputGaussian::Dense(Eigen::VectorXd::Zero(2), ka);
  const OutputGaussian q =
      OutputGaussian::Dense(Eigen::VectorXd::Zero(2), kb);
  CHECK_THROWS_AS(gsodp::ProjectSingular(p, q), gsodp::SupportMismatchError);

  // A mean offset off the shared support also breaks absolute continuity.
  Eigen::VectorXd mu(2);
  mu << 0.0, 1.0;
  const OutputGaussian shifted = OutputGaussian::Dense(mu, ka);
  CHECK_THROWS_AS(gsodp::ProjectSingular(p, shifted),
                  gsodp::SupportMismatchError);
}

TEST_CASE("constant filters certify everything at epsilon zero") {
  const Gso empty(Eigen::MatrixXd::Zero(4, 4));
  const Eigen::MatrixXd m = RandomMean(4, 3, 15);
  const CovarianceModel cov =
      CovarianceModel::KronTemporal(Ar1Covariance(3, 1.0, 0.5), 4);
  const auto worst = gsodp::WorstCaseAssessment(FilterSpec::Polynomial({1.0}),
                                                empty, m, cov, 1e-5);
  CHECK(worst.epsilon == 0.0);
  CHECK(worst.method == gsodp::AssessmentMethod::kKernelCollapse);
}

TEST_CASE("two vertices yield exactly one adjacent pair") {
  const Gso g(Eigen::MatrixXd::Zero(2, 2));
  const auto pairs = gsodp::EnumerateAdjacent(g);
  REQUIRE(pairs.size() == 1);
  const Eigen::MatrixXd m = RandomMean(2, 3, 19);
  const CovarianceModel cov =
      CovarianceModel::KronTemporal(Ar1Covariance(3, 0.8, 0.2), 2);
  const FilterSpec spec = FilterSpec::Diffusion(0.12);

  const auto worst = gsodp::WorstCaseAssessment(spec, g, m, cov, 1e-5);
  const auto single = gsodp::AssessPair(spec, pairs[0], m, cov, 1e-5);
  CHECK(worst.epsilon == doctest::Approx(single.epsilon).epsilon(1e-12));
  CHECK(worst.edge_i == 0);
  CHECK(worst.edge_j == 1);

  // The one-pair certificate covers both orderings.
  const OutputGaussian p = OutputDistribution(spec, pairs[0].base, m, cov);
  const OutputGaussian q = OutputDistribution(spec, pairs[0].other, m, cov);
  const double fwd = EpsilonForDelta(p, q, 1e-5).value;
  const double rev = EpsilonForDelta(q, p, 1e-5).value;
  CHECK(single.epsilon == doctest::Approx(std::max(fwd, rev)).epsilon(1e-12));
}

TEST_CASE("worst case agrees with an external scan over pairs") {
  const int n = 7;
  const int t = 4;
  const Gso g = gsodp::GenerateErdosRenyi(n, 0.5, 7);
  const FilterSpec spec = FilterSpec::Diffusion(0.01);
  const Eigen::MatrixXd m = RandomMean(n, t, 71);
  const CovarianceModel cov =
      CovarianceModel::KronTemporal(Ar1Covariance(t, 1.0, 0.5), n);
  const double delta = 1e-5;

  const auto pairs = gsodp::EnumerateAdjacent(g);
  REQUIRE(pairs.size() == 21);
  double best = -1.0;
  int best_i = -1;
  int best_j = -1;
  for (const auto& pair : pairs) {
    const auto a = gsodp::AssessPair(spec, pair, m, cov, delta);
    if (a.epsilon > best) {
      best = a.epsilon;
      best_i = pair.edge_i;
      best_j = pair.edge_j;
    }
  }
  const auto worst = gsodp::WorstCaseAssessment(spec, g, m, cov, delta);
  CHECK(worst.epsilon == doctest::Approx(best).epsilon(1e-10));
  CHECK(worst.edge_i == best_i);
  CHECK(worst.edge_j == best_j);
  CHECK(worst.delta == delta);
  CHECK(worst.epsilon_two_sided >= worst.epsilon);

  const std::string json = worst.ToJson(2);
  CHECK(json.find("\"epsilon\"") != std::string::npos);
  CHECK(json.find("\"method\"") != std::string::npos);
}
