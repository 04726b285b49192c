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

#include "gsodp/checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "gsodp/errors.hpp"
#include "gsodp/filter.hpp"
#include "gsodp/graph.hpp"
#include "gsodp/mechanism.hpp"
#include "gsodp/privacy.hpp"
#include "gsodp/rng.hpp"

namespace gsodp {
namespace {

constexpr std::uint64_t kCheckSeed = 0x6773646fu;

Eigen::MatrixXd RandomMatrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.Normal();
  }
  return m;
}

Eigen::MatrixXd RandomPd(Rng& rng, int dim) {
  const Eigen::MatrixXd a = RandomMatrix(rng, dim, dim);
  return a * a.transpose() +
         0.25 * static_cast<double>(dim) *
             Eigen::MatrixXd::Identity(dim, dim);
}

OutputGaussian RandomDense(Rng& rng, int dim) {
  return OutputGaussian::Dense(RandomMatrix(rng, dim, 1).col(0),
                               RandomPd(rng, dim));
}

double RelGap(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// A pair with a small whitened mean offset and a strict contraction of the
// first covariance against the second. Near order 1 the divergence gap is
// (alpha - 1)/2 times the loss variance, and the variance-to-KL ratio of a
// contraction stays below 2, so D_1.001 sits strictly inside the 1e-3
// relative band around the KL.
std::pair<OutputGaussian, OutputGaussian> NearbyPair(Rng& rng, int dim) {
  const Eigen::VectorXd mu = RandomMatrix(rng, dim, 1).col(0);
  const Eigen::MatrixXd k = RandomPd(rng, dim);
  const Eigen::MatrixXd f = Eigen::LLT<Eigen::MatrixXd>(k).matrixL();
  const Eigen::MatrixXd a = RandomMatrix(rng, dim, dim);
  Eigen::MatrixXd s = a * a.transpose();
  s /= Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues()
           .maxCoeff();
  const Eigen::MatrixXd e =
      -(0.2 * Eigen::MatrixXd::Identity(dim, dim) + 0.3 * s);
  const Eigen::MatrixXd kp =
      f * (Eigen::MatrixXd::Identity(dim, dim) + e) * f.transpose();
  Eigen::VectorXd d = RandomMatrix(rng, dim, 1).col(0);
  d *= 0.3 / d.norm();
  return {OutputGaussian::Dense(mu, kp),
          OutputGaussian::Dense(mu + f * d, k)};
}

// Draws an order comfortably inside the feasible range of the pair.
double FeasibleAlpha(const RenyiEvaluator& ev, Rng& rng) {
  const double span =
      std::isfinite(ev.AlphaMax()) ? 0.8 * (ev.AlphaMax() - 1.0) : 4.0;
  return 1.0 + std::min(span, 4.0) * (0.1 + 0.85 * rng.Uniform());
}

CheckResult DualFormCheck(double b_alpha_scale) {
  CheckResult result{"dual_form_agreement", true, ""};
  Rng rng(kCheckSeed, 1);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int dim = 2 + (i % 7);
    const OutputGaussian p = RandomDense(rng, dim);
    const OutputGaussian q = RandomDense(rng, dim);
    const RenyiEvaluator ev(p, q);
    const double alpha = FeasibleAlpha(ev, rng);
    const RenyiDualValues routes =
        RenyiDualRoutes(p, q, alpha, b_alpha_scale);
    const double gap =
        RelGap(routes.covariance_route, routes.precision_route);
    worst = std::max(worst, gap);
    if (gap > 1e-8) {
      result.passed = false;
    }
  }
  std::ostringstream detail;
  detail << "largest relative route gap " << worst << " over 100 instances";
  result.detail = detail.str();
  return result;
}

CheckResult KronVsDenseCheck() {
  CheckResult result{"kron_vs_dense", true, ""};
  Rng rng(kCheckSeed, 2);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int n = 2 + (i % 3);
    const int t = 2 + ((i / 3) % 3);
    const Eigen::MatrixXd sigma_t = RandomPd(rng, t);
    const Eigen::VectorXd mu_p = RandomMatrix(rng, n * t, 1).col(0);
    const Eigen::VectorXd mu_q = RandomMatrix(rng, n * t, 1).col(0);
    const OutputGaussian p =
        OutputGaussian::Kron(mu_p, sigma_t, RandomPd(rng, n));
    const OutputGaussian q =
        OutputGaussian::Kron(mu_q, sigma_t, RandomPd(rng, n));

    const double logdet_structured = p.LogDetCovariance();
    const double logdet_dense =
        OutputGaussian::Dense(mu_p, p.CovarianceDense()).LogDetCovariance();
    worst = std::max(worst, RelGap(logdet_structured, logdet_dense));

    const RenyiEvaluator structured(p, q);
    const RenyiEvaluator dense(p, q, /*force_dense=*/true);
    if (!structured.structured() || dense.structured()) {
      result.passed = false;
    }
    worst = std::max(worst, RelGap(structured.Kl(), dense.Kl()));
    for (int k = 0; k < 3; ++k) {
      const double alpha = FeasibleAlpha(structured, rng);
      worst = std::max(
          worst, RelGap(structured.DAlpha(alpha), dense.DAlpha(alpha)));
    }
  }
  if (worst > 1e-8) result.passed = false;
  std::ostringstream detail;
  detail << "largest structured-vs-dense gap " << worst
         << " over 20 instances";
  result.detail = detail.str();
  return result;
}

CheckResult KlLimitCheck() {
  CheckResult result{"kl_limit", true, ""};
  Rng rng(kCheckSeed, 3);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int dim = 2 + (i % 5);
    const auto [p, q] = NearbyPair(rng, dim);
    const RenyiEvaluator ev(p, q);
    const double kl = GaussianKl(p, q);
    const double near_one = ev.DAlpha(1.001);
    const double gap = std::abs(near_one - kl) / (1.0 + kl);
    worst = std::max(worst, gap);
    if (gap > 1e-3) result.passed = false;
    if (std::abs(ev.Kl() - kl) > 1e-8 * (1.0 + kl)) result.passed = false;
  }
  std::ostringstream detail;
  detail << "largest |D_1.001 - KL| / (1 + KL) = " << worst
         << " over 20 instances";
  result.detail = detail.str();
  return result;
}

CheckResult MonotonicityCheck() {
  CheckResult result{"alpha_monotonicity", true, ""};
  Rng rng(kCheckSeed, 4);
  double worst_drop = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int dim = 2 + (i % 5);
    const OutputGaussian p = RandomDense(rng, dim);
    const OutputGaussian q = RandomDense(rng, dim);
    const RenyiEvaluator ev(p, q);
    const double hi =
        std::isfinite(ev.AlphaMax()) ? 1.0 + 0.95 * (ev.AlphaMax() - 1.0)
                                     : 50.0;
    const double log_lo = std::log(1e-3);
    const double log_hi = std::log(hi - 1.0);
    double prev = -1.0;
    for (int k = 0; k < 40; ++k) {
      const double frac = static_cast<double>(k) / 39.0;
      const double alpha =
          1.0 + std::exp(log_lo + (log_hi - log_lo) * frac);
      const double value = ev.DAlpha(alpha);
      if (k > 0) {
        const double drop = prev - value;
        worst_drop = std::max(worst_drop, drop);
        if (drop > 1e-10 * (1.0 + std::abs(prev))) result.passed = false;
      }
      prev = value;
    }
  }
  std::ostringstream detail;
  detail << "largest decrease along the order grid " << worst_drop;
  result.detail = detail.str();
  return result;
}

CheckResult ScaleFreenessCheck() {
  CheckResult result{"scale_freeness", true, ""};
  Rng rng(kCheckSeed, 5);
  const Gso g = GenerateErdosRenyi(4, 0.7, 11);
  const FilterSpec spec = FilterSpec::Diffusion(0.05);
  const int t = 3;
  const Eigen::MatrixXd sigma_t = Ar1Covariance(t, 1.0, 0.5);
  const Eigen::MatrixXd m = 5.0 * RandomMatrix(rng, g.order(), t);
  const std::vector<AdjacentPair> pairs = EnumerateAdjacent(g);
  const AdjacentPair& pair = pairs.front();

  const std::vector<double> scales = {1.0, 10.0, 100.0, 1000.0};
  std::vector<double> values;
  for (const double s : scales) {
    const CovarianceModel cov =
        CovarianceModel::KronTemporal(s * s * sigma_t, g.order());
    const OutputGaussian p = OutputDistribution(spec, pair.base, m, cov);
    const OutputGaussian q = OutputDistribution(spec, pair.other, m, cov);
    values.push_back(RenyiEvaluator(p, q).DAlpha(2.0));
  }
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[i - 1] + 1e-12 * (1.0 + values[i - 1])) {
      result.passed = false;
    }
  }
  const double limit = values.back();
  if (!(limit > 0.0)) result.passed = false;
  // Mean term decays as 1/s^2, so the gap to the limit shrinks ~100x per
  // decade of s once the structural part dominates.
  const double early_gap = values[1] - values.back();
  const double late_gap = values[2] - values.back();
  if (late_gap > 0.02 * early_gap + 1e-12) result.passed = false;
  std::ostringstream detail;
  detail << "divergence at scales 1,10,100,1000: " << values[0] << ", "
         << values[1] << ", " << values[2] << ", " << values[3];
  result.detail = detail.str();
  return result;
}

}  // namespace

std::vector<CheckResult> RunPropertyChecks(double b_alpha_scale) {
  std::vector<CheckResult> results;
  results.push_back(DualFormCheck(b_alpha_scale));
  results.push_back(KronVsDenseCheck());
  results.push_back(KlLimitCheck());
  results.push_back(MonotonicityCheck());
  results.push_back(ScaleFreenessCheck());
  return results;
}

bool AllPassed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.passed; });
}

std::string FormatCheckReport(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  int passed = 0;
  for (const CheckResult& r : results) {
    out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
        << "\n";
    if (r.passed) ++passed;
  }
  out << passed << "/" << results.size() << " checks passed\n";
  return out.str();
}

}  // namespace gsodp
