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

#include "gsodp/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "json.hpp"

#include "gsodp/errors.hpp"
#include "gsodp/parallel.hpp"

namespace gsodp {
namespace {

constexpr double kRankTol = 1e-10;
constexpr double kAlphaCap = 1e6;
constexpr double kAlphaMargin = 1e-6;
constexpr double kObjectiveTol = 1e-10;
constexpr double kDualAgreementTol = 1e-8;
// Dual-route spot checks run dense Cholesky factorizations; above this
// dimension they would dominate the structured path they are guarding.
constexpr int kDualCheckMaxDim = 256;
constexpr double kAngleGap = 1e-8;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void CheckSymmetricFinite(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatchError(std::string(what) + " must be square");
  }
  if (m.size() == 0) return;
  if (!m.allFinite()) {
    throw InvalidArgumentError(std::string(what) + " has non-finite entries");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidArgumentError(std::string(what) + " is not symmetric");
  }
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> SymEig(
    const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (m + m.transpose()));
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kUnknown, "eigendecomposition failed to converge");
  }
  return eig;
}

bool IsPositiveDefinite(
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& eig) {
  if (eig.eigenvalues().size() == 0) return false;
  const double max_ev = eig.eigenvalues().maxCoeff();
  return max_ev > 0.0 && eig.eigenvalues().minCoeff() > kRankTol * max_ev;
}

// log det of a positive definite matrix through its eigenvalues.
double LogDetPd(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() == 0) return 0.0;
  const auto eig = SymEig(m);
  if (!IsPositiveDefinite(eig)) {
    throw SingularCovarianceError(std::string(what) +
                                  " is singular; log det is undefined");
  }
  return eig.eigenvalues().array().log().sum();
}

int RankOf(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() == 0) return 0;
  const auto eig = SymEig(m);
  const double max_ev = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (max_ev <= 0.0) return 0;
  return static_cast<int>(
      (eig.eigenvalues().array() > tol * max_ev).count());
}

void CheckPencilPositive(const Eigen::VectorXd& lambda) {
  const double floor = kRankTol * std::max(1.0, lambda.maxCoeff());
  if (lambda.minCoeff() <= floor) {
    throw SupportMismatchError(
        "second covariance is rank deficient on the support of the first; "
        "restrict both distributions to the common support first");
  }
}

// F^{-1} for the symmetric factor F = V diag(sqrt(ev)) of a positive
// definite matrix.
Eigen::MatrixXd WhitenInverse(
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& eig) {
  const Eigen::VectorXd inv_sqrt =
      eig.eigenvalues().cwiseSqrt().cwiseInverse();
  return inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
}

struct AlphaOptimum {
  double alpha = 0.0;
  double value = 0.0;
};

// Minimizes over the open order range (1, alpha_sup): coarse pass on a
// 64-point grid that is logarithmic in alpha - 1, then golden-section
// refinement around the grid minimizer.
AlphaOptimum MinimizeOverAlpha(const std::function<double(double)>& objective,
                               double alpha_sup) {
  double hi;
  if (std::isfinite(alpha_sup)) {
    const double span = alpha_sup - 1.0;
    if (span <= 0.0) {
      throw AlphaInfeasibleError("the feasible order range above 1 is empty");
    }
    hi = alpha_sup - std::min(kAlphaMargin, 0.5 * span);
  } else {
    hi = kAlphaCap;
  }
  const double lo = 1.0 + std::min(kAlphaMargin, 0.5 * (hi - 1.0));

  const auto eval = [&objective](double a) {
    try {
      return objective(a);
    } catch (const AlphaInfeasibleError&) {
      return kInf;
    }
  };

  constexpr int kGridPoints = 64;
  const double log_lo = std::log(lo - 1.0);
  const double log_hi = std::log(hi - 1.0);
  std::vector<double> alphas(kGridPoints);
  std::vector<double> values(kGridPoints);
  int best = 0;
  for (int i = 0; i < kGridPoints; ++i) {
    const double frac = static_cast<double>(i) / (kGridPoints - 1);
    alphas[i] = 1.0 + std::exp(log_lo + (log_hi - log_lo) * frac);
    values[i] = eval(alphas[i]);
    if (values[i] < values[best]) best = i;
  }
  if (!std::isfinite(values[best])) {
    throw AlphaInfeasibleError(
        "objective is infeasible across the entire order grid");
  }

  double a = alphas[std::max(best - 1, 0)];
  double b = alphas[std::min(best + 1, kGridPoints - 1)];
  AlphaOptimum result{alphas[best], values[best]};
  const auto consider = [&result](double x, double fx) {
    if (fx < result.value) result = {x, fx};
  };
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  consider(c, fc);
  consider(d, fd);
  for (int it = 0; it < 200; ++it) {
    if (b - a <= 1e-12 * (1.0 + b)) break;
    if (std::abs(fc - fd) <=
        kObjectiveTol * (1.0 + std::min(std::abs(fc), std::abs(fd)))) {
      break;
    }
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = eval(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = eval(d);
      consider(d, fd);
    }
  }
  return result;
}

// Ties the spectral evaluator to the direct dual-route computation at the
// optimizing order. Skipped above kDualCheckMaxDim.
void DualCheckAt(const OutputGaussian& p, const OutputGaussian& q,
                 const RenyiEvaluator& ev, double alpha) {
  if (p.dim() == 0 || p.dim() > kDualCheckMaxDim) return;
  const double spectral = ev.DAlpha(alpha);
  const double direct = RenyiExact(p, q, alpha);
  // Same conditioning allowance as in RenyiExact: every evaluation divides
  // log-determinant sums by alpha - 1.
  const double tol = kDualAgreementTol *
                         std::max({1.0, std::abs(spectral),
                                   std::abs(direct)}) +
                     1e-14 * p.dim() / (alpha - 1.0);
  if (std::abs(spectral - direct) > tol) {
    std::ostringstream msg;
    msg << "spectral and direct divergence evaluations disagree at alpha="
        << alpha << ": " << spectral << " vs " << direct;
    throw Error(ErrorCode::kCheckFailed, msg.str());
  }
}

struct SpectralEnvelope {
  double omega = 0.0;
  double big_omega = 0.0;
};

SpectralEnvelope MakeEnvelope(const FilterBounds& bounds, double lambda_min,
                              double lambda_max) {
  const double gamma = bounds.gamma_or_throw();
  if (!(gamma > 0.0) || !(bounds.Gamma > 0.0)) {
    throw InvalidArgumentError("spectral filter bounds must be positive");
  }
  if (!(lambda_min > 0.0) || !std::isfinite(lambda_min)) {
    throw NoUniformLowerBoundError(
        "input covariance has no positive smallest eigenvalue; the "
        "spectral certificate does not apply");
  }
  if (!(lambda_max >= lambda_min) || !std::isfinite(lambda_max)) {
    throw InvalidArgumentError(
        "covariance eigenvalue range is empty or non-finite");
  }
  SpectralEnvelope env;
  env.omega = gamma * gamma * lambda_min;
  env.big_omega = bounds.Gamma * bounds.Gamma * lambda_max;
  if (env.big_omega < env.omega) {
    throw InvalidArgumentError(
        "spectral envelope is inverted: Gamma^2 lambda_max < "
        "gamma^2 lambda_min");
  }
  return env;
}

void CheckDelta(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw InvalidArgumentError("delta must lie strictly inside (0, 1)");
  }
}

}  // namespace

OutputGaussian OutputGaussian::Dense(Eigen::VectorXd mu, Eigen::MatrixXd k) {
  CheckSymmetricFinite(k, "covariance");
  if (mu.size() != k.rows()) {
    throw DimensionMismatchError("mean and covariance dimensions differ");
  }
  if (mu.size() > 0 && !mu.allFinite()) {
    throw InvalidArgumentError("mean has non-finite entries");
  }
  OutputGaussian out;
  out.kron_ = false;
  out.mu_ = std::move(mu);
  out.dense_ = 0.5 * (k + k.transpose());
  return out;
}

OutputGaussian OutputGaussian::Kron(Eigen::VectorXd mu, Eigen::MatrixXd sigma_t,
                                    Eigen::MatrixXd w) {
  CheckSymmetricFinite(sigma_t, "temporal factor");
  CheckSymmetricFinite(w, "spatial factor");
  if (mu.size() != sigma_t.rows() * w.rows()) {
    throw DimensionMismatchError(
        "mean length does not match the Kronecker covariance dimension");
  }
  if (mu.size() > 0 && !mu.allFinite()) {
    throw InvalidArgumentError("mean has non-finite entries");
  }
  OutputGaussian out;
  out.kron_ = true;
  out.mu_ = std::move(mu);
  out.temporal_ = 0.5 * (sigma_t + sigma_t.transpose());
  out.w_ = 0.5 * (w + w.transpose());
  return out;
}

const Eigen::MatrixXd& OutputGaussian::temporal() const {
  if (!kron_) {
    throw InvalidArgumentError("covariance is stored densely");
  }
  return temporal_;
}

const Eigen::MatrixXd& OutputGaussian::spatial() const {
  if (!kron_) {
    throw InvalidArgumentError("covariance is stored densely");
  }
  return w_;
}

Eigen::MatrixXd OutputGaussian::CovarianceDense() const {
  if (!kron_) return dense_;
  const int t = static_cast<int>(temporal_.rows());
  const int n = static_cast<int>(w_.rows());
  Eigen::MatrixXd k(t * n, t * n);
  for (int a = 0; a < t; ++a) {
    for (int b = 0; b < t; ++b) {
      k.block(a * n, b * n, n, n) = temporal_(a, b) * w_;
    }
  }
  return k;
}

double OutputGaussian::LogDetCovariance() const {
  if (!kron_) return LogDetPd(dense_, "covariance");
  const double t = static_cast<double>(temporal_.rows());
  const double n = static_cast<double>(w_.rows());
  return n * LogDetPd(temporal_, "temporal factor") +
         t * LogDetPd(w_, "spatial factor");
}

int OutputGaussian::CovarianceRank(double tol) const {
  if (!kron_) return RankOf(dense_, tol);
  return RankOf(temporal_, tol) * RankOf(w_, tol);
}

OutputGaussian OutputDistribution(const FilterSpec& spec, const Gso& g,
                                  const Eigen::MatrixXd& m,
                                  const CovarianceModel& cov) {
  const int n = g.order();
  const int t = cov.t();
  if (cov.n() != n) {
    throw DimensionMismatchError(
        "covariance spatial dimension does not match the graph order");
  }
  if (m.rows() != n || m.cols() != t) {
    throw DimensionMismatchError("signal matrix must be n x T");
  }
  if (!m.allFinite()) {
    throw InvalidArgumentError("signal matrix has non-finite entries");
  }
  const Eigen::MatrixXd h = FilterMatrix(spec, g);
  const Eigen::MatrixXd y = h * m;
  Eigen::VectorXd mu =
      Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
  if (cov.is_kron()) {
    Eigen::MatrixXd w = h * cov.spatial() * h.transpose();
    return OutputGaussian::Kron(std::move(mu), cov.temporal(), std::move(w));
  }
  const Eigen::MatrixXd& sigma = cov.ToDense();
  Eigen::MatrixXd k(t * n, t * n);
  for (int a = 0; a < t; ++a) {
    for (int b = 0; b < t; ++b) {
      k.block(a * n, b * n, n, n) =
          h * sigma.block(a * n, b * n, n, n) * h.transpose();
    }
  }
  return OutputGaussian::Dense(std::move(mu), std::move(k));
}

RenyiEvaluator::RenyiEvaluator(const OutputGaussian& p,
                               const OutputGaussian& q, bool force_dense) {
  if (p.dim() != q.dim()) {
    throw DimensionMismatchError("distributions have different dimensions");
  }
  dim_ = p.dim();
  alpha_max_ = kInf;
  if (dim_ == 0) return;
  const Eigen::VectorXd d = p.mean() - q.mean();

  bool built = false;
  if (!force_dense && p.is_kron() && q.is_kron() &&
      p.temporal().rows() == q.temporal().rows() &&
      (p.temporal() - q.temporal()).cwiseAbs().maxCoeff() == 0.0) {
    const auto eig_t = SymEig(p.temporal());
    const auto eig_w = SymEig(p.spatial());
    if (IsPositiveDefinite(eig_t) && IsPositiveDefinite(eig_w)) {
      const int n = static_cast<int>(p.spatial().rows());
      const int t = static_cast<int>(p.temporal().rows());
      const Eigen::MatrixXd wiw = WhitenInverse(eig_w);
      const Eigen::MatrixXd mw = wiw * q.spatial() * wiw.transpose();
      const auto eig_m = SymEig(mw);
      lambda_ = eig_m.eigenvalues();
      CheckPencilPositive(lambda_);
      const Eigen::Map<const Eigen::MatrixXd> dmat(d.data(), n, t);
      const Eigen::MatrixXd zt =
          eig_t.eigenvectors() *
          eig_t.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();
      const Eigen::MatrixXd wmat =
          eig_m.eigenvectors().transpose() * (wiw * dmat) * zt;
      r_ = wmat.rowwise().squaredNorm();
      mult_ = static_cast<double>(t);
      structured_ = true;
      built = true;
    }
  }
  if (!built) {
    const Eigen::MatrixXd k = p.CovarianceDense();
    const Eigen::MatrixXd kq = q.CovarianceDense();
    const auto eig_k = SymEig(k);
    if (!IsPositiveDefinite(eig_k)) {
      throw SupportMismatchError(
          "first covariance is rank deficient; restrict both distributions "
          "to the common support first");
    }
    const Eigen::MatrixXd wi = WhitenInverse(eig_k);
    const Eigen::MatrixXd mt = wi * kq * wi.transpose();
    const auto eig_m = SymEig(mt);
    lambda_ = eig_m.eigenvalues();
    CheckPencilPositive(lambda_);
    const Eigen::VectorXd w = eig_m.eigenvectors().transpose() * (wi * d);
    r_ = w.array().square();
    mult_ = 1.0;
    structured_ = false;
  }

  for (Eigen::Index i = 0; i < lambda_.size(); ++i) {
    if (lambda_(i) < 1.0) {
      alpha_max_ = std::min(alpha_max_, 1.0 / (1.0 - lambda_(i)));
    }
  }
}

double RenyiEvaluator::DAlpha(double alpha) const {
  if (!std::isfinite(alpha) || alpha <= 1.0) {
    throw InvalidArgumentError("order must be a finite real above 1");
  }
  if (dim_ == 0) return 0.0;
  double mean_sum = 0.0;
  double log_sum = 0.0;
  for (Eigen::Index i = 0; i < lambda_.size(); ++i) {
    const double mix = 1.0 + alpha * (lambda_(i) - 1.0);
    if (mix <= 0.0) {
      std::ostringstream msg;
      msg << "order " << alpha << " is outside the feasible range (sup "
          << alpha_max_ << ")";
      throw AlphaInfeasibleError(msg.str());
    }
    mean_sum += r_(i) / mix;
    log_sum += std::log(mix) - alpha * std::log(lambda_(i));
  }
  return 0.5 * alpha * mean_sum -
         mult_ * log_sum / (2.0 * (alpha - 1.0));
}

double RenyiEvaluator::Kl() const {
  if (dim_ == 0) return 0.0;
  double trace_sum = 0.0;
  double mean_sum = 0.0;
  for (Eigen::Index i = 0; i < lambda_.size(); ++i) {
    trace_sum += 1.0 / lambda_(i) - 1.0 + std::log(lambda_(i));
    mean_sum += r_(i) / lambda_(i);
  }
  return 0.5 * (mult_ * trace_sum + mean_sum);
}

RenyiDualValues RenyiDualRoutes(const OutputGaussian& p,
                                const OutputGaussian& q, double alpha,
                                double b_alpha_scale) {
  if (p.dim() != q.dim()) {
    throw DimensionMismatchError("distributions have different dimensions");
  }
  if (!std::isfinite(alpha) || alpha <= 1.0) {
    throw InvalidArgumentError("order must be a finite real above 1");
  }
  if (!(b_alpha_scale > 0.0)) {
    throw InvalidArgumentError("precision-mixture scale must be positive");
  }
  if (p.dim() == 0) return {0.0, 0.0};

  const Eigen::MatrixXd k = p.CovarianceDense();
  const Eigen::MatrixXd kq = q.CovarianceDense();
  const Eigen::VectorXd d = p.mean() - q.mean();
  const int dim = p.dim();

  const Eigen::LLT<Eigen::MatrixXd> llt_k(k);
  const Eigen::LLT<Eigen::MatrixXd> llt_kq(kq);
  if (llt_k.info() != Eigen::Success || llt_kq.info() != Eigen::Success) {
    throw SupportMismatchError(
        "covariance is not positive definite; restrict both distributions "
        "to the common support first");
  }
  const auto chol_logdet = [](const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  };
  const double logdet_k = chol_logdet(llt_k);
  const double logdet_kq = chol_logdet(llt_kq);

  // Covariance-mixture route.
  const Eigen::MatrixXd sigma_mix = (1.0 - alpha) * k + alpha * kq;
  const Eigen::LLT<Eigen::MatrixXd> llt_mix(sigma_mix);
  if (llt_mix.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "covariance mixture is not positive definite at order " << alpha;
    throw AlphaInfeasibleError(msg.str());
  }
  const double logdet_mix = chol_logdet(llt_mix);
  const double mean_cov = 0.5 * alpha * d.dot(llt_mix.solve(d));
  const double cov_route =
      mean_cov - (logdet_mix - (1.0 - alpha) * logdet_k -
                  alpha * logdet_kq) /
                     (2.0 * (alpha - 1.0));

  // Precision-mixture route.
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::MatrixXd k_inv = llt_k.solve(identity);
  const Eigen::MatrixXd kq_inv = llt_kq.solve(identity);
  const Eigen::MatrixXd b_mix =
      b_alpha_scale * (alpha * k_inv + (1.0 - alpha) * kq_inv);
  const Eigen::LLT<Eigen::MatrixXd> llt_b(b_mix);
  if (llt_b.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "precision mixture is not positive definite at order " << alpha;
    throw AlphaInfeasibleError(msg.str());
  }
  const double logdet_b = chol_logdet(llt_b);
  const Eigen::VectorXd u = llt_k.solve(d);
  const Eigen::VectorXd v = llt_kq.solve(d);
  const double mean_prec = 0.5 * alpha * u.dot(llt_b.solve(v));
  const double prec_route =
      mean_prec - (logdet_b + alpha * logdet_k + (1.0 - alpha) * logdet_kq) /
                      (2.0 * (alpha - 1.0));

  return {cov_route, prec_route};
}

double RenyiExact(const OutputGaussian& p, const OutputGaussian& q,
                  double alpha) {
  const RenyiDualValues routes = RenyiDualRoutes(p, q, alpha);
  // Both routes divide log-determinant sums by alpha - 1, so rounding noise
  // in those sums is amplified without bound as alpha -> 1; the second term
  // widens the tolerance by exactly that conditioning factor.
  const double tol = kDualAgreementTol *
                         std::max({1.0, std::abs(routes.covariance_route),
                                   std::abs(routes.precision_route)}) +
                     1e-14 * p.dim() / (alpha - 1.0);
  if (std::abs(routes.covariance_route - routes.precision_route) > tol) {
    std::ostringstream msg;
    msg << "covariance-mixture and precision-mixture divergence routes "
           "disagree at order "
        << alpha << ": " << routes.covariance_route << " vs "
        << routes.precision_route;
    throw Error(ErrorCode::kCheckFailed, msg.str());
  }
  return routes.covariance_route;
}

ConversionResult DeltaBound(const OutputGaussian& p, const OutputGaussian& q,
                            double epsilon) {
  if (!std::isfinite(epsilon) || epsilon < 0.0) {
    throw InvalidArgumentError("epsilon must be a finite real >= 0");
  }
  std::optional<RenyiEvaluator> ev;
  try {
    ev.emplace(p, q);
  } catch (const SupportMismatchError&) {
    return {1.0, kNan, false};
  }
  const AlphaOptimum opt = MinimizeOverAlpha(
      [&](double a) { return (a - 1.0) * (ev->DAlpha(a) - epsilon); },
      ev->AlphaMax());
  DualCheckAt(p, q, *ev, opt.alpha);
  return {std::min(1.0, std::exp(opt.value)), opt.alpha, true};
}

ConversionResult EpsilonForDelta(const OutputGaussian& p,
                                 const OutputGaussian& q, double delta) {
  CheckDelta(delta);
  std::optional<RenyiEvaluator> ev;
  try {
    ev.emplace(p, q);
  } catch (const SupportMismatchError&) {
    return {kInf, kNan, false};
  }
  const double log_inv_delta = std::log(1.0 / delta);
  const AlphaOptimum opt = MinimizeOverAlpha(
      [&](double a) { return ev->DAlpha(a) + log_inv_delta / (a - 1.0); },
      ev->AlphaMax());
  DualCheckAt(p, q, *ev, opt.alpha);
  return {std::max(0.0, opt.value), opt.alpha, true};
}

double Theorem2ClosedForm(const FilterBounds& bounds, double lambda_min_cov,
                          double lambda_max_cov, int t, int n, double delta_s,
                          double norm_m, double alpha) {
  if (t < 1 || n < 1) {
    throw InvalidArgumentError("dimensions must be at least 1");
  }
  if (!(delta_s >= 0.0) || !(norm_m >= 0.0) || !std::isfinite(delta_s) ||
      !std::isfinite(norm_m)) {
    throw InvalidArgumentError(
        "perturbation budget and signal norm must be finite and >= 0");
  }
  if (!std::isfinite(alpha) || alpha <= 1.0) {
    throw InvalidArgumentError("order must be a finite real above 1");
  }
  const SpectralEnvelope env =
      MakeEnvelope(bounds, lambda_min_cov, lambda_max_cov);
  const double c_alpha =
      (alpha - (alpha - 1.0) * env.big_omega / env.omega) / env.big_omega;
  if (c_alpha <= 0.0) {
    std::ostringstream msg;
    msg << "order " << alpha << " is outside the certificate range (sup "
        << Theorem2AlphaMax(bounds, lambda_min_cov, lambda_max_cov) << ")";
    throw AlphaInfeasibleError(msg.str());
  }
  const double tn = static_cast<double>(t) * static_cast<double>(n);
  const double det_term =
      tn / (2.0 * (alpha - 1.0)) *
      ((alpha - 1.0) * std::log(env.big_omega) + alpha * std::log(env.omega) -
       std::log(c_alpha));
  const double push = bounds.kappa * delta_s * norm_m;
  const double mean_term = alpha * (2.0 * alpha - 1.0) * push * push /
                           (2.0 * (alpha - 1.0) * env.omega * env.omega);
  return det_term + mean_term;
}

double Theorem2AlphaMax(const FilterBounds& bounds, double lambda_min_cov,
                        double lambda_max_cov) {
  const SpectralEnvelope env =
      MakeEnvelope(bounds, lambda_min_cov, lambda_max_cov);
  if (env.big_omega <= env.omega) return kInf;
  return env.big_omega / (env.big_omega - env.omega);
}

ConversionResult Theorem2EpsilonForDelta(const FilterBounds& bounds,
                                         double lambda_min_cov,
                                         double lambda_max_cov, int t, int n,
                                         double delta_s, double norm_m,
                                         double delta) {
  CheckDelta(delta);
  const double sup = Theorem2AlphaMax(bounds, lambda_min_cov, lambda_max_cov);
  const double log_inv_delta = std::log(1.0 / delta);
  const AlphaOptimum opt = MinimizeOverAlpha(
      [&](double a) {
        return Theorem2ClosedForm(bounds, lambda_min_cov, lambda_max_cov, t,
                                  n, delta_s, norm_m, a) +
               log_inv_delta / (a - 1.0);
      },
      sup);
  return {opt.value, opt.alpha, true};
}

std::vector<double> Theorem2Violations(const FilterBounds& bounds,
                                       double lambda_min_cov,
                                       double lambda_max_cov, int t, int n,
                                       double delta_s, double norm_m,
                                       const RenyiEvaluator& exact,
                                       int grid_points) {
  if (grid_points < 2) {
    throw InvalidArgumentError("the validation grid needs at least 2 points");
  }
  const double sup = std::min(
      Theorem2AlphaMax(bounds, lambda_min_cov, lambda_max_cov),
      exact.AlphaMax());
  double hi;
  if (std::isfinite(sup)) {
    const double span = sup - 1.0;
    if (span <= 0.0) return {};
    hi = sup - std::min(kAlphaMargin, 0.5 * span);
  } else {
    hi = kAlphaCap;
  }
  const double lo = 1.0 + std::min(kAlphaMargin, 0.5 * (hi - 1.0));
  const double log_lo = std::log(lo - 1.0);
  const double log_hi = std::log(hi - 1.0);
  std::vector<double> violations;
  for (int i = 0; i < grid_points; ++i) {
    const double frac = static_cast<double>(i) / (grid_points - 1);
    const double alpha = 1.0 + std::exp(log_lo + (log_hi - log_lo) * frac);
    double closed;
    double reference;
    try {
      closed = Theorem2ClosedForm(bounds, lambda_min_cov, lambda_max_cov, t,
                                  n, delta_s, norm_m, alpha);
      reference = exact.DAlpha(alpha);
    } catch (const AlphaInfeasibleError&) {
      continue;
    }
    if (closed < reference - 1e-9 * (1.0 + std::abs(reference))) {
      violations.push_back(alpha);
    }
  }
  return violations;
}

double KernelCollapseResidual(const FilterSpec& spec, const AdjacentPair& pair,
                              const Eigen::MatrixXd& m,
                              const CovarianceModel& cov, double tol) {
  const int n = cov.n();
  const int t = cov.t();
  if (pair.base.order() != n || pair.other.order() != n) {
    throw DimensionMismatchError(
        "covariance spatial dimension does not match the graph order");
  }
  if (m.rows() != n || m.cols() != t) {
    throw DimensionMismatchError("signal matrix must be n x T");
  }
  const Eigen::MatrixXd hd =
      FilterMatrix(spec, pair.base) - FilterMatrix(spec, pair.other);
  double residual = 0.0;
  const double m_norm = m.norm();
  if (m_norm > 0.0) {
    residual = std::max(residual, (hd * m).norm() / m_norm);
  }
  if (cov.is_kron()) {
    // (I_T (x) D)(u (x) w) = u (x) D w, so only spatial directions matter
    // as long as the temporal factor is nonzero.
    if (RankOf(cov.temporal(), tol) > 0) {
      const Eigen::MatrixXd basis = ColumnSpaceBasis(cov.spatial(), tol);
      for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        residual = std::max(residual, (hd * basis.col(j)).norm());
      }
    }
  } else {
    const Eigen::MatrixXd basis = ColumnSpaceBasis(cov.ToDense(), tol);
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
      const Eigen::Map<const Eigen::MatrixXd> vmat(basis.col(j).data(), n, t);
      residual = std::max(residual, (hd * vmat).norm());
    }
  }
  return residual;
}

bool KernelCollapseCheck(const FilterSpec& spec, const AdjacentPair& pair,
                         const Eigen::MatrixXd& m, const CovarianceModel& cov,
                         double tol) {
  return KernelCollapseResidual(spec, pair, m, cov, tol) <= tol;
}

std::pair<OutputGaussian, OutputGaussian> ProjectSingular(
    const OutputGaussian& p, const OutputGaussian& q, double tol) {
  if (p.dim() != q.dim()) {
    throw DimensionMismatchError("distributions have different dimensions");
  }
  const int dim = p.dim();
  const Eigen::MatrixXd kp = p.CovarianceDense();
  const Eigen::MatrixXd kq = q.CovarianceDense();
  const Eigen::MatrixXd bp = ColumnSpaceBasis(kp, tol);
  const Eigen::MatrixXd bq = ColumnSpaceBasis(kq, tol);
  if (bp.cols() != bq.cols()) {
    std::ostringstream msg;
    msg << "covariance supports have different ranks (" << bp.cols()
        << " vs " << bq.cols() << "); no finite certificate exists";
    throw SupportMismatchError(msg.str());
  }
  const int rank = static_cast<int>(bp.cols());
  if (rank > 0 && rank < dim) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(bp.transpose() * bq);
    if (svd.singularValues().minCoeff() < 1.0 - kAngleGap) {
      throw SupportMismatchError(
          "covariance supports span different subspaces; no finite "
          "certificate exists");
    }
  }
  const Eigen::VectorXd diff = p.mean() - q.mean();
  const Eigen::VectorXd off_support =
      diff - bp * (bp.transpose() * diff);
  if (off_support.norm() > tol * (1.0 + diff.norm())) {
    throw SupportMismatchError(
        "mean difference leaves the common covariance support; no finite "
        "certificate exists");
  }
  if (rank == dim) return {p, q};
  OutputGaussian pp = OutputGaussian::Dense(bp.transpose() * p.mean(),
                                            bp.transpose() * kp * bp);
  OutputGaussian qq = OutputGaussian::Dense(bp.transpose() * q.mean(),
                                            bp.transpose() * kq * bp);
  pp.set_support(bp, p.mean() - bp * (bp.transpose() * p.mean()));
  qq.set_support(bp, q.mean() - bp * (bp.transpose() * q.mean()));
  return {std::move(pp), std::move(qq)};
}

std::string ToString(AssessmentMethod method) {
  switch (method) {
    case AssessmentMethod::kExact:
      return "exact";
    case AssessmentMethod::kClosedFormThm2:
      return "closed_form_thm2";
    case AssessmentMethod::kKernelCollapse:
      return "kernel_collapse";
    case AssessmentMethod::kSingularProjection:
      return "singular_projection";
    case AssessmentMethod::kNotAbsolutelyContinuous:
      return "not_absolutely_continuous";
  }
  return "unknown";
}

std::string PrivacyAssessment::ToJson(int indent) const {
  nlohmann::ordered_json j;
  j["epsilon"] = std::isfinite(epsilon) ? nlohmann::json(epsilon)
                                        : nlohmann::json(nullptr);
  j["delta"] = delta;
  j["alpha_star"] = std::isfinite(alpha_star) ? nlohmann::json(alpha_star)
                                              : nlohmann::json(nullptr);
  j["method"] = ::gsodp::ToString(method);
  j["edge"] = {edge_i, edge_j};
  if (bounds_used.has_value()) {
    nlohmann::ordered_json b;
    b["gamma"] = bounds_used->gamma.has_value()
                     ? nlohmann::json(*bounds_used->gamma)
                     : nlohmann::json(nullptr);
    b["Gamma"] = bounds_used->Gamma;
    b["kappa"] = bounds_used->kappa;
    b["B"] = bounds_used->B;
    b["source"] = bounds_used->source;
    j["bounds_used"] = b;
  } else {
    j["bounds_used"] = nullptr;
  }
  j["epsilon_two_sided"] = std::isfinite(epsilon_two_sided)
                               ? nlohmann::json(epsilon_two_sided)
                               : nlohmann::json(nullptr);
  return indent >= 0 ? j.dump(indent) : j.dump();
}

PrivacyAssessment AssessPair(const FilterSpec& spec, const AdjacentPair& pair,
                             const Eigen::MatrixXd& m,
                             const CovarianceModel& cov, double delta) {
  CheckDelta(delta);
  PrivacyAssessment out;
  out.delta = delta;
  out.edge_i = pair.edge_i;
  out.edge_j = pair.edge_j;

  if (KernelCollapseCheck(spec, pair, m, cov)) {
    out.epsilon = 0.0;
    out.epsilon_two_sided = 0.0;
    out.alpha_star = kNan;
    out.method = AssessmentMethod::kKernelCollapse;
    return out;
  }

  OutputGaussian p = OutputDistribution(spec, pair.base, m, cov);
  OutputGaussian q = OutputDistribution(spec, pair.other, m, cov);
  bool projected = false;
  ConversionResult pq;
  ConversionResult qp;
  ConversionResult pq_half;
  ConversionResult qp_half;
  try {
    if (p.CovarianceRank() < p.dim() || q.CovarianceRank() < q.dim()) {
      std::tie(p, q) = ProjectSingular(p, q);
      projected = true;
    }
    pq = EpsilonForDelta(p, q, delta);
    qp = EpsilonForDelta(q, p, delta);
    pq_half = EpsilonForDelta(p, q, 0.5 * delta);
    qp_half = EpsilonForDelta(q, p, 0.5 * delta);
  } catch (const SupportMismatchError&) {
    out.epsilon = kInf;
    out.epsilon_two_sided = kInf;
    out.alpha_star = kNan;
    out.method = AssessmentMethod::kNotAbsolutelyContinuous;
    return out;
  }
  if (!pq.absolutely_continuous || !qp.absolutely_continuous) {
    out.epsilon = kInf;
    out.epsilon_two_sided = kInf;
    out.alpha_star = kNan;
    out.method = AssessmentMethod::kNotAbsolutelyContinuous;
    return out;
  }
  if (pq.value >= qp.value) {
    out.epsilon = pq.value;
    out.alpha_star = pq.alpha_star;
  } else {
    out.epsilon = qp.value;
    out.alpha_star = qp.alpha_star;
  }
  out.epsilon_two_sided = std::max(pq_half.value, qp_half.value);
  out.method = projected ? AssessmentMethod::kSingularProjection
                         : AssessmentMethod::kExact;
  return out;
}

PrivacyAssessment WorstCaseAssessment(const FilterSpec& spec, const Gso& g,
                                      const Eigen::MatrixXd& m,
                                      const CovarianceModel& cov, double delta,
                                      double delta_s) {
  CheckDelta(delta);
  const std::vector<AdjacentPair> pairs = EnumerateAdjacent(g, delta_s);
  if (pairs.empty()) {
    throw InvalidArgumentError("graph has no vertex pairs to perturb");
  }
  std::vector<PrivacyAssessment> results(pairs.size());
  ParallelFor(pairs.size(), [&](std::size_t i) {
    results[i] = AssessPair(spec, pairs[i], m, cov, delta);
  });
  std::size_t worst = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].epsilon > results[worst].epsilon) worst = i;
  }
  return results[worst];
}

double GaussianKl(const OutputGaussian& p, const OutputGaussian& q) {
  if (p.dim() != q.dim()) {
    throw DimensionMismatchError("distributions have different dimensions");
  }
  if (p.dim() == 0) return 0.0;
  const Eigen::MatrixXd kp = p.CovarianceDense();
  const Eigen::MatrixXd kq = q.CovarianceDense();
  const Eigen::LLT<Eigen::MatrixXd> llt_q(kq);
  const Eigen::LLT<Eigen::MatrixXd> llt_p(kp);
  if (llt_q.info() != Eigen::Success || llt_p.info() != Eigen::Success) {
    throw SupportMismatchError(
        "covariance is not positive definite; restrict both distributions "
        "to the common support first");
  }
  const auto chol_logdet = [](const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  };
  const Eigen::VectorXd d = p.mean() - q.mean();
  const double trace = llt_q.solve(kp).trace();
  const double quad = d.dot(llt_q.solve(d));
  const double log_ratio = chol_logdet(llt_q) - chol_logdet(llt_p);
  return 0.5 * (trace - p.dim() + log_ratio + quad);
}

}  // namespace gsodp
