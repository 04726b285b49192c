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

#ifndef GSODP_PRIVACY_HPP_
#define GSODP_PRIVACY_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gsodp/filter.hpp"
#include "gsodp/graph.hpp"
#include "gsodp/mechanism.hpp"

namespace gsodp {

// Gaussian distribution of the vec-stacked release vec(Y~) = H_S vec(U~),
// with H_S = I_T (x) H(S). The covariance is stored either densely or in
// the Kronecker layout K = Sigma_T (x) W (with W = H P H^T when the input
// covariance is Sigma_T (x) P), which keeps the heavy linear algebra at
// the n x n and T x T scale.
class OutputGaussian {
 public:
  static OutputGaussian Dense(Eigen::VectorXd mu, Eigen::MatrixXd k);
  static OutputGaussian Kron(Eigen::VectorXd mu, Eigen::MatrixXd sigma_t,
                             Eigen::MatrixXd w);

  int dim() const { return static_cast<int>(mu_.size()); }
  const Eigen::VectorXd& mean() const { return mu_; }
  bool is_kron() const { return kron_; }

  // Kron layout only.
  const Eigen::MatrixXd& temporal() const;
  const Eigen::MatrixXd& spatial() const;

  Eigen::MatrixXd CovarianceDense() const;

  // log det of the covariance; factor-wise for the Kron layout. Throws
  // SingularCovarianceError when rank-deficient.
  double LogDetCovariance() const;

  // Rank of the covariance at relative tolerance tol.
  int CovarianceRank(double tol = 1e-10) const;

  // Orthonormal basis of the support in the original coordinates and the
  // deterministic off-support component of the original mean, both recorded
  // by ProjectSingular.
  const std::optional<Eigen::MatrixXd>& support() const { return support_; }
  const Eigen::VectorXd& support_offset() const { return support_offset_; }
  void set_support(Eigen::MatrixXd q, Eigen::VectorXd offset) {
    support_ = std::move(q);
    support_offset_ = std::move(offset);
  }

 private:
  OutputGaussian() = default;
  bool kron_ = false;
  Eigen::VectorXd mu_;
  Eigen::MatrixXd dense_;
  Eigen::MatrixXd temporal_;  // T x T
  Eigen::MatrixXd w_;         // n x n
  std::optional<Eigen::MatrixXd> support_;
  Eigen::VectorXd support_offset_;
};

// Distribution of the release under shift operator g: mean vec(H(S) M) and
// covariance H_S Sigma_Tn H_S^T. Keeps the Kronecker layout whenever the
// input covariance has one.
OutputGaussian OutputDistribution(const FilterSpec& spec, const Gso& g,
                                  const Eigen::MatrixXd& m,
                                  const CovarianceModel& cov);

// Renyi divergence evaluator for a fixed ordered pair (P, Q), reduced once
// to the eigenvalues of the covariance pencil so that evaluation per alpha
// is linear in the dimension. Both distributions must be full rank
// (project first otherwise; construction throws SupportMismatchError).
class RenyiEvaluator {
 public:
  RenyiEvaluator(const OutputGaussian& p, const OutputGaussian& q,
                 bool force_dense = false);

  // Supremum of the feasible alpha range (exclusive); +inf when the
  // covariance mixture stays positive definite for every alpha > 1.
  double AlphaMax() const { return alpha_max_; }

  // D_alpha(P || Q) for alpha in (1, AlphaMax()).
  double DAlpha(double alpha) const;

  // KL(P || Q), the alpha -> 1 limit.
  double Kl() const;

  bool structured() const { return structured_; }
  int dim() const { return dim_; }

 private:
  Eigen::VectorXd lambda_;  // pencil eigenvalues of (K_Q, K_P)
  Eigen::VectorXd r_;       // squared mean difference in pencil coordinates
  double mult_ = 1.0;       // log-term multiplicity (T in the Kron layout)
  double alpha_max_ = 0.0;
  bool structured_ = false;
  int dim_ = 0;
};

// Both closed-form routes to the Gaussian Renyi divergence at one alpha:
//   covariance mixture  Sigma_alpha = (1-alpha) K + alpha K'
//   precision mixture   B_alpha = alpha K^{-1} + (1-alpha) (K')^{-1}
// The two are algebraically identical and must agree numerically;
// b_alpha_scale != 1 perturbs the precision route and exists only so the
// self-check machinery can prove it would catch a broken formula.
struct RenyiDualValues {
  double covariance_route = 0.0;
  double precision_route = 0.0;
};
RenyiDualValues RenyiDualRoutes(const OutputGaussian& p,
                                const OutputGaussian& q, double alpha,
                                double b_alpha_scale = 1.0);

// Order-alpha Renyi divergence computed by both routes above; throws if
// they disagree beyond 1e-8 and returns the covariance-mixture value.
double RenyiExact(const OutputGaussian& p, const OutputGaussian& q,
                  double alpha);

struct ConversionResult {
  double value = 0.0;       // delta or epsilon
  double alpha_star = 0.0;  // optimizing order
  bool absolutely_continuous = true;
};

// Smallest Chernoff bound on Pr[L > epsilon]:
//   delta = min(1, inf_{alpha > 1} exp{(alpha-1)(D_alpha - epsilon)}).
// Support mismatch is reported as delta = 1 with
// absolutely_continuous = false.
ConversionResult DeltaBound(const OutputGaussian& p, const OutputGaussian& q,
                            double epsilon);

// Smallest epsilon such that the release is (epsilon, delta)-DP for the
// ordered pair: inf_{alpha > 1} [D_alpha + ln(1/delta) / (alpha - 1)].
ConversionResult EpsilonForDelta(const OutputGaussian& p,
                                 const OutputGaussian& q, double delta);

// Spectral-bound divergence certificate. omega = gamma^2 lambda_min(cov),
// Omega = Gamma^2 lambda_max(cov); alpha is feasible while
// C_alpha = Omega^{-1} (alpha - (alpha-1) Omega/omega) stays positive:
//   D_alpha = Tn/(2(alpha-1)) * ln[Omega^{alpha-1} / (C_alpha omega^{-alpha})]
//           + alpha(2alpha-1) (kappa delta_s ||M||)^2 / (2(alpha-1) omega^2).
// The formula is evaluated verbatim; it is a certificate candidate that
// callers must validate against the exact divergence (see
// Theorem2Violations), never a trusted bound.
double Theorem2ClosedForm(const FilterBounds& bounds, double lambda_min_cov,
                          double lambda_max_cov, int t, int n, double delta_s,
                          double norm_m, double alpha);

// Upper end of the closed form's feasible alpha range.
double Theorem2AlphaMax(const FilterBounds& bounds, double lambda_min_cov,
                        double lambda_max_cov);

// (epsilon, delta) conversion of the closed form, optimized over alpha.
ConversionResult Theorem2EpsilonForDelta(const FilterBounds& bounds,
                                         double lambda_min_cov,
                                         double lambda_max_cov, int t, int n,
                                         double delta_s, double norm_m,
                                         double delta);

// Checks closed form >= exact divergence on a log grid over the closed
// form's feasible range. Returns the alphas where the certificate fails.
std::vector<double> Theorem2Violations(const FilterBounds& bounds,
                                       double lambda_min_cov,
                                       double lambda_max_cov, int t, int n,
                                       double delta_s, double norm_m,
                                       const RenyiEvaluator& exact,
                                       int grid_points = 32);

// Largest response of H(S) - H(S') over unit directions spanning
// range(Sigma_Tn) together with the direction of vec(M); 0 means the two
// adjacent releases are identical distributions.
double KernelCollapseResidual(const FilterSpec& spec, const AdjacentPair& pair,
                              const Eigen::MatrixXd& m,
                              const CovarianceModel& cov, double tol = 1e-10);

// True when both the range of the input covariance and vec(M) lie in the
// kernel of H_S - H_S' (residual above at most tol), in which case the two
// releases are identical and epsilon = 0 for any delta > 0.
bool KernelCollapseCheck(const FilterSpec& spec, const AdjacentPair& pair,
                         const Eigen::MatrixXd& m, const CovarianceModel& cov,
                         double tol = 1e-10);

// Restricts degenerate release distributions to their common support
// basis. Throws SupportMismatchError when the supports differ (including
// mean offsets off the support); the releases are then not mutually
// absolutely continuous and no finite epsilon exists.
std::pair<OutputGaussian, OutputGaussian> ProjectSingular(
    const OutputGaussian& p, const OutputGaussian& q, double tol = 1e-10);

enum class AssessmentMethod {
  kExact,
  kClosedFormThm2,
  kKernelCollapse,
  kSingularProjection,
  kNotAbsolutelyContinuous,
};

std::string ToString(AssessmentMethod method);

// (epsilon, delta) certificate for a release w.r.t. the shift operator.
struct PrivacyAssessment {
  double epsilon = 0.0;  // +inf when not absolutely continuous
  double delta = 0.0;
  double alpha_star = 0.0;
  AssessmentMethod method = AssessmentMethod::kExact;
  std::optional<FilterBounds> bounds_used;
  int edge_i = -1;
  int edge_j = -1;
  // Two-sided figure: both orderings certified at delta/2 each, combined
  // by a union bound.
  double epsilon_two_sided = 0.0;

  std::string ToJson(int indent = -1) const;
};

// Worst case over every enumerated adjacent pair and both orderings of
// EpsilonForDelta; ties broken toward the lexicographically smallest edge.
PrivacyAssessment WorstCaseAssessment(const FilterSpec& spec, const Gso& g,
                                      const Eigen::MatrixXd& m,
                                      const CovarianceModel& cov, double delta,
                                      double delta_s = 1.0);

// Assessment of a single adjacent pair (both orderings).
PrivacyAssessment AssessPair(const FilterSpec& spec, const AdjacentPair& pair,
                             const Eigen::MatrixXd& m,
                             const CovarianceModel& cov, double delta);

// Gaussian KL divergence through its own closed form; used as the
// independent reference for the alpha -> 1 limit.
double GaussianKl(const OutputGaussian& p, const OutputGaussian& q);

}  // namespace gsodp

#endif  // GSODP_PRIVACY_HPP_
