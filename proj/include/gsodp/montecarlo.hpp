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

#ifndef GSODP_MONTECARLO_HPP_
#define GSODP_MONTECARLO_HPP_

#include <cstdint>

#include <Eigen/Dense>

#include "gsodp/privacy.hpp"

namespace gsodp {

// Empirical tail probability of the privacy-loss event.
struct TailEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;  // sqrt(p_hat (1 - p_hat) / n_samples)
  std::int64_t n_samples = 0;
  double epsilon = 0.0;
  bool two_sided = false;
};

// Log-likelihood ratio ln(dP/dQ)(y):
//   L = 1/2 [logdet K' - logdet K
//            + (y-mu')^T (K')^{-1} (y-mu') - (y-mu)^T K^{-1} (y-mu)].
// P and Q must be full rank on a common support. y may be given either in
// the distributions' own coordinates or, when they carry a support basis,
// in the original coordinates; off-support points raise SupportMismatch.
double LogLikelihoodRatio(const Eigen::VectorXd& y, const OutputGaussian& p,
                          const OutputGaussian& q);

// Per-sample losses L(y_r) with y_r ~ P. Sample r is fully determined by
// (seed, r): draws run in fixed-size batches with counter-derived
// substreams, so the result is independent of worker partitioning.
Eigen::VectorXd SampleLosses(const OutputGaussian& p, const OutputGaussian& q,
                             int n_samples, std::uint64_t seed);

// Losses together with the squared error of each sampled release against
// the mean of P, sharing one stream of draws (mse_r = ||y_r - mu||^2 / dim).
struct ReleaseStats {
  Eigen::VectorXd losses;
  Eigen::VectorXd mse;
};
ReleaseStats SampleReleaseStats(const OutputGaussian& p,
                                const OutputGaussian& q, int n_samples,
                                std::uint64_t seed);

// Tail count over precomputed losses: Pr[L > epsilon], or Pr[|L| > epsilon]
// when two_sided.
TailEstimate TailFromLosses(const Eigen::VectorXd& losses, double epsilon,
                            bool two_sided);

// Draws n_samples releases under P and estimates the tail probability.
// Requires n_samples >= 1000 so the normal-approximation stderr is usable.
TailEstimate EstimateTail(const OutputGaussian& p, const OutputGaussian& q,
                          double epsilon, int n_samples, std::uint64_t seed,
                          bool two_sided = false);

}  // namespace gsodp

#endif  // GSODP_MONTECARLO_HPP_
