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
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gsodp/errors.hpp"
#include "gsodp/filter.hpp"
#include "gsodp/graph.hpp"

using gsodp::CertifiedFilterBounds;
using gsodp::ColumnSpaceBasis;
using gsodp::EmpiricalInstanceBounds;
using gsodp::EnumerateAdjacent;
using gsodp::FilterBounds;
using gsodp::FilterMatrix;
using gsodp::FilterSpec;
using gsodp::GenerateErdosRenyi;
using gsodp::Gso;
using gsodp::SpectralNorm;

namespace {

double MinSingularValue(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues().minCoeff();
}

}  // namespace

TEST_CASE("filter matrix closed forms") {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 3);
  CHECK(FilterMatrix(FilterSpec::Diffusion(0.01), zero)
            .isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-14));
  CHECK(FilterMatrix(FilterSpec::Polynomial({1.0}), zero)
            .isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-14));

  Eigen::MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  Eigen::MatrixXd expected(2, 2);
  expected << 1, 0.01, 0.01, 1;
  expected /= 1.0 - 1e-4;
  CHECK(FilterMatrix(FilterSpec::Diffusion(0.01), swap)
            .isApprox(expected, 1e-12));
}

TEST_CASE("polynomial filter equals horner-free power sum") {
  const Gso g = GenerateErdosRenyi(5, 0.6, 21);
  const std::vector<double> h{0.3, -1.2, 0.05, 2.0};
  const Eigen::MatrixXd got = FilterMatrix(FilterSpec::Polynomial(h), g);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(5, 5);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(5, 5);
  for (const double coeff : h) {
    expected += coeff * power;
    power = power * g.matrix();
  }
  CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("diffusion filter inverts its resolvent") {
  const Gso g = GenerateErdosRenyi(6, 0.5, 8);
  const double c = 0.05;
  const Eigen::MatrixXd h = FilterMatrix(FilterSpec::Diffusion(c), g);
  const Eigen::MatrixXd lhs =
      (Eigen::MatrixXd::Identity(6, 6) - c * g.matrix()) * h;
  CHECK(lhs.isApprox(Eigen::MatrixXd::Identity(6, 6), 1e-8));
}

TEST_CASE("diffusion rejects singular and ill-conditioned resolvents") {
  Eigen::MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  // c * ||S|| = 1 makes I - cS singular.
  CHECK_THROWS_AS(FilterMatrix(FilterSpec::Diffusion(1.0), swap),
                  gsodp::NotInvertibleError);
}

TEST_CASE("certified diffusion bounds match stated closed forms") {
  const double c = 0.01;
  const double b = 6.0;
  const FilterBounds bounds = CertifiedFilterBounds(FilterSpec::Diffusion(c), b);
  CHECK(bounds.Gamma == doctest::Approx(1.0 / 0.94).epsilon(1e-12));
  CHECK(bounds.gamma_or_throw() == doctest::Approx(1.0 / 1.06).epsilon(1e-12));
  CHECK(bounds.kappa == doctest::Approx(0.01 / (0.94 * 0.94)).epsilon(1e-12));
  CHECK(bounds.B == doctest::Approx(6.0));
  CHECK(bounds.source == "certified");

  const FilterBounds empty = CertifiedFilterBounds(FilterSpec::Diffusion(c), 0.0);
  CHECK(empty.Gamma == doctest::Approx(1.0));
  CHECK(empty.gamma_or_throw() == doctest::Approx(1.0));
  CHECK(empty.kappa == doctest::Approx(c));
}

TEST_CASE("certified polynomial bounds") {
  const FilterBounds bounds =
      CertifiedFilterBounds(FilterSpec::Polynomial({0.0, 1.0}), 3.0);
  CHECK(bounds.Gamma == doctest::Approx(3.0));
  CHECK(bounds.kappa == doctest::Approx(1.0));
  // Identity-in-S has sigma_min 0 over the class (S = 0 is admissible).
  CHECK(!bounds.gamma.has_value());
  CHECK_THROWS_AS(bounds.gamma_or_throw(), gsodp::NoUniformLowerBoundError);
}

TEST_CASE("certified class bounds dominate instance values") {
  const FilterSpec spec = FilterSpec::Diffusion(0.01);
  for (int s = 0; s < 100; ++s) {
    const Gso g = GenerateErdosRenyi(7, 0.5, 500 + s);
    const double b = std::max(SpectralNorm(g.matrix()), 1e-9);
    const FilterBounds cls = CertifiedFilterBounds(spec, b);
    const Eigen::MatrixXd h = FilterMatrix(spec, g);
    CHECK(SpectralNorm(h) <= cls.Gamma + 1e-10);
    CHECK(MinSingularValue(h) >= cls.gamma_or_throw() - 1e-10);
  }
}

TEST_CASE("empirical bounds tighten certified bounds on a 7-vertex graph") {
  const FilterSpec spec = FilterSpec::Diffusion(0.01);
  const Gso g = GenerateErdosRenyi(7, 0.5, 40);
  const auto pairs = EnumerateAdjacent(g, 1.0);
  const FilterBounds emp = EmpiricalInstanceBounds(spec, pairs);
  CHECK(emp.source == "empirical");
  CHECK(emp.gamma_or_throw() >= 1.0 / 1.06 - 1e-10);
  CHECK(emp.Gamma <= 1.0 / 0.94 + 1e-10);
  CHECK(emp.gamma_or_throw() <= emp.Gamma);

  double b_max = 0.0;
  for (const auto& pair : pairs) {
    b_max = std::max({b_max, SpectralNorm(pair.base.matrix()),
                      SpectralNorm(pair.other.matrix())});
  }
  const FilterBounds cls = CertifiedFilterBounds(spec, b_max);
  CHECK(emp.kappa <= cls.kappa + 1e-10);

  // Lipschitz property on every enumerated pair.
  for (const auto& pair : pairs) {
    const Eigen::MatrixXd hd = FilterMatrix(spec, pair.base) -
                               FilterMatrix(spec, pair.other);
    CHECK(SpectralNorm(hd) <= emp.kappa * pair.delta_s + 1e-10);
  }
}

TEST_CASE("empirical bounds on the identity-in-S polynomial") {
  const Gso g = GenerateErdosRenyi(5, 0.5, 3);
  const auto pairs = EnumerateAdjacent(g, 1.0);
  const FilterBounds emp =
      EmpiricalInstanceBounds(FilterSpec::Polynomial({0.0, 1.0}), pairs);
  // H(S) - H(S') = S - S' and ||S - S'|| = delta_s by construction.
  CHECK(emp.kappa == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("empirical bounds of the zero shift") {
  const Gso zero = Gso(Eigen::MatrixXd::Zero(3, 3));
  std::vector<gsodp::AdjacentPair> single{{zero, zero, 0, 1, 1.0}};
  const FilterBounds emp =
      EmpiricalInstanceBounds(FilterSpec::Diffusion(0.3), single);
  CHECK(emp.gamma_or_throw() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(emp.Gamma == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("column space basis ranks") {
  const Eigen::MatrixXd full = ColumnSpaceBasis(Eigen::MatrixXd::Identity(3, 3));
  CHECK(full.cols() == 3);
  CHECK((full.transpose() * full)
            .isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-12));

  CHECK(ColumnSpaceBasis(Eigen::MatrixXd::Zero(4, 4)).cols() == 0);

  Eigen::VectorXd u(3);
  u << 1, -2, 2;
  Eigen::VectorXd v(3);
  v << 3, 0, 1;
  const Eigen::MatrixXd basis = ColumnSpaceBasis(u * v.transpose());
  REQUIRE(basis.cols() == 1);
  const double align = std::abs(basis.col(0).dot(u.normalized()));
  CHECK(align == doctest::Approx(1.0).epsilon(1e-12));
}
