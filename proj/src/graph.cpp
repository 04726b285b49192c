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

#include "gsodp/graph.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/SVD>

#include "gsodp/errors.hpp"
#include "gsodp/rng.hpp"

namespace gsodp {

namespace {

std::string FormatDouble(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Gso::Gso(Eigen::MatrixXd shift) : shift_(std::move(shift)) {
  if (shift_.rows() != shift_.cols() || shift_.rows() < 1) {
    throw InvalidArgumentError("shift operator must be square and non-empty");
  }
  const int n = static_cast<int>(shift_.rows());
  for (int i = 0; i < n; ++i) {
    if (shift_(i, i) != 0.0) {
      throw InvalidArgumentError("shift operator must have a zero diagonal");
    }
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(shift_(i, j))) {
        throw InvalidArgumentError("shift operator entries must be finite");
      }
      if (shift_(i, j) != shift_(j, i)) {
        throw InvalidArgumentError("shift operator must be symmetric");
      }
    }
  }
}

Gso Gso::WithEdge(int i, int j, double weight) const {
  const int n = order();
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
    throw InvalidArgumentError("edge endpoints out of range or equal");
  }
  Eigen::MatrixXd s = shift_;
  s(i, j) = weight;
  s(j, i) = weight;
  return Gso(std::move(s));
}

double SpectralNorm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  if (!m.allFinite()) {
    throw InvalidArgumentError("spectral norm of a non-finite matrix");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

Gso GenerateErdosRenyi(int n, double p, std::uint64_t seed) {
  if (n < 1) throw InvalidArgumentError("vertex count must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgumentError("edge probability must lie in [0, 1]");
  }
  Rng rng(seed);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.Uniform() < p) {
        s(i, j) = 1.0;
        s(j, i) = 1.0;
      }
    }
  }
  return Gso(std::move(s));
}

std::vector<AdjacentPair> EnumerateAdjacent(const Gso& g, double delta_s) {
  if (!(delta_s > 0.0)) throw InvalidArgumentError("delta_s must be positive");
  const int n = g.order();
  std::vector<AdjacentPair> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double w = g.weight(i, j);
      // Toggle: add the edge with weight delta_s if absent, remove it if
      // present. Either way S - S' is a symmetric single-edge perturbation
      // with spectral norm equal to the toggled weight.
      const double toggled = (w == 0.0) ? delta_s : 0.0;
      const double budget = (w == 0.0) ? delta_s : std::abs(w);
      pairs.push_back(AdjacentPair{g, g.WithEdge(i, j, toggled), i, j, budget});
    }
  }
  return pairs;
}

Eigen::MatrixXd LaplacianMatrix(const Gso& g) {
  const Eigen::MatrixXd& s = g.matrix();
  Eigen::MatrixXd lap = -s;
  lap.diagonal() = s.rowwise().sum();
  return lap;
}

Gso LoadEdgeList(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty edge list: " + path);
  if (line.rfind("n=", 0) != 0) {
    throw IoError("edge list must start with an \"n=<count>\" header: " + path);
  }
  int n = 0;
  try {
    n = std::stoi(line.substr(2));
  } catch (const std::exception&) {
    throw IoError("bad vertex count in edge list header: " + line);
  }
  if (n < 1) throw IoError("vertex count must be >= 1: " + path);

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    int i = 0, j = 0;
    double w = 0.0;
    if (!(fields >> i >> j >> w)) {
      throw IoError("bad edge at " + path + ":" + std::to_string(line_no));
    }
    if (i < 0 || j < 0 || i >= n || j >= n || i == j || !std::isfinite(w)) {
      throw IoError("invalid edge entry at " + path + ":" +
                    std::to_string(line_no));
    }
    if (s(i, j) != 0.0) {
      throw IoError("duplicate edge at " + path + ":" + std::to_string(line_no));
    }
    s(i, j) = w;
    s(j, i) = w;
  }
  return Gso(std::move(s));
}

void SaveEdgeList(const Gso& g, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write edge list: " + path);
  const int n = g.order();
  out << "n=" << n << "\n";
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double w = g.weight(i, j);
      if (w != 0.0) {
        out << i << " " << j << " " << FormatDouble(w) << "\n";
      }
    }
  }
  if (!out) throw IoError("failed while writing edge list: " + path);
}

}  // namespace gsodp
