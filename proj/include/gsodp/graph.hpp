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

#ifndef GSODP_GRAPH_HPP_
#define GSODP_GRAPH_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gsodp {

// Graph shift operator of an undirected graph without self-loops: a
// symmetric, hollow, finite real matrix.
class Gso {
 public:
  // Validates symmetry, zero diagonal and finiteness.
  explicit Gso(Eigen::MatrixXd shift);

  int order() const { return static_cast<int>(shift_.rows()); }
  const Eigen::MatrixXd& matrix() const { return shift_; }
  double weight(int i, int j) const { return shift_(i, j); }

  // Returns the copy with the (i, j) edge weight replaced by `weight`
  // (symmetrically).
  Gso WithEdge(int i, int j, double weight) const;

 private:
  Eigen::MatrixXd shift_;
};

// A pair of shift operators differing in exactly one edge, together with
// the spectral-norm budget of the change.
struct AdjacentPair {
  Gso base;
  Gso other;
  int edge_i = 0;
  int edge_j = 0;
  double delta_s = 0.0;
};

// Largest singular value of a general real matrix.
double SpectralNorm(const Eigen::MatrixXd& m);

// Unweighted Erdos-Renyi graph: each unordered vertex pair is an edge
// independently with probability p. Deterministic in the seed; the draw
// order is row-major over pairs (i < j).
Gso GenerateErdosRenyi(int n, double p, std::uint64_t seed);

// All single-edge toggles of g. Each absent edge is added with weight
// delta_s and each present edge is removed, so every returned pair
// satisfies ||S - S'||_2 = delta_s exactly. Pairs are ordered by (i, j).
std::vector<AdjacentPair> EnumerateAdjacent(const Gso& g, double delta_s = 1.0);

// Combinatorial graph Laplacian D - S. The result has a nonzero diagonal
// and is returned as a plain matrix; a single-edge toggle changes it by
// spectral norm 2 * weight, so callers using it as a shift operator must
// budget delta_s accordingly.
Eigen::MatrixXd LaplacianMatrix(const Gso& g);

// Plain-text edge list I/O. Format: a header line "n=<count>" followed by
// one "i j weight" triple per line, 0-indexed, i < j.
Gso LoadEdgeList(const std::string& path);
void SaveEdgeList(const Gso& g, const std::string& path);

}  // namespace gsodp

#endif  // GSODP_GRAPH_HPP_
