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

#ifndef GSODP_EXPERIMENT_HPP_
#define GSODP_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsodp/filter.hpp"
#include "gsodp/graph.hpp"
#include "gsodp/mechanism.hpp"

namespace gsodp {

inline constexpr const char* kLibraryVersion = "0.1.0";

// Graph source: either an Erdos-Renyi draw or an edge-list file.
struct GraphConfig {
  bool from_file = false;
  std::string edge_list_path;
  int n = 7;
  double p = 0.5;
  std::uint64_t seed = 1;
};

// Mean signal M: synthetic Gaussian entries or a CSV file. A non-empty
// support restricts the synthetic signal to those vertex rows.
struct MeanConfig {
  bool from_file = false;
  std::string path;
  double scale = 1.0;
  std::uint64_t seed = 2;
  std::vector<int> support;
};

// AR(1)-Kronecker input covariance sigma^2 rho^|i-j| (x) P over a grid of
// noise scales. P is the identity unless spatial_support selects a subset
// of vertices, in which case P projects onto those coordinates.
struct CovarianceConfig {
  std::vector<double> sigma_grid;
  double rho = 0.5;
  int t = 20;
  std::vector<int> spatial_support;
  bool has_spatial_support = false;
};

struct PrivacyConfig {
  double delta = 1e-5;
  double delta_u = 1.0;
  double delta_s = 1.0;
};

struct McConfig {
  int samples = 100000;
  std::uint64_t seed = 3;
};

// Parsed and validated experiment description. Defaults mirror the
// 7-vertex diffusion study: n=7, p=0.5, T=20, Diffusion(0.01), rho=0.5,
// delta=1e-5, delta_u=1, sigma log-grid 1e-2..1e1.
struct ExperimentConfig {
  GraphConfig graph;
  FilterSpec filter = FilterSpec::Diffusion(0.01);
  CovarianceConfig covariance;
  MeanConfig mean;
  PrivacyConfig privacy;
  McConfig mc;
  std::string output_dir = "out";

  // Throws ConfigError with field-path diagnostics on invalid input.
  static ExperimentConfig FromJsonString(const std::string& text,
                                         const std::string& origin);
  static ExperimentConfig FromJsonFile(const std::string& path);

  // Full configuration with defaults filled in, for run provenance.
  std::string ResolvedJson(int indent = 2) const;

  Gso MakeGraph() const;
  Eigen::MatrixXd MakeMean(int n) const;
  CovarianceModel MakeCovariance(double sigma, int n) const;
};

// Default 13-point noise grid, logarithmic over 1e-2..1e1.
std::vector<double> DefaultSigmaGrid();

// One noise-sweep experiment: for every sigma, the worst-case exact
// certificate, the spectral closed form with its validity flag, the
// input-mechanism epsilon, and Monte Carlo MSE/tail statistics. Writes
// <out_dir>/sweep.csv and <out_dir>/run_meta.json; returns the CSV path.
// Per-sigma failures are recorded in the row's note column and the run
// continues.
std::string RunSweep(const ExperimentConfig& config,
                     const std::string& out_dir);

// Bound-vs-simulation audit on the first grid sigma: for every adjacent
// pair and epsilon, the analytic tail bound against the Monte Carlo
// estimate, flagging violations beyond 3 standard errors, plus every
// closed-form invalidity. Writes <out_dir>/audit.json; returns its path.
// An empty epsilon list derives a 10-point grid around the worst-case
// certificate.
std::string RunAudit(const ExperimentConfig& config,
                     const std::vector<double>& epsilon_grid,
                     const std::string& out_dir);

// Certificate for a single vertex pair (i, j) on the first grid sigma,
// returned as a JSON document.
std::string RunBound(const ExperimentConfig& config, int edge_i, int edge_j);

}  // namespace gsodp

#endif  // GSODP_EXPERIMENT_HPP_
