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

#include "gsodp/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "gsodp/errors.hpp"
#include "gsodp/montecarlo.hpp"
#include "gsodp/parallel.hpp"
#include "gsodp/privacy.hpp"
#include "gsodp/rng.hpp"

namespace gsodp {
namespace {

using nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Analytic deltas below this multiple of 1/samples cannot be resolved by
// counting tail events.
constexpr double kMcResolutionFactor = 10.0;

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// CSV-safe free text: no commas, quotes or line breaks.
std::string SanitizeNote(const std::string& text) {
  std::string out = text;
  for (char& c : out) {
    if (c == ',') c = ';';
    if (c == '"') c = '\'';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

[[noreturn]] void FailField(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void CheckKeys(const ordered_json& obj, const std::string& path,
               const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (allowed.count(item.key()) == 0) {
      FailField(path.empty() ? item.key() : path + "." + item.key(),
                "unknown field");
    }
  }
}

const ordered_json& Require(const ordered_json& obj, const std::string& path,
                            const std::string& key) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    FailField(path.empty() ? key : path + "." + key, "required field missing");
  }
  return *it;
}

double AsDouble(const ordered_json& v, const std::string& path) {
  if (!v.is_number()) FailField(path, "expected a number");
  return v.get<double>();
}

int AsInt(const ordered_json& v, const std::string& path) {
  if (!v.is_number_integer()) FailField(path, "expected an integer");
  return v.get<int>();
}

std::uint64_t AsSeed(const ordered_json& v, const std::string& path) {
  if (!v.is_number_integer()) FailField(path, "expected an integer seed");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const auto s = v.get<std::int64_t>();
  if (s < 0) FailField(path, "seed must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

std::string AsString(const ordered_json& v, const std::string& path) {
  if (!v.is_string()) FailField(path, "expected a string");
  return v.get<std::string>();
}

std::vector<int> AsIndexList(const ordered_json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) FailField(path, "expected a nonempty array");
  std::vector<int> out;
  std::set<int> seen;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string item = path + "[" + std::to_string(k) + "]";
    const int idx = AsInt(v[k], item);
    if (idx < 0) FailField(item, "index must be nonnegative");
    if (!seen.insert(idx).second) FailField(item, "duplicate index");
    out.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void ParseGraph(const ordered_json& obj, GraphConfig* g) {
  CheckKeys(obj, "graph", {"edge_list", "n", "p", "seed"});
  if (obj.contains("edge_list")) {
    if (obj.contains("n") || obj.contains("p") || obj.contains("seed")) {
      FailField("graph", "edge_list excludes n, p and seed");
    }
    g->from_file = true;
    g->edge_list_path = AsString(obj["edge_list"], "graph.edge_list");
    return;
  }
  if (obj.contains("n")) g->n = AsInt(obj["n"], "graph.n");
  if (g->n < 2) FailField("graph.n", "need at least two vertices");
  if (obj.contains("p")) g->p = AsDouble(obj["p"], "graph.p");
  if (!(g->p >= 0.0 && g->p <= 1.0)) FailField("graph.p", "must be in [0, 1]");
  if (obj.contains("seed")) g->seed = AsSeed(obj["seed"], "graph.seed");
}

FilterSpec ParseFilter(const ordered_json& obj) {
  CheckKeys(obj, "filter", {"type", "c", "h"});
  const std::string type = AsString(Require(obj, "filter", "type"), "filter.type");
  if (type == "diffusion") {
    if (obj.contains("h")) FailField("filter.h", "not a diffusion field");
    double c = 0.01;
    if (obj.contains("c")) c = AsDouble(obj["c"], "filter.c");
    if (!(c > 0.0) || !std::isfinite(c)) {
      FailField("filter.c", "must be a positive real");
    }
    return FilterSpec::Diffusion(c);
  }
  if (type == "polynomial") {
    if (obj.contains("c")) FailField("filter.c", "not a polynomial field");
    const auto& h = Require(obj, "filter", "h");
    if (!h.is_array() || h.empty()) {
      FailField("filter.h", "expected a nonempty coefficient array");
    }
    std::vector<double> coeffs;
    for (std::size_t k = 0; k < h.size(); ++k) {
      const std::string item = "filter.h[" + std::to_string(k) + "]";
      const double v = AsDouble(h[k], item);
      if (!std::isfinite(v)) FailField(item, "must be finite");
      coeffs.push_back(v);
    }
    return FilterSpec::Polynomial(std::move(coeffs));
  }
  FailField("filter.type", "expected \"diffusion\" or \"polynomial\"");
}

void ParseCovariance(const ordered_json& obj, CovarianceConfig* c) {
  CheckKeys(obj, "covariance",
            {"type", "sigma", "sigma_grid", "rho", "t", "spatial_support"});
  const std::string type =
      AsString(Require(obj, "covariance", "type"), "covariance.type");
  if (type != "ar1_kron") {
    FailField("covariance.type", "expected \"ar1_kron\"");
  }
  if (obj.contains("sigma") && obj.contains("sigma_grid")) {
    FailField("covariance", "give either sigma or sigma_grid, not both");
  }
  if (obj.contains("sigma")) {
    c->sigma_grid = {AsDouble(obj["sigma"], "covariance.sigma")};
  } else if (obj.contains("sigma_grid")) {
    const auto& grid = obj["sigma_grid"];
    if (!grid.is_array() || grid.empty()) {
      FailField("covariance.sigma_grid", "expected a nonempty array");
    }
    c->sigma_grid.clear();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const std::string item = "covariance.sigma_grid[" + std::to_string(k) + "]";
      c->sigma_grid.push_back(AsDouble(grid[k], item));
    }
  } else {
    c->sigma_grid = DefaultSigmaGrid();
  }
  for (std::size_t k = 0; k < c->sigma_grid.size(); ++k) {
    const std::string item = "covariance.sigma_grid[" + std::to_string(k) + "]";
    const double s = c->sigma_grid[k];
    if (!(s > 0.0) || !std::isfinite(s)) FailField(item, "must be positive");
    if (k > 0 && s <= c->sigma_grid[k - 1]) {
      FailField(item, "grid must be strictly increasing");
    }
  }
  if (obj.contains("rho")) c->rho = AsDouble(obj["rho"], "covariance.rho");
  if (!(std::abs(c->rho) < 1.0)) {
    FailField("covariance.rho", "must satisfy |rho| < 1");
  }
  if (obj.contains("t")) c->t = AsInt(obj["t"], "covariance.t");
  if (c->t < 1) FailField("covariance.t", "need at least one time step");
  if (obj.contains("spatial_support")) {
    c->spatial_support =
        AsIndexList(obj["spatial_support"], "covariance.spatial_support");
    c->has_spatial_support = true;
  }
}

void ParseMean(const ordered_json& obj, MeanConfig* m) {
  CheckKeys(obj, "mean", {"type", "path", "scale", "seed", "support"});
  if (obj.contains("type") &&
      AsString(obj["type"], "mean.type") != "gaussian") {
    FailField("mean.type", "expected \"gaussian\" (or give a csv path)");
  }
  if (obj.contains("path")) {
    if (obj.contains("type") || obj.contains("scale") || obj.contains("seed")) {
      FailField("mean", "path excludes type, scale and seed");
    }
    m->from_file = true;
    m->path = AsString(obj["path"], "mean.path");
  } else {
    if (obj.contains("scale")) m->scale = AsDouble(obj["scale"], "mean.scale");
    if (!std::isfinite(m->scale) || m->scale < 0.0) {
      FailField("mean.scale", "must be a finite nonnegative real");
    }
    if (obj.contains("seed")) m->seed = AsSeed(obj["seed"], "mean.seed");
  }
  if (obj.contains("support")) {
    m->support = AsIndexList(obj["support"], "mean.support");
  }
}

void ParsePrivacy(const ordered_json& obj, PrivacyConfig* p) {
  CheckKeys(obj, "privacy", {"delta", "delta_u", "delta_s"});
  if (obj.contains("delta")) p->delta = AsDouble(obj["delta"], "privacy.delta");
  if (!(p->delta > 0.0 && p->delta < 1.0)) {
    FailField("privacy.delta", "must be in (0, 1)");
  }
  if (obj.contains("delta_u")) {
    p->delta_u = AsDouble(obj["delta_u"], "privacy.delta_u");
  }
  if (!(p->delta_u > 0.0) || !std::isfinite(p->delta_u)) {
    FailField("privacy.delta_u", "must be a positive real");
  }
  if (obj.contains("delta_s")) {
    p->delta_s = AsDouble(obj["delta_s"], "privacy.delta_s");
  }
  if (!(p->delta_s > 0.0) || !std::isfinite(p->delta_s)) {
    FailField("privacy.delta_s", "must be a positive real");
  }
}

void ParseMc(const ordered_json& obj, McConfig* m) {
  CheckKeys(obj, "mc", {"samples", "seed"});
  if (obj.contains("samples")) m->samples = AsInt(obj["samples"], "mc.samples");
  if (m->samples < 1000) {
    FailField("mc.samples", "need at least 1000 samples");
  }
  if (obj.contains("seed")) m->seed = AsSeed(obj["seed"], "mc.seed");
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::string EdgeLabel(int i, int j) {
  return std::to_string(i) + "-" + std::to_string(j);
}

ordered_json ResolvedConfigJson(const ExperimentConfig& cfg) {
  ordered_json j;
  ordered_json graph;
  if (cfg.graph.from_file) {
    graph["edge_list"] = cfg.graph.edge_list_path;
  } else {
    graph["n"] = cfg.graph.n;
    graph["p"] = cfg.graph.p;
    graph["seed"] = cfg.graph.seed;
  }
  j["graph"] = graph;
  ordered_json filter;
  if (cfg.filter.kind() == FilterSpec::Kind::kDiffusion) {
    filter["type"] = "diffusion";
    filter["c"] = cfg.filter.diffusion_c();
  } else {
    filter["type"] = "polynomial";
    filter["h"] = cfg.filter.coefficients();
  }
  j["filter"] = filter;
  ordered_json cov;
  cov["type"] = "ar1_kron";
  cov["sigma_grid"] = cfg.covariance.sigma_grid;
  cov["rho"] = cfg.covariance.rho;
  cov["t"] = cfg.covariance.t;
  if (cfg.covariance.has_spatial_support) {
    cov["spatial_support"] = cfg.covariance.spatial_support;
  }
  j["covariance"] = cov;
  ordered_json mean;
  if (cfg.mean.from_file) {
    mean["path"] = cfg.mean.path;
  } else {
    mean["type"] = "gaussian";
    mean["scale"] = cfg.mean.scale;
    mean["seed"] = cfg.mean.seed;
  }
  if (!cfg.mean.support.empty()) mean["support"] = cfg.mean.support;
  j["mean"] = mean;
  j["privacy"] = ordered_json{{"delta", cfg.privacy.delta},
                              {"delta_u", cfg.privacy.delta_u},
                              {"delta_s", cfg.privacy.delta_s}};
  j["mc"] = ordered_json{{"samples", cfg.mc.samples}, {"seed", cfg.mc.seed}};
  j["output"] = cfg.output_dir;
  return j;
}

// One sweep row. Unset metrics stay NaN; a failure fills `note`.
struct SweepRow {
  double sigma = kNan;
  double rho = kNan;
  double mse_mean = kNan;
  double mse_stderr = kNan;
  double eps_exact = kNan;
  double eps_closed = kNan;
  bool closed_valid = false;
  double eps_u = kNan;
  double alpha_star = kNan;
  std::string worst_edge;
  double mc_tail = kNan;
  double mc_stderr = kNan;
  std::string note;
};

struct ProjectedPair {
  OutputGaussian p;
  OutputGaussian q;
  // False when the supports differ: Q cannot be evaluated against P and the
  // pair is certified non-private, so q above falls back to p.
  bool comparable = true;
  int full_dim = 0;
};

// Reduces a release pair to a common full-rank support when possible.
ProjectedPair PreparePair(const FilterSpec& spec, const AdjacentPair& pair,
                          const Eigen::MatrixXd& m, const CovarianceModel& cov) {
  OutputGaussian p = OutputDistribution(spec, pair.base, m, cov);
  OutputGaussian q = OutputDistribution(spec, pair.other, m, cov);
  ProjectedPair out{p, q, true, p.dim()};
  if (p.CovarianceRank() == p.dim() && q.CovarianceRank() == q.dim()) {
    return out;
  }
  try {
    auto projected = ProjectSingular(p, q);
    out.p = std::move(projected.first);
    out.q = std::move(projected.second);
  } catch (const SupportMismatchError&) {
    auto own = ProjectSingular(p, p);
    out.p = own.first;
    out.q = own.second;
    out.comparable = false;
  }
  return out;
}

// True when the spectral closed form dominates the exact divergence for
// every adjacent pair over its whole feasible range.
bool ClosedFormValidEverywhere(const FilterBounds& bounds,
                               const CovarianceModel& cov, double delta_s,
                               double norm_m, const FilterSpec& spec,
                               const std::vector<AdjacentPair>& pairs,
                               const Eigen::MatrixXd& m) {
  for (const auto& pair : pairs) {
    try {
      const ProjectedPair prepared = PreparePair(spec, pair, m, cov);
      if (!prepared.comparable) return false;
      const RenyiEvaluator exact(prepared.p, prepared.q);
      const auto violations = Theorem2Violations(
          bounds, cov.MinEigenvalue(), cov.MaxEigenvalue(), cov.t(), cov.n(),
          delta_s, norm_m, exact);
      if (!violations.empty()) return false;
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

std::string CsvField(double v) { return FormatDouble(v); }

}  // namespace

std::vector<double> DefaultSigmaGrid() {
  std::vector<double> grid;
  grid.reserve(13);
  for (int k = 0; k < 13; ++k) {
    grid.push_back(std::pow(10.0, -2.0 + 0.25 * k));
  }
  return grid;
}

ExperimentConfig ExperimentConfig::FromJsonString(const std::string& text,
                                                  const std::string& origin) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError(origin + ": top level must be an object");
  }
  CheckKeys(root, "",
            {"graph", "filter", "covariance", "mean", "privacy", "mc",
             "output"});
  ExperimentConfig cfg;
  if (root.contains("graph")) ParseGraph(root["graph"], &cfg.graph);
  if (root.contains("filter")) cfg.filter = ParseFilter(root["filter"]);
  if (root.contains("covariance")) {
    ParseCovariance(root["covariance"], &cfg.covariance);
  } else {
    cfg.covariance.sigma_grid = DefaultSigmaGrid();
  }
  if (root.contains("mean")) ParseMean(root["mean"], &cfg.mean);
  if (root.contains("privacy")) ParsePrivacy(root["privacy"], &cfg.privacy);
  if (root.contains("mc")) ParseMc(root["mc"], &cfg.mc);
  if (root.contains("output")) {
    cfg.output_dir = AsString(root["output"], "output");
  }
  if (cfg.covariance.sigma_grid.empty()) {
    cfg.covariance.sigma_grid = DefaultSigmaGrid();
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::FromJsonFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FromJsonString(buffer.str(), path);
}

std::string ExperimentConfig::ResolvedJson(int indent) const {
  return ResolvedConfigJson(*this).dump(indent) + "\n";
}

Gso ExperimentConfig::MakeGraph() const {
  if (graph.from_file) return LoadEdgeList(graph.edge_list_path);
  return GenerateErdosRenyi(graph.n, graph.p, graph.seed);
}

Eigen::MatrixXd ExperimentConfig::MakeMean(int n) const {
  Eigen::MatrixXd m;
  if (mean.from_file) {
    m = LoadMeanCsv(mean.path);
    if (m.rows() != n || m.cols() != covariance.t) {
      throw DimensionMismatchError(
          "mean matrix is " + std::to_string(m.rows()) + "x" +
          std::to_string(m.cols()) + ", expected " + std::to_string(n) + "x" +
          std::to_string(covariance.t));
    }
  } else {
    Rng rng(mean.seed);
    m.resize(n, covariance.t);
    for (int c = 0; c < m.cols(); ++c) {
      for (int r = 0; r < m.rows(); ++r) {
        m(r, c) = mean.scale * rng.Normal();
      }
    }
  }
  if (!mean.support.empty()) {
    if (mean.support.back() >= n) {
      throw ConfigError("mean.support: index " +
                        std::to_string(mean.support.back()) +
                        " out of range for " + std::to_string(n) + " vertices");
    }
    std::vector<bool> keep(n, false);
    for (const int idx : mean.support) keep[idx] = true;
    for (int r = 0; r < n; ++r) {
      if (!keep[r]) m.row(r).setZero();
    }
  }
  return m;
}

CovarianceModel ExperimentConfig::MakeCovariance(double sigma, int n) const {
  Eigen::MatrixXd sigma_t = Ar1Covariance(covariance.t, sigma, covariance.rho);
  if (!covariance.has_spatial_support) {
    return CovarianceModel::KronTemporal(std::move(sigma_t), n);
  }
  if (covariance.spatial_support.back() >= n) {
    throw ConfigError("covariance.spatial_support: index " +
                      std::to_string(covariance.spatial_support.back()) +
                      " out of range for " + std::to_string(n) + " vertices");
  }
  Eigen::MatrixXd spatial = Eigen::MatrixXd::Zero(n, n);
  for (const int idx : covariance.spatial_support) spatial(idx, idx) = 1.0;
  return CovarianceModel::KronTemporal(std::move(sigma_t), std::move(spatial));
}

std::string RunSweep(const ExperimentConfig& config,
                     const std::string& out_dir) {
  const std::string dir = out_dir.empty() ? config.output_dir : out_dir;
  std::filesystem::create_directories(dir);

  const Gso g = config.MakeGraph();
  const int n = g.order();
  const Eigen::MatrixXd m = config.MakeMean(n);
  const auto pairs = EnumerateAdjacent(g, config.privacy.delta_s);
  const FilterBounds bounds = EmpiricalInstanceBounds(config.filter, pairs);
  double delta_s_max = 0.0;
  for (const auto& pair : pairs) delta_s_max = std::max(delta_s_max, pair.delta_s);
  const double norm_m = m.norm();

  const auto& grid = config.covariance.sigma_grid;
  std::vector<SweepRow> rows(grid.size());

  ParallelFor(grid.size(), [&](std::size_t r) {
    SweepRow& row = rows[r];
    row.sigma = grid[r];
    row.rho = config.covariance.rho;
    try {
      const CovarianceModel cov = config.MakeCovariance(grid[r], n);

      try {
        row.eps_u =
            ComputeInputEpsilon(config.privacy.delta_u, cov, config.privacy.delta)
                .epsilon;
      } catch (const SingularCovarianceError&) {
        row.eps_u = kInf;
      }

      const PrivacyAssessment assessment = WorstCaseAssessment(
          config.filter, g, m, cov, config.privacy.delta,
          config.privacy.delta_s);
      row.eps_exact = assessment.epsilon;
      row.alpha_star = assessment.alpha_star;
      row.worst_edge = EdgeLabel(assessment.edge_i, assessment.edge_j);

      try {
        const auto closed = Theorem2EpsilonForDelta(
            bounds, cov.MinEigenvalue(), cov.MaxEigenvalue(),
            config.covariance.t, n, delta_s_max, norm_m, config.privacy.delta);
        row.eps_closed = closed.value;
        row.closed_valid = ClosedFormValidEverywhere(
            bounds, cov, delta_s_max, norm_m, config.filter, pairs, m);
      } catch (const Error&) {
        row.eps_closed = kNan;
        row.closed_valid = false;
      }

      std::size_t worst_index = 0;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (pairs[k].edge_i == assessment.edge_i &&
            pairs[k].edge_j == assessment.edge_j) {
          worst_index = k;
          break;
        }
      }
      const ProjectedPair prepared =
          PreparePair(config.filter, pairs[worst_index], m, cov);
      const ReleaseStats stats =
          SampleReleaseStats(prepared.p, prepared.q, config.mc.samples,
                             DeriveSeed(config.mc.seed, r));
      // mse was normalized by the support dimension; rescale to the full
      // release dimension (off-support coordinates are deterministic and
      // contribute no error).
      const double scale =
          static_cast<double>(prepared.p.dim()) / prepared.full_dim;
      const Eigen::ArrayXd mse = stats.mse.array() * scale;
      row.mse_mean = mse.mean();
      const double var =
          (mse - row.mse_mean).square().sum() / (mse.size() - 1);
      row.mse_stderr = std::sqrt(var / mse.size());
      if (prepared.comparable && std::isfinite(row.eps_exact)) {
        const TailEstimate tail =
            TailFromLosses(stats.losses, row.eps_exact, false);
        row.mc_tail = tail.p_hat;
        row.mc_stderr = tail.std_error;
      }
    } catch (const Error& e) {
      row.note = SanitizeNote(e.what());
    }
  });

  std::ostringstream csv;
  csv << "sigma,rho,mse_mean,mse_stderr,eps_S_exact,eps_S_closed_form,"
         "closed_form_valid,eps_U,alpha_star,worst_edge,mc_tail_at_eps,"
         "mc_stderr,note\n";
  for (const SweepRow& row : rows) {
    csv << CsvField(row.sigma) << ',' << CsvField(row.rho) << ','
        << CsvField(row.mse_mean) << ',' << CsvField(row.mse_stderr) << ','
        << CsvField(row.eps_exact) << ',' << CsvField(row.eps_closed) << ','
        << (row.closed_valid ? "true" : "false") << ',' << CsvField(row.eps_u)
        << ',' << CsvField(row.alpha_star) << ',' << row.worst_edge << ','
        << CsvField(row.mc_tail) << ',' << CsvField(row.mc_stderr) << ','
        << row.note << '\n';
  }
  const std::string csv_path =
      (std::filesystem::path(dir) / "sweep.csv").string();
  WriteTextFile(csv_path, csv.str());

  ordered_json meta;
  meta["tool"] = "gsodp";
  meta["version"] = kLibraryVersion;
  meta["command"] = "sweep";
  meta["prng"] = kPrngId;
  meta["config"] = ResolvedConfigJson(config);
  meta["graph_order"] = n;
  meta["adjacent_pairs"] = pairs.size();
  ordered_json fb;
  fb["gamma"] = bounds.gamma.has_value() ? ordered_json(*bounds.gamma)
                                         : ordered_json(nullptr);
  fb["Gamma"] = bounds.Gamma;
  fb["kappa"] = bounds.kappa;
  fb["source"] = bounds.source;
  meta["filter_bounds"] = fb;
  WriteTextFile((std::filesystem::path(dir) / "run_meta.json").string(),
                meta.dump(2) + "\n");
  return csv_path;
}

std::string RunAudit(const ExperimentConfig& config,
                     const std::vector<double>& epsilon_grid,
                     const std::string& out_dir) {
  const std::string dir = out_dir.empty() ? config.output_dir : out_dir;
  std::filesystem::create_directories(dir);

  const Gso g = config.MakeGraph();
  const int n = g.order();
  const Eigen::MatrixXd m = config.MakeMean(n);
  const double sigma = config.covariance.sigma_grid.front();
  const CovarianceModel cov = config.MakeCovariance(sigma, n);
  const auto pairs = EnumerateAdjacent(g, config.privacy.delta_s);

  std::vector<double> grid = epsilon_grid;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0) || !std::isfinite(grid[k])) {
      throw InvalidArgumentError("epsilon grid entries must be finite and "
                                 "nonnegative");
    }
  }
  if (grid.empty()) {
    const PrivacyAssessment assessment =
        WorstCaseAssessment(config.filter, g, m, cov, config.privacy.delta,
                            config.privacy.delta_s);
    double base = assessment.epsilon;
    if (!std::isfinite(base) || base <= 0.0) base = 1.0;
    for (int k = 0; k < 10; ++k) {
      grid.push_back(base * std::pow(10.0, -2.0 + 2.5 * k / 9.0));
    }
  }

  const std::size_t n_pairs = pairs.size();
  const std::size_t n_eps = grid.size();
  struct PairAudit {
    bool comparable = true;
    std::vector<double> p_hat, std_error, analytic;
    std::vector<double> p_hat2, std_error2, analytic2;
    std::vector<double> t2_violations;
    bool t2_available = false;
    std::string t2_detail;
  };
  std::vector<PairAudit> audits(n_pairs);

  const FilterBounds bounds = EmpiricalInstanceBounds(config.filter, pairs);
  double delta_s_max = 0.0;
  for (const auto& pair : pairs) delta_s_max = std::max(delta_s_max, pair.delta_s);
  const double norm_m = m.norm();

  ParallelFor(n_pairs, [&](std::size_t k) {
    PairAudit& a = audits[k];
    a.p_hat.assign(n_eps, kNan);
    a.std_error.assign(n_eps, kNan);
    a.analytic.assign(n_eps, 1.0);
    a.p_hat2.assign(n_eps, kNan);
    a.std_error2.assign(n_eps, kNan);
    a.analytic2.assign(n_eps, 1.0);
    const ProjectedPair prepared = PreparePair(config.filter, pairs[k], m, cov);
    a.comparable = prepared.comparable;
    if (prepared.comparable) {
      const Eigen::VectorXd losses =
          SampleLosses(prepared.p, prepared.q, config.mc.samples,
                       DeriveSeed(config.mc.seed, k));
      for (std::size_t e = 0; e < n_eps; ++e) {
        const TailEstimate one = TailFromLosses(losses, grid[e], false);
        a.p_hat[e] = one.p_hat;
        a.std_error[e] = one.std_error;
        a.analytic[e] = DeltaBound(prepared.p, prepared.q, grid[e]).value;
        const TailEstimate two = TailFromLosses(losses, grid[e], true);
        a.p_hat2[e] = two.p_hat;
        a.std_error2[e] = two.std_error;
        a.analytic2[e] =
            std::min(1.0, DeltaBound(prepared.p, prepared.q, grid[e]).value +
                              DeltaBound(prepared.q, prepared.p, grid[e]).value);
      }
      try {
        const RenyiEvaluator exact(prepared.p, prepared.q);
        a.t2_violations = Theorem2Violations(
            bounds, cov.MinEigenvalue(), cov.MaxEigenvalue(), cov.t(), cov.n(),
            delta_s_max, norm_m, exact);
        a.t2_available = true;
      } catch (const Error& e) {
        a.t2_available = false;
        a.t2_detail = e.what();
      }
    }
  });

  const double resolution = kMcResolutionFactor / config.mc.samples;
  ordered_json report;
  report["version"] = kLibraryVersion;
  report["prng"] = kPrngId;
  report["sigma"] = sigma;
  report["samples"] = config.mc.samples;
  report["seed"] = config.mc.seed;
  report["epsilon_grid"] = grid;
  ordered_json edges = ordered_json::array();
  for (const auto& pair : pairs) {
    edges.push_back(ordered_json::array({pair.edge_i, pair.edge_j}));
  }
  report["edges"] = edges;

  auto matrix_of = [&](auto getter) {
    ordered_json rows = ordered_json::array();
    for (std::size_t k = 0; k < n_pairs; ++k) {
      ordered_json row = ordered_json::array();
      for (std::size_t e = 0; e < n_eps; ++e) {
        const double v = getter(audits[k], e);
        if (std::isnan(v)) {
          row.push_back(nullptr);
        } else {
          row.push_back(v);
        }
      }
      rows.push_back(row);
    }
    return rows;
  };
  report["p_hat"] =
      matrix_of([](const PairAudit& a, std::size_t e) { return a.p_hat[e]; });
  report["stderr"] = matrix_of(
      [](const PairAudit& a, std::size_t e) { return a.std_error[e]; });
  report["analytic_delta"] = matrix_of(
      [](const PairAudit& a, std::size_t e) { return a.analytic[e]; });
  ordered_json below = ordered_json::array();
  for (std::size_t k = 0; k < n_pairs; ++k) {
    ordered_json row = ordered_json::array();
    for (std::size_t e = 0; e < n_eps; ++e) {
      row.push_back(audits[k].analytic[e] < resolution);
    }
    below.push_back(row);
  }
  report["below_mc_resolution"] = below;

  ordered_json violations = ordered_json::array();
  auto scan = [&](bool two_sided) {
    for (std::size_t k = 0; k < n_pairs; ++k) {
      const PairAudit& a = audits[k];
      if (!a.comparable) continue;
      for (std::size_t e = 0; e < n_eps; ++e) {
        const double p = two_sided ? a.p_hat2[e] : a.p_hat[e];
        const double se = two_sided ? a.std_error2[e] : a.std_error[e];
        const double bound = two_sided ? a.analytic2[e] : a.analytic[e];
        if (p - 3.0 * se > bound) {
          ordered_json v;
          v["edge"] = ordered_json::array({pairs[k].edge_i, pairs[k].edge_j});
          v["epsilon"] = grid[e];
          v["two_sided"] = two_sided;
          v["p_hat"] = p;
          v["stderr"] = se;
          v["analytic_delta"] = bound;
          violations.push_back(v);
        }
      }
    }
  };
  scan(false);
  scan(true);
  report["violations"] = violations;

  ordered_json two;
  two["p_hat"] =
      matrix_of([](const PairAudit& a, std::size_t e) { return a.p_hat2[e]; });
  two["stderr"] = matrix_of(
      [](const PairAudit& a, std::size_t e) { return a.std_error2[e]; });
  two["analytic_delta"] = matrix_of(
      [](const PairAudit& a, std::size_t e) { return a.analytic2[e]; });
  report["two_sided"] = two;

  ordered_json t2;
  ordered_json invalid = ordered_json::array();
  ordered_json unavailable = ordered_json::array();
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const PairAudit& a = audits[k];
    if (!a.comparable) continue;
    if (!a.t2_available) {
      ordered_json u;
      u["edge"] = ordered_json::array({pairs[k].edge_i, pairs[k].edge_j});
      u["detail"] = a.t2_detail;
      unavailable.push_back(u);
      continue;
    }
    if (!a.t2_violations.empty()) {
      ordered_json v;
      v["edge"] = ordered_json::array({pairs[k].edge_i, pairs[k].edge_j});
      v["alphas"] = a.t2_violations;
      invalid.push_back(v);
    }
  }
  t2["invalid"] = invalid;
  t2["unavailable"] = unavailable;
  report["theorem2"] = t2;

  ordered_json mismatched = ordered_json::array();
  for (std::size_t k = 0; k < n_pairs; ++k) {
    if (!audits[k].comparable) {
      mismatched.push_back(
          ordered_json::array({pairs[k].edge_i, pairs[k].edge_j}));
    }
  }
  report["pairs_not_absolutely_continuous"] = mismatched;
  report["config"] = ResolvedConfigJson(config);

  const std::string path =
      (std::filesystem::path(dir) / "audit.json").string();
  WriteTextFile(path, report.dump(2) + "\n");
  return path;
}

std::string RunBound(const ExperimentConfig& config, int edge_i, int edge_j) {
  const Gso g = config.MakeGraph();
  const int n = g.order();
  if (edge_i > edge_j) std::swap(edge_i, edge_j);
  if (edge_i < 0 || edge_j >= n || edge_i == edge_j) {
    throw InvalidArgumentError("edge (" + std::to_string(edge_i) + ", " +
                               std::to_string(edge_j) +
                               ") is not a vertex pair of a graph of order " +
                               std::to_string(n));
  }
  const Eigen::MatrixXd m = config.MakeMean(n);
  const double sigma = config.covariance.sigma_grid.front();
  const CovarianceModel cov = config.MakeCovariance(sigma, n);
  const auto pairs = EnumerateAdjacent(g, config.privacy.delta_s);
  const AdjacentPair* match = nullptr;
  for (const auto& pair : pairs) {
    if (pair.edge_i == edge_i && pair.edge_j == edge_j) {
      match = &pair;
      break;
    }
  }
  if (match == nullptr) {
    throw InvalidArgumentError("vertex pair not enumerable: " +
                               EdgeLabel(edge_i, edge_j));
  }
  const PrivacyAssessment assessment =
      AssessPair(config.filter, *match, m, cov, config.privacy.delta);

  ordered_json out;
  out["version"] = kLibraryVersion;
  out["sigma"] = sigma;
  out["edge_present"] = g.weight(edge_i, edge_j) != 0.0;
  out["edge_delta_s"] = match->delta_s;
  out["certificate"] = ordered_json::parse(assessment.ToJson());
  return out.dump(2) + "\n";
}

}  // namespace gsodp
