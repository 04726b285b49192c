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

#include "gsodp/gsodp.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "gsodp/checks.hpp"
#include "gsodp/errors.hpp"
#include "gsodp/experiment.hpp"
#include "gsodp/graph.hpp"
#include "gsodp/privacy.hpp"
#include "gsodp/rng.hpp"

struct gsodp_graph_s {
  gsodp::Gso impl;
};

struct gsodp_config_s {
  gsodp::ExperimentConfig impl;
};

namespace {

thread_local std::string t_last_error;

template <typename Fn>
gsodp_error Guard(Fn&& fn) {
  try {
    fn();
    return GSODP_OK;
  } catch (const gsodp::Error& e) {
    t_last_error = e.what();
    return static_cast<gsodp_error>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    t_last_error = "out of memory";
    return GSODP_UNKNOWN_ERROR;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return GSODP_UNKNOWN_ERROR;
  } catch (...) {
    t_last_error = "unknown failure";
    return GSODP_UNKNOWN_ERROR;
  }
}

gsodp_error BadArgument(const char* message) {
  t_last_error = message;
  return GSODP_INVALID_ARGUMENT;
}

gsodp_error BadHandle(const char* message) {
  t_last_error = message;
  return GSODP_INVALID_HANDLE;
}

// Heap copy released by gsodp_string_free; uses malloc so plain C callers
// stay allocator-compatible.
char* CopyString(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

// Worst-case certificate of a config at one noise scale.
std::string CertifyJson(const gsodp::ExperimentConfig& config, double sigma) {
  const gsodp::Gso g = config.MakeGraph();
  const Eigen::MatrixXd m = config.MakeMean(g.order());
  const gsodp::CovarianceModel cov = config.MakeCovariance(sigma, g.order());
  const gsodp::PrivacyAssessment assessment = gsodp::WorstCaseAssessment(
      config.filter, g, m, cov, config.privacy.delta, config.privacy.delta_s);
  return assessment.ToJson(2) + "\n";
}

}  // namespace

extern "C" {

const char* gsodp_version(void) { return gsodp::kLibraryVersion; }

const char* gsodp_prng_id(void) { return gsodp::kPrngId; }

const char* gsodp_error_name(gsodp_error code) {
  switch (code) {
    case GSODP_OK:
      return "ok";
    case GSODP_INVALID_ARGUMENT:
      return "invalid_argument";
    case GSODP_DIMENSION_MISMATCH:
      return "dimension_mismatch";
    case GSODP_NOT_INVERTIBLE:
      return "not_invertible";
    case GSODP_SINGULAR_COVARIANCE:
      return "singular_covariance";
    case GSODP_INVALID_CORRELATION:
      return "invalid_correlation";
    case GSODP_ALPHA_INFEASIBLE:
      return "alpha_infeasible";
    case GSODP_SUPPORT_MISMATCH:
      return "support_mismatch";
    case GSODP_NO_UNIFORM_LOWER_BOUND:
      return "no_uniform_lower_bound";
    case GSODP_CONFIG_ERROR:
      return "config_error";
    case GSODP_IO_ERROR:
      return "io_error";
    case GSODP_INVALID_HANDLE:
      return "invalid_handle";
    case GSODP_CHECK_FAILED:
      return "check_failed";
    case GSODP_UNKNOWN_ERROR:
      return "unknown_error";
  }
  return "unknown_error";
}

const char* gsodp_last_error_message(void) { return t_last_error.c_str(); }

void gsodp_string_free(char* text) { std::free(text); }

gsodp_error gsodp_graph_erdos_renyi(int n, double p, uint64_t seed,
                                    gsodp_graph* out) {
  if (out == nullptr) return BadArgument("out is null");
  return Guard([&] {
    *out = new gsodp_graph_s{gsodp::GenerateErdosRenyi(n, p, seed)};
  });
}

gsodp_error gsodp_graph_from_edge_list(const char* path, gsodp_graph* out) {
  if (path == nullptr || out == nullptr) {
    return BadArgument("path and out must be non-null");
  }
  return Guard([&] { *out = new gsodp_graph_s{gsodp::LoadEdgeList(path)}; });
}

gsodp_error gsodp_graph_from_dense(const double* shift, int n,
                                   gsodp_graph* out) {
  if (shift == nullptr || out == nullptr) {
    return BadArgument("shift and out must be non-null");
  }
  return Guard([&] {
    Eigen::MatrixXd s = Eigen::Map<const Eigen::MatrixXd>(shift, n, n);
    *out = new gsodp_graph_s{gsodp::Gso(std::move(s))};
  });
}

gsodp_error gsodp_graph_order(gsodp_graph graph, int* out) {
  if (graph == nullptr) return BadHandle("graph handle is null");
  if (out == nullptr) return BadArgument("out is null");
  *out = graph->impl.order();
  return GSODP_OK;
}

gsodp_error gsodp_graph_weight(gsodp_graph graph, int i, int j, double* out) {
  if (graph == nullptr) return BadHandle("graph handle is null");
  if (out == nullptr) return BadArgument("out is null");
  if (i < 0 || j < 0 || i >= graph->impl.order() || j >= graph->impl.order()) {
    return BadArgument("vertex index out of range");
  }
  *out = graph->impl.weight(i, j);
  return GSODP_OK;
}

gsodp_error gsodp_graph_destroy(gsodp_graph* graph) {
  if (graph == nullptr || *graph == nullptr) {
    return BadHandle("graph handle is null");
  }
  delete *graph;
  *graph = nullptr;
  return GSODP_OK;
}

gsodp_error gsodp_config_from_file(const char* path, gsodp_config* out) {
  if (path == nullptr || out == nullptr) {
    return BadArgument("path and out must be non-null");
  }
  return Guard([&] {
    *out = new gsodp_config_s{gsodp::ExperimentConfig::FromJsonFile(path)};
  });
}

gsodp_error gsodp_config_from_string(const char* json_text,
                                     gsodp_config* out) {
  if (json_text == nullptr || out == nullptr) {
    return BadArgument("json_text and out must be non-null");
  }
  return Guard([&] {
    *out = new gsodp_config_s{
        gsodp::ExperimentConfig::FromJsonString(json_text, "<string>")};
  });
}

gsodp_error gsodp_config_resolved_json(gsodp_config config, char** json_out) {
  if (config == nullptr) return BadHandle("config handle is null");
  if (json_out == nullptr) return BadArgument("json_out is null");
  return Guard([&] { *json_out = CopyString(config->impl.ResolvedJson()); });
}

gsodp_error gsodp_config_destroy(gsodp_config* config) {
  if (config == nullptr || *config == nullptr) {
    return BadHandle("config handle is null");
  }
  delete *config;
  *config = nullptr;
  return GSODP_OK;
}

gsodp_error gsodp_certify(gsodp_config config, double sigma, char** json_out) {
  if (config == nullptr) return BadHandle("config handle is null");
  if (json_out == nullptr) return BadArgument("json_out is null");
  return Guard([&] { *json_out = CopyString(CertifyJson(config->impl, sigma)); });
}

gsodp_error gsodp_bound_edge(gsodp_config config, int edge_i, int edge_j,
                             char** json_out) {
  if (config == nullptr) return BadHandle("config handle is null");
  if (json_out == nullptr) return BadArgument("json_out is null");
  return Guard([&] {
    *json_out = CopyString(gsodp::RunBound(config->impl, edge_i, edge_j));
  });
}

gsodp_error gsodp_run_sweep(gsodp_config config, const char* out_dir,
                            char** csv_path_out) {
  if (config == nullptr) return BadHandle("config handle is null");
  return Guard([&] {
    const std::string dir = out_dir == nullptr ? "" : out_dir;
    const std::string path = gsodp::RunSweep(config->impl, dir);
    if (csv_path_out != nullptr) *csv_path_out = CopyString(path);
  });
}

gsodp_error gsodp_run_audit(gsodp_config config, const double* epsilons,
                            int n_epsilons, const char* out_dir,
                            char** json_path_out) {
  if (config == nullptr) return BadHandle("config handle is null");
  if (n_epsilons < 0 || (n_epsilons > 0 && epsilons == nullptr)) {
    return BadArgument("epsilons must point at n_epsilons values");
  }
  return Guard([&] {
    const std::vector<double> grid(epsilons, epsilons + n_epsilons);
    const std::string dir = out_dir == nullptr ? "" : out_dir;
    const std::string path = gsodp::RunAudit(config->impl, grid, dir);
    if (json_path_out != nullptr) *json_path_out = CopyString(path);
  });
}

gsodp_error gsodp_run_checks(int* passed, char** report_out) {
  if (passed == nullptr) return BadArgument("passed is null");
  return Guard([&] {
    const auto results = gsodp::RunPropertyChecks();
    *passed = gsodp::AllPassed(results) ? 1 : 0;
    if (report_out != nullptr) {
      *report_out = CopyString(gsodp::FormatCheckReport(results));
    }
  });
}

}  // extern "C"
