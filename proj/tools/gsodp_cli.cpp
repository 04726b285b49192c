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

// Command-line front end over the gsodp C API.
//
//   gsodp sweep --config cfg.json [--out dir]
//   gsodp audit --config cfg.json [--eps e1,e2,...] [--out dir]
//   gsodp bound --config cfg.json --edge i,j
//   gsodp check
//
// Thread count is taken from the GSODP_THREADS environment variable.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gsodp/gsodp.h"

namespace {

int Fail(gsodp_error code) {
  std::fprintf(stderr, "error [%s]: %s\n", gsodp_error_name(code),
               gsodp_last_error_message());
  return 1;
}

std::vector<double> ParseDoubleList(const std::string& text,
                                    const std::string& flag) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty()) {
      throw CLI::ValidationError(flag, "not a comma-separated number list: " +
                                           text);
    }
    values.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return values;
}

struct ConfigHandle {
  gsodp_config config = nullptr;
  ~ConfigHandle() {
    if (config != nullptr) gsodp_config_destroy(&config);
  }
};

int RunSweepCommand(const std::string& config_path, const std::string& out) {
  ConfigHandle handle;
  gsodp_error code = gsodp_config_from_file(config_path.c_str(), &handle.config);
  if (code != GSODP_OK) return Fail(code);
  char* csv_path = nullptr;
  code = gsodp_run_sweep(handle.config, out.empty() ? nullptr : out.c_str(),
                         &csv_path);
  if (code != GSODP_OK) return Fail(code);
  std::printf("%s\n", csv_path);
  gsodp_string_free(csv_path);
  return 0;
}

int RunAuditCommand(const std::string& config_path, const std::string& eps,
                    const std::string& out) {
  std::vector<double> grid;
  if (!eps.empty()) grid = ParseDoubleList(eps, "--eps");
  ConfigHandle handle;
  gsodp_error code = gsodp_config_from_file(config_path.c_str(), &handle.config);
  if (code != GSODP_OK) return Fail(code);
  char* json_path = nullptr;
  code = gsodp_run_audit(handle.config, grid.empty() ? nullptr : grid.data(),
                         static_cast<int>(grid.size()),
                         out.empty() ? nullptr : out.c_str(), &json_path);
  if (code != GSODP_OK) return Fail(code);
  std::printf("%s\n", json_path);
  gsodp_string_free(json_path);
  return 0;
}

int RunBoundCommand(const std::string& config_path, const std::string& edge) {
  const std::vector<double> parts = ParseDoubleList(edge, "--edge");
  if (parts.size() != 2 || parts[0] != static_cast<int>(parts[0]) ||
      parts[1] != static_cast<int>(parts[1])) {
    std::fprintf(stderr, "error [invalid_argument]: --edge expects i,j\n");
    return 1;
  }
  ConfigHandle handle;
  gsodp_error code = gsodp_config_from_file(config_path.c_str(), &handle.config);
  if (code != GSODP_OK) return Fail(code);
  char* json = nullptr;
  code = gsodp_bound_edge(handle.config, static_cast<int>(parts[0]),
                          static_cast<int>(parts[1]), &json);
  if (code != GSODP_OK) return Fail(code);
  std::printf("%s", json);
  gsodp_string_free(json);
  return 0;
}

int RunCheckCommand() {
  int passed = 0;
  char* report = nullptr;
  const gsodp_error code = gsodp_run_checks(&passed, &report);
  if (code != GSODP_OK) return Fail(code);
  std::printf("%s", report);
  gsodp_string_free(report);
  return passed == 1 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("gsodp ") + gsodp_version() +
               ": differential-privacy certificates for graph-filter "
               "releases"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string eps_list;
  std::string edge;

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Noise sweep: per-sigma certificates, MSE and tail estimates");
  sweep->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  sweep->add_option("--out", out_dir, "output directory (default from config)");

  CLI::App* audit = app.add_subcommand(
      "audit", "Tail-bound audit of every adjacent pair on an epsilon grid");
  audit->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  audit->add_option("--eps", eps_list,
                    "comma-separated epsilon grid (default derived)");
  audit->add_option("--out", out_dir, "output directory (default from config)");

  CLI::App* bound = app.add_subcommand(
      "bound", "Certificate for a single vertex pair, printed as JSON");
  bound->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  bound->add_option("--edge", edge, "vertex pair i,j")->required();

  app.add_subcommand("check", "Run the built-in property suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) return RunSweepCommand(config_path, out_dir);
    if (audit->parsed()) return RunAuditCommand(config_path, eps_list, out_dir);
    if (bound->parsed()) return RunBoundCommand(config_path, edge);
    return RunCheckCommand();
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }
}
