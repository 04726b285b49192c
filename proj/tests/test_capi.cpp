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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

#include "gsodp/gsodp.h"

namespace {

const char* kConfigText = R"json({
  "graph": {"n": 3, "p": 0.6, "seed": 5},
  "filter": {"type": "diffusion", "c": 0.05},
  "covariance": {"type": "ar1_kron", "sigma": 0.5, "rho": 0.3, "t": 3},
  "mc": {"samples": 2000, "seed": 99}
})json";

struct OwnedString {
  char* value = nullptr;
  ~OwnedString() { gsodp_string_free(value); }
};

}  // namespace

TEST_CASE("identity strings") {
  CHECK(std::strcmp(gsodp_version(), "0.1.0") == 0);
  CHECK(std::strcmp(gsodp_prng_id(), "mt19937_64+box-muller/v1") == 0);
  CHECK(std::strcmp(gsodp_error_name(GSODP_OK), "ok") == 0);
  CHECK(std::strcmp(gsodp_error_name(GSODP_CONFIG_ERROR), "config_error") ==
        0);
  CHECK(gsodp_error_name(static_cast<gsodp_error>(1234)) != nullptr);
}

TEST_CASE("graph lifecycle through the c boundary") {
  gsodp_graph g = nullptr;
  REQUIRE(gsodp_graph_erdos_renyi(5, 0.5, 42, &g) == GSODP_OK);
  REQUIRE(g != nullptr);
  int n = 0;
  CHECK(gsodp_graph_order(g, &n) == GSODP_OK);
  CHECK(n == 5);
  double w = -1.0;
  CHECK(gsodp_graph_weight(g, 0, 1, &w) == GSODP_OK);
  CHECK((w == 0.0 || w == 1.0));
  CHECK(gsodp_graph_weight(g, 0, 9, &w) == GSODP_INVALID_ARGUMENT);
  CHECK(gsodp_graph_destroy(&g) == GSODP_OK);
  CHECK(g == nullptr);
}

TEST_CASE("dense constructors validate their input") {
  const double asym[4] = {0.0, 1.0, 0.5, 0.0};
  gsodp_graph g = nullptr;
  CHECK(gsodp_graph_from_dense(asym, 2, &g) == GSODP_INVALID_ARGUMENT);
  CHECK(g == nullptr);
  const char* message = gsodp_last_error_message();
  REQUIRE(message != nullptr);
  CHECK(std::strlen(message) > 0);

  const double ok[4] = {0.0, 1.0, 1.0, 0.0};
  REQUIRE(gsodp_graph_from_dense(ok, 2, &g) == GSODP_OK);
  double w = 0.0;
  CHECK(gsodp_graph_weight(g, 1, 0, &w) == GSODP_OK);
  CHECK(w == 1.0);
  gsodp_graph_destroy(&g);
}

TEST_CASE("null handles are rejected not dereferenced") {
  CHECK(gsodp_graph_order(nullptr, nullptr) == GSODP_INVALID_HANDLE);
  int n = 0;
  CHECK(gsodp_graph_order(nullptr, &n) == GSODP_INVALID_HANDLE);
  CHECK(gsodp_graph_destroy(nullptr) == GSODP_INVALID_HANDLE);
  OwnedString json;
  CHECK(gsodp_certify(nullptr, 1.0, &json.value) == GSODP_INVALID_HANDLE);
  CHECK(gsodp_config_from_string(nullptr, nullptr) == GSODP_INVALID_ARGUMENT);
  gsodp_string_free(nullptr);
}

TEST_CASE("configuration parsing and provenance") {
  gsodp_config cfg = nullptr;
  REQUIRE(gsodp_config_from_string(kConfigText, &cfg) == GSODP_OK);
  OwnedString resolved;
  REQUIRE(gsodp_config_resolved_json(cfg, &resolved.value) == GSODP_OK);
  const auto doc = nlohmann::json::parse(resolved.value);
  CHECK(doc["graph"]["n"] == 3);
  CHECK(doc["privacy"]["delta"] == 1e-5);
  CHECK(gsodp_config_destroy(&cfg) == GSODP_OK);

  CHECK(gsodp_config_from_string("{\"graph\": {\"n\": 0}}", &cfg) ==
        GSODP_CONFIG_ERROR);
  CHECK(cfg == nullptr);
  CHECK(std::string(gsodp_last_error_message()).find("graph.n") !=
        std::string::npos);
  CHECK(gsodp_config_from_file("/nonexistent/config.json", &cfg) ==
        GSODP_IO_ERROR);
}

TEST_CASE("certificates come back as json documents") {
  gsodp_config cfg = nullptr;
  REQUIRE(gsodp_config_from_string(kConfigText, &cfg) == GSODP_OK);

  OwnedString certificate;
  REQUIRE(gsodp_certify(cfg, 0.5, &certificate.value) == GSODP_OK);
  const auto doc = nlohmann::json::parse(certificate.value);
  CHECK(doc.contains("epsilon"));
  CHECK(doc.contains("method"));
  CHECK(doc["delta"] == 1e-5);

  OwnedString edge;
  REQUIRE(gsodp_bound_edge(cfg, 0, 1, &edge.value) == GSODP_OK);
  const auto edge_doc = nlohmann::json::parse(edge.value);
  CHECK(edge_doc["certificate"]["edge"] == nlohmann::json({0, 1}));

  OwnedString bad;
  CHECK(gsodp_bound_edge(cfg, 0, 7, &bad.value) == GSODP_INVALID_ARGUMENT);
  CHECK(gsodp_certify(cfg, -1.0, &bad.value) == GSODP_INVALID_ARGUMENT);
  gsodp_config_destroy(&cfg);
}

TEST_CASE("runners write artifacts to the requested directory") {
  const auto dir =
      std::filesystem::temp_directory_path() / "gsodp_capi_run";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  gsodp_config cfg = nullptr;
  REQUIRE(gsodp_config_from_string(kConfigText, &cfg) == GSODP_OK);

  OwnedString csv_path;
  REQUIRE(gsodp_run_sweep(cfg, dir.c_str(), &csv_path.value) == GSODP_OK);
  CHECK(std::filesystem::exists(csv_path.value));

  const double eps[2] = {0.1, 0.5};
  OwnedString audit_path;
  REQUIRE(gsodp_run_audit(cfg, eps, 2, dir.c_str(), &audit_path.value) ==
          GSODP_OK);
  CHECK(std::filesystem::exists(audit_path.value));
  {
    std::ifstream in(audit_path.value);
    nlohmann::json doc;
    in >> doc;
    CHECK(doc["epsilon_grid"].size() == 2);
  }

  gsodp_config_destroy(&cfg);
  std::filesystem::remove_all(dir);
}

TEST_CASE("property suite passes through the c boundary") {
  int passed = -1;
  OwnedString report;
  REQUIRE(gsodp_run_checks(&passed, &report.value) == GSODP_OK);
  CHECK(passed == 1);
  REQUIRE(report.value != nullptr);
  CHECK(std::string(report.value).find("[PASS]") != std::string::npos);
}
