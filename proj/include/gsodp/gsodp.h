/* Copyright 2025 The gsodp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the gsodp shared library.
 *
 * Every function returns a gsodp_error; results travel through out
 * parameters. Strings returned through char** are heap-allocated and must
 * be released with gsodp_string_free. A human-readable message for the
 * most recent failure on the calling thread is available through
 * gsodp_last_error_message.
 */

#ifndef GSODP_GSODP_H_
#define GSODP_GSODP_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gsodp_error {
  GSODP_OK = 0,
  GSODP_INVALID_ARGUMENT = 1,
  GSODP_DIMENSION_MISMATCH = 2,
  GSODP_NOT_INVERTIBLE = 3,
  GSODP_SINGULAR_COVARIANCE = 4,
  GSODP_INVALID_CORRELATION = 5,
  GSODP_ALPHA_INFEASIBLE = 6,
  GSODP_SUPPORT_MISMATCH = 7,
  GSODP_NO_UNIFORM_LOWER_BOUND = 8,
  GSODP_CONFIG_ERROR = 9,
  GSODP_IO_ERROR = 10,
  GSODP_INVALID_HANDLE = 11,
  GSODP_CHECK_FAILED = 12,
  GSODP_UNKNOWN_ERROR = 99
} gsodp_error;

const char* gsodp_version(void);

/* Identifier of the pseudo-random generator and transforms; recorded in
 * run metadata so artifacts state their own reproducibility contract. */
const char* gsodp_prng_id(void);

const char* gsodp_error_name(gsodp_error code);

/* Message of the last failure on this thread; "" when none. The pointer
 * stays valid until the next failing call on the same thread. */
const char* gsodp_last_error_message(void);

void gsodp_string_free(char* text);

typedef struct gsodp_graph_s* gsodp_graph;
typedef struct gsodp_config_s* gsodp_config;

/* -------- graph shift operators -------- */

gsodp_error gsodp_graph_erdos_renyi(int n, double p, uint64_t seed,
                                    gsodp_graph* out);

gsodp_error gsodp_graph_from_edge_list(const char* path, gsodp_graph* out);

/* shift points at n*n doubles; the matrix must be symmetric with a zero
 * diagonal (element order is irrelevant for a symmetric matrix). */
gsodp_error gsodp_graph_from_dense(const double* shift, int n,
                                   gsodp_graph* out);

gsodp_error gsodp_graph_order(gsodp_graph graph, int* out);

gsodp_error gsodp_graph_weight(gsodp_graph graph, int i, int j, double* out);

gsodp_error gsodp_graph_destroy(gsodp_graph* graph);

/* -------- experiment configurations -------- */

gsodp_error gsodp_config_from_file(const char* path, gsodp_config* out);

gsodp_error gsodp_config_from_string(const char* json_text,
                                     gsodp_config* out);

/* Configuration with every default filled in, as a JSON document. */
gsodp_error gsodp_config_resolved_json(gsodp_config config, char** json_out);

gsodp_error gsodp_config_destroy(gsodp_config* config);

/* -------- certification -------- */

/* Worst-case (epsilon, delta) certificate over all single-edge changes of
 * the configured graph at noise scale sigma, as a JSON document. */
gsodp_error gsodp_certify(gsodp_config config, double sigma, char** json_out);

/* Certificate for one vertex pair on the first grid sigma. */
gsodp_error gsodp_bound_edge(gsodp_config config, int edge_i, int edge_j,
                             char** json_out);

/* -------- experiment runners -------- */

/* Writes sweep.csv and run_meta.json under out_dir (NULL or "" selects the
 * configured output directory) and returns the CSV path. */
gsodp_error gsodp_run_sweep(gsodp_config config, const char* out_dir,
                            char** csv_path_out);

/* Writes audit.json under out_dir and returns its path. epsilons may be
 * NULL with n_epsilons = 0 to derive a grid around the worst-case
 * certificate. */
gsodp_error gsodp_run_audit(gsodp_config config, const double* epsilons,
                            int n_epsilons, const char* out_dir,
                            char** json_path_out);

/* Built-in property suite on fixed seeds. *passed is set to 1 when every
 * check passes, else 0; report_out (optional) receives the printable
 * summary. Returns GSODP_OK even when checks fail; the failure is in
 * *passed. */
gsodp_error gsodp_run_checks(int* passed, char** report_out);

#ifdef __cplusplus
}
#endif

#endif /* GSODP_GSODP_H_ */
