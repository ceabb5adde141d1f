/*
 * Copyright 2026 The longctx Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the longctx toolkit. Every fallible call returns an
 * lc_status; on failure lc_last_error() describes the problem (thread-local,
 * valid until the next call on the same thread). Objects are opaque handles
 * released with their matching *_destroy function. Text results are returned
 * as lc_buffer handles owned by the caller.
 */

#ifndef LONGCTX_LONGCTX_H_
#define LONGCTX_LONGCTX_H_

#include <stddef.h>
#include <stdint.h>

#if defined(LONGCTX_BUILDING_LIBRARY)
#define LONGCTX_API __attribute__((visibility("default")))
#else
#define LONGCTX_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lc_status {
  LC_OK = 0,
  LC_ERR_INVALID_ARGUMENT = 1,
  LC_ERR_DOMAIN = 2,
  LC_ERR_PARSE = 3,
  LC_ERR_IO = 4,
  LC_ERR_INTERNAL = 5
} lc_status;

typedef enum lc_precision { LC_PRECISION_FULL32 = 0, LC_PRECISION_REDUCED16 = 1 } lc_precision;

typedef enum lc_verdict {
  LC_VERDICT_EXACT = 0,
  LC_VERDICT_TRUNCATED = 1,
  LC_VERDICT_WRONG = 2,
  LC_VERDICT_EMPTY = 3
} lc_verdict;

typedef struct lc_buffer lc_buffer;
typedef struct lc_rope_config lc_rope_config;
typedef struct lc_attention_problem lc_attention_problem;
typedef struct lc_niah_client lc_niah_client;
typedef struct lc_recipe lc_recipe;

/* ---- library ------------------------------------------------------------ */

LONGCTX_API const char* lc_version(void);
LONGCTX_API int lc_schema_version(void);
LONGCTX_API const char* lc_last_error(void);
LONGCTX_API const char* lc_status_name(lc_status status);

/* ---- buffers ------------------------------------------------------------ */

LONGCTX_API const char* lc_buffer_data(const lc_buffer* buffer);
LONGCTX_API size_t lc_buffer_size(const lc_buffer* buffer);
LONGCTX_API void lc_buffer_destroy(lc_buffer* buffer);

/* ---- softnum: 16-bit float rounding ------------------------------------- */

LONGCTX_API uint16_t lc_round_to_reduced16(float x);
LONGCTX_API float lc_widen_reduced16(uint16_t bits);
LONGCTX_API lc_status lc_distinct_integer_census(uint64_t limit, uint64_t* out_distinct);
/* {"limit", "distinct", "collision_rate"} */
LONGCTX_API lc_status lc_census_json(uint64_t limit, lc_buffer** out);

/* ---- rope --------------------------------------------------------------- */

LONGCTX_API lc_status lc_rope_config_create(double theta_base, int head_dim, int64_t max_position,
                                            lc_precision precision, lc_rope_config** out);
LONGCTX_API void lc_rope_config_destroy(lc_rope_config* cfg);
/* Choose where reduced precision is injected (defaults: position on, angle off). */
LONGCTX_API lc_status lc_rope_config_set_injection(lc_rope_config* cfg, int round_position,
                                                   int round_angle);
/* out has head_dim / 2 entries. */
LONGCTX_API lc_status lc_rope_inverse_frequencies(const lc_rope_config* cfg, double* out,
                                                  size_t out_len);
/* in and out have head_dim entries; they may alias. */
LONGCTX_API lc_status lc_rope_rotate(const lc_rope_config* cfg, const double* in, size_t len,
                                     int64_t position, double* out);
LONGCTX_API lc_status lc_rope_relative_score(const lc_rope_config* cfg, const double* q,
                                             const double* k, size_t len, int64_t m, int64_t n,
                                             double* out);
LONGCTX_API lc_status lc_theta_lower_bound(double context_len, double* out);
/* Per-dimension report. as_csv != 0 gives "pair_index,inv_freq,wavelength,complete". */
LONGCTX_API lc_status lc_rope_report(const lc_rope_config* cfg, int as_csv, lc_buffer** out);
/* band_tolerance < 0 selects the default. */
LONGCTX_API lc_status lc_rope_plan_json(int64_t context_len, const double* candidates,
                                        size_t n_candidates, int head_dim, double band_tolerance,
                                        lc_buffer** out);

/* ---- ringsim ------------------------------------------------------------ */

/* q, k, v are row-major seq_len x head_dim; segment_ids has seq_len entries. */
LONGCTX_API lc_status lc_attention_problem_create(size_t seq_len, size_t head_dim,
                                                  const double* q, const double* k,
                                                  const double* v, const int64_t* segment_ids,
                                                  lc_attention_problem** out);
/* Random problem; segment_lengths may be NULL (one document). */
LONGCTX_API lc_status lc_attention_problem_random(size_t seq_len, size_t head_dim,
                                                  const size_t* segment_lengths,
                                                  size_t n_segments, uint64_t seed,
                                                  lc_attention_problem** out);
LONGCTX_API void lc_attention_problem_destroy(lc_attention_problem* problem);
LONGCTX_API lc_status lc_attention_problem_set_causal(lc_attention_problem* problem, int causal);

/* out holds seq_len * head_dim doubles. */
LONGCTX_API lc_status lc_exact_attention(const lc_attention_problem* problem, double* out,
                                         size_t out_len);
LONGCTX_API lc_status lc_blockwise_attention(const lc_attention_problem* problem, size_t q_chunk,
                                             size_t kv_chunk, double* out, size_t out_len);
/* weights (seq_len * seq_len) and out_transfers may be NULL. */
LONGCTX_API lc_status lc_ring_attention(const lc_attention_problem* problem, size_t devices,
                                        size_t q_chunk, size_t kv_chunk, double* out,
                                        size_t out_len, double* weights, size_t weights_len,
                                        size_t* out_transfers);
/* One simulator run against the oracle. weights_csv may be NULL. */
LONGCTX_API lc_status lc_ringsim_run_json(size_t seq_len, size_t head_dim, size_t devices,
                                          size_t q_chunk, size_t kv_chunk, uint64_t seed,
                                          const size_t* segment_lengths, size_t n_segments,
                                          lc_buffer** out_json, lc_buffer** weights_csv);
LONGCTX_API lc_status lc_dosp_limits(uint64_t kv_heads, uint64_t devices, uint64_t* ring,
                                     uint64_t* all_to_all);

/* ---- memplan ------------------------------------------------------------ */

typedef struct lc_chunk_constraints {
  uint64_t min_q_chunk;
  uint64_t max_q_chunk; /* 0 = unbounded */
  uint64_t min_kv_chunk;
  uint64_t max_kv_chunk; /* 0 = unbounded */
  int power_of_two;
} lc_chunk_constraints;

LONGCTX_API lc_status lc_lookup_table_bytes(uint64_t devices, uint64_t seq_len, uint64_t q_chunk,
                                            uint64_t kv_chunk, uint64_t* out_bytes);
/* budget may be NULL. term_names/term_bytes describe extra additive terms.
 * When compare_q_chunk and compare_kv_chunk are both non-zero the report gains
 * a "comparison" object against that plan. */
LONGCTX_API lc_status lc_memplan_report_json(uint64_t devices, uint64_t seq_len, uint64_t q_chunk,
                                             uint64_t kv_chunk, const uint64_t* budget,
                                             const char* const* term_names,
                                             const uint64_t* term_bytes, size_t n_terms,
                                             uint64_t compare_q_chunk, uint64_t compare_kv_chunk,
                                             lc_buffer** out);
/* {"plan": {...} | null, ...}. No feasible plan is LC_OK with a null plan. */
LONGCTX_API lc_status lc_memplan_search_json(uint64_t devices, uint64_t seq_len, uint64_t budget,
                                             const lc_chunk_constraints* constraints,
                                             lc_buffer** out);

/* ---- niah --------------------------------------------------------------- */

typedef struct lc_niah_case {
  int64_t haystack_tokens;
  double depth_percent;
  const char* payload;           /* NULL or "" derives one from the seed */
  const char* needle_template;   /* NULL = default; must contain {payload} */
  const char* question_template; /* NULL = default */
  uint64_t seed;
  const char* filler_path; /* NULL = bundled corpus */
} lc_niah_case;

LONGCTX_API lc_status lc_niah_generate_json(const lc_niah_case* spec, lc_buffer** out);
LONGCTX_API lc_status lc_niah_score(const char* expected, const char* answer,
                                    lc_verdict* out_verdict, size_t* out_matched_prefix);
LONGCTX_API lc_status lc_niah_score_json(const char* expected, const char* answer,
                                         lc_buffer** out);

/* adapter_json may be NULL; timeout_ms <= 0 selects the default. */
LONGCTX_API lc_status lc_niah_client_create_http(const char* url, const char* adapter_json,
                                                 int64_t timeout_ms, lc_niah_client** out);
LONGCTX_API lc_status lc_niah_client_create_echo(lc_niah_client** out);
LONGCTX_API lc_status lc_niah_client_create_truncating(lc_niah_client** out);
LONGCTX_API lc_status lc_niah_client_create_fixture(const char* fixture_json,
                                                    lc_niah_client** out);
LONGCTX_API void lc_niah_client_destroy(lc_niah_client* client);

typedef struct lc_niah_grid_options {
  const int64_t* lengths;
  size_t n_lengths;
  const double* depths;
  size_t n_depths;
  size_t trials;
  uint64_t seed;
  size_t max_concurrency;
  int max_tokens;
  int retry_attempts;        /* <= 0 selects 3 */
  int64_t retry_backoff_ms;  /* < 0 selects 200 */
  lc_verdict csv_metric;
  const char* filler_path; /* NULL = bundled corpus */
} lc_niah_grid_options;

/* CSV matrix of csv_metric rates; detail_json may be NULL. */
LONGCTX_API lc_status lc_niah_grid(const lc_niah_grid_options* options, lc_niah_client* client,
                                   lc_buffer** out_csv, lc_buffer** out_detail_json);

/* ---- recipe ------------------------------------------------------------- */

LONGCTX_API lc_status lc_recipe_create_builtin(lc_recipe** out);
/* Parses and validates a canonical manifest. */
LONGCTX_API lc_status lc_recipe_load(const char* text, size_t len, lc_recipe** out);
/* Parses without validating, so violations can be reported. */
LONGCTX_API lc_status lc_recipe_load_unchecked(const char* text, size_t len, lc_recipe** out);
LONGCTX_API void lc_recipe_destroy(lc_recipe* recipe);
LONGCTX_API lc_status lc_recipe_emit(const lc_recipe* recipe, lc_buffer** out);
LONGCTX_API lc_status lc_recipe_summary_json(const lc_recipe* recipe, lc_buffer** out);
LONGCTX_API lc_status lc_recipe_validate_json(const lc_recipe* recipe, size_t* out_violations,
                                              lc_buffer** out);

#ifdef __cplusplus
}
#endif

#endif /* LONGCTX_LONGCTX_H_ */
