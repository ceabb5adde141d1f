// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0

#include "longctx/longctx.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "longctx/error.hpp"
#include "longctx/memplan.hpp"
#include "longctx/niah.hpp"
#include "longctx/recipe.hpp"
#include "longctx/ringsim.hpp"
#include "longctx/rope.hpp"
#include "longctx/softnum.hpp"
#include "serialize.hpp"

struct lc_buffer {
  std::string text;
};

struct lc_rope_config {
  longctx::rope::RopeConfig cfg;
};

struct lc_attention_problem {
  longctx::ringsim::AttentionProblem problem;
};

struct lc_niah_client {
  std::unique_ptr<longctx::niah::CompletionClient> client;
};

struct lc_recipe {
  longctx::recipe::RecipeManifest manifest;
};

namespace {

using namespace longctx;

thread_local std::string g_last_error;

lc_status status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return LC_ERR_INVALID_ARGUMENT;
    case ErrorKind::kDomain:
      return LC_ERR_DOMAIN;
    case ErrorKind::kParse:
      return LC_ERR_PARSE;
    case ErrorKind::kIo:
      return LC_ERR_IO;
  }
  return LC_ERR_INTERNAL;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
lc_status guarded(Fn&& fn) noexcept {
  try {
    g_last_error.clear();
    fn();
    return LC_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return LC_ERR_INTERNAL;
  }
}

template <typename T>
T& require(T* p, const char* what) {
  if (p == nullptr) {
    throw_invalid_argument(std::string(what) + " must not be NULL");
  }
  return *p;
}

void emit(lc_buffer** out, std::string text) {
  require(out, "output buffer");
  *out = new lc_buffer{std::move(text)};
}

const char* cstr(const char* p, const char* what) {
  require(p, what);
  return p;
}

std::vector<std::size_t> segment_vector(const size_t* lengths, size_t n) {
  if (n > 0 && lengths == nullptr) {
    throw_invalid_argument("segment_lengths must not be NULL when n_segments > 0");
  }
  return n == 0 ? std::vector<std::size_t>{} : std::vector<std::size_t>(lengths, lengths + n);
}

void copy_matrix(const ringsim::Matrix& m, double* out, size_t out_len) {
  if (out == nullptr || out_len != m.values().size()) {
    throw_invalid_argument("output buffer must hold " + std::to_string(m.values().size()) +
                           " doubles");
  }
  std::memcpy(out, m.values().data(), m.values().size() * sizeof(double));
}

niah::Verdict verdict_from_c(lc_verdict v) {
  switch (v) {
    case LC_VERDICT_EXACT:
      return niah::Verdict::kExact;
    case LC_VERDICT_TRUNCATED:
      return niah::Verdict::kTruncated;
    case LC_VERDICT_WRONG:
      return niah::Verdict::kWrong;
    case LC_VERDICT_EMPTY:
      return niah::Verdict::kEmpty;
  }
  throw_invalid_argument("unknown verdict");
}

lc_verdict verdict_to_c(niah::Verdict v) {
  switch (v) {
    case niah::Verdict::kExact:
      return LC_VERDICT_EXACT;
    case niah::Verdict::kTruncated:
      return LC_VERDICT_TRUNCATED;
    case niah::Verdict::kWrong:
      return LC_VERDICT_WRONG;
    case niah::Verdict::kEmpty:
      break;
  }
  return LC_VERDICT_EMPTY;
}

}  // namespace

extern "C" {

const char* lc_version(void) { return LONGCTX_VERSION_STRING; }

int lc_schema_version(void) { return recipe::kSchemaVersion; }

const char* lc_last_error(void) { return g_last_error.c_str(); }

const char* lc_status_name(lc_status status) {
  switch (status) {
    case LC_OK:
      return "ok";
    case LC_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case LC_ERR_DOMAIN:
      return "domain_error";
    case LC_ERR_PARSE:
      return "parse_error";
    case LC_ERR_IO:
      return "io_error";
    case LC_ERR_INTERNAL:
      return "internal_error";
  }
  return "unknown";
}

const char* lc_buffer_data(const lc_buffer* buffer) {
  return buffer == nullptr ? "" : buffer->text.c_str();
}

size_t lc_buffer_size(const lc_buffer* buffer) { return buffer == nullptr ? 0 : buffer->text.size(); }

void lc_buffer_destroy(lc_buffer* buffer) { delete buffer; }

// ---- softnum

uint16_t lc_round_to_reduced16(float x) { return softnum::round_to_reduced16(x).bits; }

float lc_widen_reduced16(uint16_t bits) { return softnum::widen(softnum::Reduced16{bits}); }

lc_status lc_distinct_integer_census(uint64_t limit, uint64_t* out_distinct) {
  return guarded([&] { require(out_distinct, "out_distinct") = softnum::distinct_integer_census(limit); });
}

lc_status lc_census_json(uint64_t limit, lc_buffer** out) {
  return guarded([&] { emit(out, serialize::dump(serialize::census_json(limit))); });
}

// ---- rope

lc_status lc_rope_config_create(double theta_base, int head_dim, int64_t max_position,
                                lc_precision precision, lc_rope_config** out) {
  return guarded([&] {
    require(out, "out");
    rope::RopeConfig cfg;
    cfg.theta_base = theta_base;
    cfg.head_dim = head_dim;
    cfg.max_position = max_position;
    if (precision != LC_PRECISION_FULL32 && precision != LC_PRECISION_REDUCED16) {
      throw_invalid_argument("unknown precision mode");
    }
    cfg.precision = precision == LC_PRECISION_FULL32 ? rope::PrecisionMode::kFull32
                                                     : rope::PrecisionMode::kReduced16;
    cfg.validate();
    *out = new lc_rope_config{cfg};
  });
}

void lc_rope_config_destroy(lc_rope_config* cfg) { delete cfg; }

lc_status lc_rope_config_set_injection(lc_rope_config* cfg, int round_position, int round_angle) {
  return guarded([&] {
    auto& c = require(cfg, "cfg");
    c.cfg.injection.position = round_position != 0;
    c.cfg.injection.angle = round_angle != 0;
  });
}

lc_status lc_rope_inverse_frequencies(const lc_rope_config* cfg, double* out, size_t out_len) {
  return guarded([&] {
    const auto freqs = rope::inverse_frequencies(require(cfg, "cfg").cfg);
    if (out == nullptr || out_len != freqs.size()) {
      throw_invalid_argument("output must hold head_dim / 2 doubles");
    }
    std::memcpy(out, freqs.data(), freqs.size() * sizeof(double));
  });
}

lc_status lc_rope_rotate(const lc_rope_config* cfg, const double* in, size_t len, int64_t position,
                         double* out) {
  return guarded([&] {
    if (in == nullptr || out == nullptr) {
      throw_invalid_argument("vectors must not be NULL");
    }
    const auto rotated = rope::rotate({in, len}, position, require(cfg, "cfg").cfg);
    std::memcpy(out, rotated.data(), rotated.size() * sizeof(double));
  });
}

lc_status lc_rope_relative_score(const lc_rope_config* cfg, const double* q, const double* k,
                                 size_t len, int64_t m, int64_t n, double* out) {
  return guarded([&] {
    if (q == nullptr || k == nullptr) {
      throw_invalid_argument("vectors must not be NULL");
    }
    require(out, "out") = rope::relative_score({q, len}, {k, len}, m, n, require(cfg, "cfg").cfg);
  });
}

lc_status lc_theta_lower_bound(double context_len, double* out) {
  return guarded([&] { require(out, "out") = rope::theta_lower_bound(context_len); });
}

lc_status lc_rope_report(const lc_rope_config* cfg, int as_csv, lc_buffer** out) {
  return guarded([&] {
    const auto report = rope::rotation_report(require(cfg, "cfg").cfg);
    emit(out, as_csv != 0 ? serialize::rotation_report_csv(report)
                          : serialize::dump(serialize::rotation_report_json(report)));
  });
}

lc_status lc_rope_plan_json(int64_t context_len, const double* candidates, size_t n_candidates,
                            int head_dim, double band_tolerance, lc_buffer** out) {
  return guarded([&] {
    if (n_candidates > 0 && candidates == nullptr) {
      throw_invalid_argument("candidates must not be NULL");
    }
    rope::ThetaPlanOptions opts;
    opts.head_dim = head_dim;
    if (band_tolerance >= 0.0) {
      opts.band_tolerance = band_tolerance;
    }
    const auto plan = rope::plan_theta(
        context_len, std::span<const double>(candidates, n_candidates), opts);
    emit(out, serialize::dump(serialize::theta_plan_json(plan)));
  });
}

// ---- ringsim

lc_status lc_attention_problem_create(size_t seq_len, size_t head_dim, const double* q,
                                      const double* k, const double* v,
                                      const int64_t* segment_ids, lc_attention_problem** out) {
  return guarded([&] {
    require(out, "out");
    if (q == nullptr || k == nullptr || v == nullptr || segment_ids == nullptr) {
      throw_invalid_argument("problem arrays must not be NULL");
    }
    auto p = std::make_unique<lc_attention_problem>();
    const size_t n = seq_len * head_dim;
    for (auto [dst, src] : {std::pair{&p->problem.q, q}, {&p->problem.k, k}, {&p->problem.v, v}}) {
      *dst = ringsim::Matrix(seq_len, head_dim);
      std::memcpy(dst->values().data(), src, n * sizeof(double));
    }
    p->problem.segment_ids.assign(segment_ids, segment_ids + seq_len);
    p->problem.validate();
    *out = p.release();
  });
}

lc_status lc_attention_problem_random(size_t seq_len, size_t head_dim,
                                      const size_t* segment_lengths, size_t n_segments,
                                      uint64_t seed, lc_attention_problem** out) {
  return guarded([&] {
    require(out, "out");
    const auto segs = segment_vector(segment_lengths, n_segments);
    *out = new lc_attention_problem{ringsim::random_problem(seq_len, head_dim, segs, seed)};
  });
}

void lc_attention_problem_destroy(lc_attention_problem* problem) { delete problem; }

lc_status lc_attention_problem_set_causal(lc_attention_problem* problem, int causal) {
  return guarded([&] { require(problem, "problem").problem.causal = causal != 0; });
}

lc_status lc_exact_attention(const lc_attention_problem* problem, double* out, size_t out_len) {
  return guarded([&] {
    copy_matrix(ringsim::exact_attention(require(problem, "problem").problem), out, out_len);
  });
}

lc_status lc_blockwise_attention(const lc_attention_problem* problem, size_t q_chunk,
                                 size_t kv_chunk, double* out, size_t out_len) {
  return guarded([&] {
    copy_matrix(
        ringsim::blockwise_attention(require(problem, "problem").problem, q_chunk, kv_chunk), out,
        out_len);
  });
}

lc_status lc_ring_attention(const lc_attention_problem* problem, size_t devices, size_t q_chunk,
                            size_t kv_chunk, double* out, size_t out_len, double* weights,
                            size_t weights_len, size_t* out_transfers) {
  return guarded([&] {
    const auto& p = require(problem, "problem").problem;
    const auto result = ringsim::ring_attention(p, {devices, q_chunk, kv_chunk}, weights != nullptr);
    copy_matrix(result.output, out, out_len);
    if (weights != nullptr) {
      copy_matrix(*result.weights, weights, weights_len);
    }
    if (out_transfers != nullptr) {
      *out_transfers = result.trace.transfer_count();
    }
  });
}

lc_status lc_ringsim_run_json(size_t seq_len, size_t head_dim, size_t devices, size_t q_chunk,
                              size_t kv_chunk, uint64_t seed, const size_t* segment_lengths,
                              size_t n_segments, lc_buffer** out_json, lc_buffer** weights_csv) {
  return guarded([&] {
    require(out_json, "out_json");
    serialize::RingRunInfo info;
    info.seq_len = seq_len;
    info.head_dim = head_dim;
    info.seed = seed;
    info.segment_lengths = segment_vector(segment_lengths, n_segments);
    if (info.segment_lengths.empty()) {
      info.segment_lengths.push_back(seq_len);
    }
    info.mesh = ringsim::RingMesh{devices, q_chunk, kv_chunk};
    const auto problem = ringsim::random_problem(seq_len, head_dim, info.segment_lengths, seed);
    const auto oracle = ringsim::exact_attention(problem);
    const auto ring = ringsim::ring_attention(problem, info.mesh, weights_csv != nullptr);
    std::string json = serialize::dump(serialize::ring_run_json(info, ring, oracle));
    if (weights_csv != nullptr) {
      emit(weights_csv, serialize::matrix_csv(*ring.weights));
    }
    emit(out_json, std::move(json));
  });
}

lc_status lc_dosp_limits(uint64_t kv_heads, uint64_t devices, uint64_t* ring,
                         uint64_t* all_to_all) {
  return guarded([&] {
    const auto limits = ringsim::dosp_limits(kv_heads, devices);
    require(ring, "ring") = limits.ring;
    require(all_to_all, "all_to_all") = limits.all_to_all;
  });
}

// ---- memplan

lc_status lc_lookup_table_bytes(uint64_t devices, uint64_t seq_len, uint64_t q_chunk,
                                uint64_t kv_chunk, uint64_t* out_bytes) {
  return guarded([&] {
    require(out_bytes, "out_bytes") =
        memplan::lookup_table_bytes({devices, seq_len, q_chunk, kv_chunk});
  });
}

lc_status lc_memplan_report_json(uint64_t devices, uint64_t seq_len, uint64_t q_chunk,
                                 uint64_t kv_chunk, const uint64_t* budget,
                                 const char* const* term_names, const uint64_t* term_bytes,
                                 size_t n_terms, uint64_t compare_q_chunk,
                                 uint64_t compare_kv_chunk, lc_buffer** out) {
  return guarded([&] {
    std::vector<memplan::MemoryTerm> terms;
    if (n_terms > 0 && (term_names == nullptr || term_bytes == nullptr)) {
      throw_invalid_argument("term arrays must not be NULL when n_terms > 0");
    }
    for (size_t i = 0; i < n_terms; ++i) {
      terms.push_back({term_names[i] == nullptr ? "" : term_names[i], term_bytes[i]});
    }
    const memplan::ChunkPlan plan{devices, seq_len, q_chunk, kv_chunk};
    const auto report = memplan::memory_report(
        plan, terms, budget == nullptr ? std::nullopt : std::optional<uint64_t>(*budget));
    auto j = serialize::memory_report_json(report);
    if (compare_q_chunk != 0 || compare_kv_chunk != 0) {
      if (compare_q_chunk == 0 || compare_kv_chunk == 0) {
        throw_invalid_argument("comparison needs both a query and a key/value chunk");
      }
      j["comparison"] = serialize::scenario_json(memplan::scenario_report(
          plan, memplan::ChunkPlan{devices, seq_len, compare_q_chunk, compare_kv_chunk}));
    }
    emit(out, serialize::dump(j));
  });
}

lc_status lc_memplan_search_json(uint64_t devices, uint64_t seq_len, uint64_t budget,
                                 const lc_chunk_constraints* constraints, lc_buffer** out) {
  return guarded([&] {
    memplan::ChunkConstraints c;
    if (constraints != nullptr) {
      c.min_q_chunk = std::max<uint64_t>(1, constraints->min_q_chunk);
      c.min_kv_chunk = std::max<uint64_t>(1, constraints->min_kv_chunk);
      if (constraints->max_q_chunk != 0) {
        c.max_q_chunk = constraints->max_q_chunk;
      }
      if (constraints->max_kv_chunk != 0) {
        c.max_kv_chunk = constraints->max_kv_chunk;
      }
      c.power_of_two = constraints->power_of_two != 0;
    }
    const auto plan = memplan::search_chunk_plan(devices, seq_len, budget, c);
    serialize::json j{{"devices", devices},
                      {"seq_len", seq_len},
                      {"budget_bytes", budget},
                      {"power_of_two", c.power_of_two}};
    if (plan) {
      j["plan"] = serialize::chunk_plan_json(*plan);
      j["lookup_table_bytes"] = memplan::lookup_table_bytes(*plan);
    } else {
      j["plan"] = nullptr;
      j["lookup_table_bytes"] = nullptr;
    }
    emit(out, serialize::dump(j));
  });
}

// ---- niah

lc_status lc_niah_generate_json(const lc_niah_case* spec, lc_buffer** out) {
  return guarded([&] {
    const auto& s = require(spec, "spec");
    niah::NiahCase c;
    c.haystack_tokens = s.haystack_tokens;
    c.depth_percent = s.depth_percent;
    c.seed = s.seed;
    if (s.payload != nullptr) {
      c.needle_payload = s.payload;
    }
    if (s.needle_template != nullptr) {
      c.needle_template = s.needle_template;
    }
    if (s.question_template != nullptr) {
      c.question_template = s.question_template;
    }
    niah::NiahDocument doc;
    if (s.filler_path != nullptr) {
      doc = niah::generate_case(c, niah::FillerCorpus::from_file(s.filler_path));
    } else {
      doc = niah::generate_case(c);
    }
    emit(out, serialize::dump(serialize::niah_document_json(doc, c)));
  });
}

lc_status lc_niah_score(const char* expected, const char* answer, lc_verdict* out_verdict,
                        size_t* out_matched_prefix) {
  return guarded([&] {
    const auto r = niah::score(cstr(expected, "expected"), cstr(answer, "answer"));
    require(out_verdict, "out_verdict") = verdict_to_c(r.verdict);
    if (out_matched_prefix != nullptr) {
      *out_matched_prefix = r.matched_prefix_len;
    }
  });
}

lc_status lc_niah_score_json(const char* expected, const char* answer, lc_buffer** out) {
  return guarded([&] {
    const char* e = cstr(expected, "expected");
    const auto r = niah::score(e, cstr(answer, "answer"));
    emit(out, serialize::dump(serialize::niah_score_json(e, r)));
  });
}

lc_status lc_niah_client_create_http(const char* url, const char* adapter_json, int64_t timeout_ms,
                                     lc_niah_client** out) {
  return guarded([&] {
    require(out, "out");
    niah::AdapterConfig adapter;
    if (adapter_json != nullptr) {
      adapter = niah::AdapterConfig::from_json(adapter_json);
    }
    const auto timeout = timeout_ms > 0 ? std::chrono::milliseconds(timeout_ms)
                                        : std::chrono::milliseconds(120000);
    *out = new lc_niah_client{niah::make_http_client(cstr(url, "url"), adapter, timeout)};
  });
}

lc_status lc_niah_client_create_echo(lc_niah_client** out) {
  return guarded([&] { require(out, "out") = new lc_niah_client{niah::make_echo_client()}; });
}

lc_status lc_niah_client_create_truncating(lc_niah_client** out) {
  return guarded(
      [&] { require(out, "out") = new lc_niah_client{niah::make_truncating_client()}; });
}

lc_status lc_niah_client_create_fixture(const char* fixture_json, lc_niah_client** out) {
  return guarded([&] {
    require(out, "out") =
        new lc_niah_client{niah::make_fixture_client(cstr(fixture_json, "fixture_json"))};
  });
}

void lc_niah_client_destroy(lc_niah_client* client) { delete client; }

lc_status lc_niah_grid(const lc_niah_grid_options* options, lc_niah_client* client,
                       lc_buffer** out_csv, lc_buffer** out_detail_json) {
  return guarded([&] {
    const auto& o = require(options, "options");
    auto& c = require(client, "client");
    require(out_csv, "out_csv");
    if ((o.n_lengths > 0 && o.lengths == nullptr) || (o.n_depths > 0 && o.depths == nullptr)) {
      throw_invalid_argument("grid axes must not be NULL");
    }
    niah::GridOptions g;
    g.lengths.assign(o.lengths, o.lengths + o.n_lengths);
    g.depths.assign(o.depths, o.depths + o.n_depths);
    g.trials = o.trials;
    g.seed = o.seed;
    g.max_concurrency = o.max_concurrency;
    g.max_tokens = o.max_tokens > 0 ? o.max_tokens : 32;
    if (o.retry_attempts > 0) {
      g.retry.attempts = o.retry_attempts;
    }
    if (o.retry_backoff_ms >= 0) {
      g.retry.initial_backoff = std::chrono::milliseconds(o.retry_backoff_ms);
    }
    niah::GridResult grid;
    if (o.filler_path != nullptr) {
      grid = niah::run_grid(g, *c.client, niah::FillerCorpus::from_file(o.filler_path));
    } else {
      grid = niah::run_grid(g, *c.client);
    }
    std::string csv = niah::grid_csv(grid, verdict_from_c(o.csv_metric));
    if (out_detail_json != nullptr) {
      emit(out_detail_json, serialize::dump(serialize::niah_grid_json(grid)));
    }
    emit(out_csv, std::move(csv));
  });
}

// ---- recipe

lc_status lc_recipe_create_builtin(lc_recipe** out) {
  return guarded([&] { require(out, "out") = new lc_recipe{recipe::builtin_recipe()}; });
}

lc_status lc_recipe_load(const char* text, size_t len, lc_recipe** out) {
  return guarded([&] {
    require(out, "out") =
        new lc_recipe{recipe::load_manifest(std::string_view(cstr(text, "text"), len))};
  });
}

lc_status lc_recipe_load_unchecked(const char* text, size_t len, lc_recipe** out) {
  return guarded([&] {
    require(out, "out") =
        new lc_recipe{recipe::parse_manifest(std::string_view(cstr(text, "text"), len))};
  });
}

void lc_recipe_destroy(lc_recipe* recipe) { delete recipe; }

lc_status lc_recipe_emit(const lc_recipe* recipe, lc_buffer** out) {
  return guarded([&] { emit(out, recipe::emit_manifest(require(recipe, "recipe").manifest)); });
}

lc_status lc_recipe_summary_json(const lc_recipe* recipe, lc_buffer** out) {
  return guarded([&] {
    emit(out,
         serialize::dump(serialize::recipe_summary_json(require(recipe, "recipe").manifest)));
  });
}

lc_status lc_recipe_validate_json(const lc_recipe* recipe, size_t* out_violations,
                                  lc_buffer** out) {
  return guarded([&] {
    const auto violations = recipe::validate(require(recipe, "recipe").manifest);
    if (out_violations != nullptr) {
      *out_violations = violations.size();
    }
    emit(out, serialize::dump(serialize::recipe_validation_json(violations)));
  });
}

}  // extern "C"
