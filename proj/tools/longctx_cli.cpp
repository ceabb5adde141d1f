// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Everything goes through the C API in longctx.h.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "longctx/longctx.h"

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct BufferDeleter {
  void operator()(lc_buffer* b) const { lc_buffer_destroy(b); }
};
using Buffer = std::unique_ptr<lc_buffer, BufferDeleter>;

// Raised when a C API call fails; carries the status for the error object.
struct ApiFailure {
  lc_status status;
  std::string message;
};

void check(lc_status status) {
  if (status != LC_OK) {
    throw ApiFailure{status, lc_last_error()};
  }
}

std::string take(lc_buffer* raw) {
  Buffer b(raw);
  return std::string(lc_buffer_data(b.get()), lc_buffer_size(b.get()));
}

bool g_timestamp = false;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char out[32];
  std::strftime(out, sizeof out, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return out;
}

void print_json(const std::string& text) {
  if (!g_timestamp) {
    std::cout << text;
    return;
  }
  auto j = nlohmann::json::parse(text);
  j["generated_at"] = utc_now();
  std::cout << j.dump(2) << "\n";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    throw ApiFailure{LC_ERR_IO, "cannot write " + path};
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ApiFailure{LC_ERR_IO, "cannot open " + path};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Accepts plain integers or a KiB/MiB/GiB/TiB suffix.
uint64_t parse_bytes(const std::string& text) {
  static const std::pair<const char*, uint64_t> kUnits[] = {
      {"TiB", 1ULL << 40}, {"GiB", 1ULL << 30}, {"MiB", 1ULL << 20}, {"KiB", 1ULL << 10}};
  std::string digits = text;
  uint64_t scale = 1;
  for (const auto& [suffix, mult] : kUnits) {
    const std::string s(suffix);
    if (digits.size() > s.size() && digits.compare(digits.size() - s.size(), s.size(), s) == 0) {
      digits.resize(digits.size() - s.size());
      scale = mult;
      break;
    }
  }
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
    throw CLI::ValidationError("byte count", "expected an integer with optional KiB/MiB/GiB/TiB: " + text);
  }
  const uint64_t value = std::stoull(digits);
  if (value != 0 && scale > UINT64_MAX / value) {
    throw CLI::ValidationError("byte count", "value overflows 64 bits: " + text);
  }
  return value * scale;
}

lc_verdict verdict_from_name(const std::string& name) {
  if (name == "exact") return LC_VERDICT_EXACT;
  if (name == "truncated") return LC_VERDICT_TRUNCATED;
  if (name == "wrong") return LC_VERDICT_WRONG;
  return LC_VERDICT_EMPTY;
}

const char* opt_cstr(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"longctx: long-context training mechanics toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("longctx ") + lc_version() + " (schema " +
                                        std::to_string(lc_schema_version()) + ")");
  app.add_flag("--timestamp,!--no-timestamp", g_timestamp,
               "Add a generated_at field to JSON output (off by default)");

  std::function<void()> action;

  // census
  uint64_t census_limit = 524288;
  auto* census = app.add_subcommand("census", "Count distinct integers after 16-bit rounding");
  census->add_option("--limit", census_limit, "Count integers in [0, limit)")->capture_default_str();
  census->callback([&] {
    action = [&] {
      lc_buffer* out = nullptr;
      check(lc_census_json(census_limit, &out));
      print_json(take(out));
    };
  });

  // rope-plan
  int64_t plan_len = 0;
  std::vector<double> plan_candidates;
  int plan_head_dim = 128;
  double plan_tolerance = -1.0;
  auto* rope_plan = app.add_subcommand("rope-plan", "Recommend a rotary theta base for a context length");
  rope_plan->add_option("--context-len", plan_len, "Target context length")->required();
  rope_plan->add_option("--candidates", plan_candidates, "Candidate theta values")
      ->delimiter(',')
      ->required();
  rope_plan->add_option("--head-dim", plan_head_dim, "Attention head dimension")->capture_default_str();
  rope_plan->add_option("--band-tolerance", plan_tolerance,
                        "Fraction below the bound still counted in band");
  rope_plan->callback([&] {
    action = [&] {
      lc_buffer* out = nullptr;
      check(lc_rope_plan_json(plan_len, plan_candidates.data(), plan_candidates.size(),
                              plan_head_dim, plan_tolerance, &out));
      print_json(take(out));
    };
  });

  // rope-report
  double report_theta = 10000.0;
  int report_head_dim = 128;
  int64_t report_max_pos = 4096;
  std::string report_format = "csv";
  auto* rope_report = app.add_subcommand("rope-report", "Per-dimension wavelengths and completeness");
  rope_report->add_option("--theta", report_theta, "Theta base")->capture_default_str();
  rope_report->add_option("--head-dim", report_head_dim, "Attention head dimension")->capture_default_str();
  rope_report->add_option("--max-position", report_max_pos, "Context length")->capture_default_str();
  rope_report->add_option("--format", report_format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  rope_report->callback([&] {
    action = [&] {
      lc_rope_config* cfg = nullptr;
      check(lc_rope_config_create(report_theta, report_head_dim, report_max_pos,
                                  LC_PRECISION_FULL32, &cfg));
      std::unique_ptr<lc_rope_config, void (*)(lc_rope_config*)> guard(cfg, lc_rope_config_destroy);
      lc_buffer* out = nullptr;
      check(lc_rope_report(cfg, report_format == "csv", &out));
      if (report_format == "csv") {
        std::cout << take(out);
      } else {
        print_json(take(out));
      }
    };
  });

  // ringsim
  size_t ring_seq = 0, ring_dim = 16, ring_devices = 1, ring_cq = 0, ring_ckv = 0;
  uint64_t ring_seed = 0;
  std::vector<size_t> ring_segments;
  std::string ring_weights_path;
  auto* ringsim = app.add_subcommand("ringsim", "Simulate ring attention against the exact oracle");
  ringsim->add_option("--seq-len", ring_seq, "Sequence length")->required();
  ringsim->add_option("--head-dim", ring_dim, "Head dimension")->capture_default_str();
  ringsim->add_option("--devices", ring_devices, "Ring size")->required();
  ringsim->add_option("--q-chunk", ring_cq, "Query chunk")->required();
  ringsim->add_option("--kv-chunk", ring_ckv, "Key/value chunk")->required();
  ringsim->add_option("--seed", ring_seed, "Random seed")->capture_default_str();
  ringsim->add_option("--segments", ring_segments, "Document lengths, e.g. 16,48")->delimiter(',');
  ringsim->add_option("--weights-csv", ring_weights_path, "Write the attention weights to this file");
  ringsim->callback([&] {
    action = [&] {
      lc_buffer* out = nullptr;
      lc_buffer* weights = nullptr;
      check(lc_ringsim_run_json(ring_seq, ring_dim, ring_devices, ring_cq, ring_ckv, ring_seed,
                                ring_segments.data(), ring_segments.size(), &out,
                                ring_weights_path.empty() ? nullptr : &weights));
      std::string json = take(out);
      if (!ring_weights_path.empty()) {
        write_file(ring_weights_path, take(weights));
      }
      print_json(json);
    };
  });

  // memplan
  uint64_t mp_devices = 0, mp_seq = 0, mp_cq = 0, mp_ckv = 0, mp_vs_cq = 0, mp_vs_ckv = 0;
  std::string mp_budget;
  std::vector<std::string> mp_terms;
  auto* memplan = app.add_subcommand("memplan", "Lookup-table memory for a chunk plan");
  memplan->add_option("--devices", mp_devices, "Sequence-parallel devices")->required();
  memplan->add_option("--seq-len", mp_seq, "Sequence length")->required();
  memplan->add_option("--q-chunk", mp_cq, "Query chunk")->required();
  memplan->add_option("--kv-chunk", mp_ckv, "Key/value chunk")->required();
  memplan->add_option("--budget", mp_budget, "Byte budget (KiB/MiB/GiB/TiB suffix allowed)");
  memplan->add_option("--term", mp_terms, "Extra additive term name=bytes");
  memplan->add_option("--vs-q-chunk", mp_vs_cq, "Compare against this query chunk");
  memplan->add_option("--vs-kv-chunk", mp_vs_ckv, "Compare against this key/value chunk");
  memplan->callback([&] {
    action = [&] {
      std::optional<uint64_t> budget;
      if (!mp_budget.empty()) budget = parse_bytes(mp_budget);
      std::vector<std::string> names;
      std::vector<uint64_t> bytes;
      for (const auto& term : mp_terms) {
        const auto eq = term.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw CLI::ValidationError("--term", "expected name=bytes: " + term);
        }
        names.push_back(term.substr(0, eq));
        bytes.push_back(parse_bytes(term.substr(eq + 1)));
      }
      std::vector<const char*> name_ptrs;
      for (const auto& n : names) name_ptrs.push_back(n.c_str());
      lc_buffer* out = nullptr;
      check(lc_memplan_report_json(mp_devices, mp_seq, mp_cq, mp_ckv, budget ? &*budget : nullptr,
                                   name_ptrs.data(), bytes.data(), bytes.size(), mp_vs_cq,
                                   mp_vs_ckv, &out));
      print_json(take(out));
    };
  });

  // memplan-search
  uint64_t ms_devices = 0, ms_seq = 0;
  std::string ms_budget;
  lc_chunk_constraints ms_c{1, 0, 1, 0, 1};
  bool ms_any_size = false;
  auto* search = app.add_subcommand("memplan-search", "Find chunk sizes that fit a byte budget");
  search->add_option("--devices", ms_devices, "Sequence-parallel devices")->required();
  search->add_option("--seq-len", ms_seq, "Sequence length")->required();
  search->add_option("--budget", ms_budget, "Byte budget (KiB/MiB/GiB/TiB suffix allowed)")->required();
  search->add_option("--min-q-chunk", ms_c.min_q_chunk, "Smallest query chunk");
  search->add_option("--max-q-chunk", ms_c.max_q_chunk, "Largest query chunk");
  search->add_option("--min-kv-chunk", ms_c.min_kv_chunk, "Smallest key/value chunk");
  search->add_option("--max-kv-chunk", ms_c.max_kv_chunk, "Largest key/value chunk");
  search->add_flag("--any-size", ms_any_size, "Allow chunk sizes that are not powers of two");
  search->callback([&] {
    action = [&] {
      ms_c.power_of_two = ms_any_size ? 0 : 1;
      lc_buffer* out = nullptr;
      check(lc_memplan_search_json(ms_devices, ms_seq, parse_bytes(ms_budget), &ms_c, &out));
      print_json(take(out));
    };
  });

  // niah-gen
  int64_t gen_tokens = 2000;
  double gen_depth = 50.0;
  uint64_t gen_seed = 0;
  std::string gen_payload, gen_needle, gen_question, gen_filler;
  auto* niah_gen = app.add_subcommand("niah-gen", "Generate one needle-in-a-haystack case");
  niah_gen->add_option("--tokens", gen_tokens, "Target prompt size in tokens")->capture_default_str();
  niah_gen->add_option("--depth", gen_depth, "Needle depth percent")->capture_default_str();
  niah_gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  niah_gen->add_option("--payload", gen_payload, "Needle payload (derived from seed when empty)");
  niah_gen->add_option("--needle-template", gen_needle, "Needle sentence with {payload}");
  niah_gen->add_option("--question-template", gen_question, "Question text");
  niah_gen->add_option("--filler", gen_filler, "Filler corpus file, one sentence per line");
  niah_gen->callback([&] {
    action = [&] {
      lc_niah_case c{gen_tokens,           gen_depth,          opt_cstr(gen_payload),
                     opt_cstr(gen_needle), opt_cstr(gen_question), gen_seed,
                     opt_cstr(gen_filler)};
      lc_buffer* out = nullptr;
      check(lc_niah_generate_json(&c, &out));
      print_json(take(out));
    };
  });

  // niah-score
  std::string score_expected, score_answer;
  auto* niah_score = app.add_subcommand("niah-score", "Score one answer against the expected payload");
  niah_score->add_option("--expected", score_expected, "Expected payload")->required();
  niah_score->add_option("--answer", score_answer, "Model answer")->required();
  niah_score->callback([&] {
    action = [&] {
      lc_buffer* out = nullptr;
      check(lc_niah_score_json(score_expected.c_str(), score_answer.c_str(), &out));
      print_json(take(out));
    };
  });

  // niah-grid
  std::vector<int64_t> grid_lengths;
  std::vector<double> grid_depths{0, 25, 50, 75, 100};
  size_t grid_trials = 1, grid_concurrency = 4;
  uint64_t grid_seed = 0;
  std::string grid_endpoint, grid_client = "http", grid_fixture, grid_adapter, grid_detail,
                             grid_metric = "exact", grid_format = "csv", grid_filler;
  int grid_max_tokens = 32, grid_retries = 3;
  int64_t grid_backoff_ms = 200, grid_timeout_ms = 120000;
  auto* niah_grid = app.add_subcommand("niah-grid", "Run a length x depth recall grid");
  niah_grid->add_option("--lengths", grid_lengths, "Context lengths in tokens")->delimiter(',')->required();
  niah_grid->add_option("--depths", grid_depths, "Depth percents")->delimiter(',')->capture_default_str();
  niah_grid->add_option("--trials", grid_trials, "Trials per cell")->capture_default_str();
  niah_grid->add_option("--seed", grid_seed, "Random seed")->capture_default_str();
  niah_grid->add_option("--endpoint", grid_endpoint, "Completion URL")->envname("LONGCTX_ENDPOINT");
  niah_grid->add_option("--client", grid_client, "Client kind")
      ->check(CLI::IsMember({"http", "echo", "truncating", "fixture"}))
      ->capture_default_str();
  niah_grid->add_option("--fixture", grid_fixture, "Canned responses for --client fixture");
  niah_grid->add_option("--adapter", grid_adapter, "Adapter config mapping request/response fields");
  niah_grid->add_option("--concurrency", grid_concurrency, "Parallel requests")->capture_default_str();
  niah_grid->add_option("--max-tokens", grid_max_tokens, "Completion length")->capture_default_str();
  niah_grid->add_option("--retries", grid_retries, "Attempts per request")->capture_default_str();
  niah_grid->add_option("--backoff-ms", grid_backoff_ms, "Initial retry backoff")->capture_default_str();
  niah_grid->add_option("--timeout-ms", grid_timeout_ms, "HTTP timeout")->capture_default_str();
  niah_grid->add_option("--metric", grid_metric, "Verdict rate shown in the CSV")
      ->check(CLI::IsMember({"exact", "truncated", "wrong", "empty"}))
      ->capture_default_str();
  niah_grid->add_option("--detail", grid_detail, "Write the JSON detail log to this file");
  niah_grid->add_option("--format", grid_format, "csv matrix or json detail on stdout")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  niah_grid->add_option("--filler", grid_filler, "Filler corpus file");
  niah_grid->callback([&] {
    action = [&] {
      lc_niah_client* raw = nullptr;
      if (grid_client == "echo") {
        check(lc_niah_client_create_echo(&raw));
      } else if (grid_client == "truncating") {
        check(lc_niah_client_create_truncating(&raw));
      } else if (grid_client == "fixture") {
        if (grid_fixture.empty()) throw CLI::ValidationError("--fixture", "required with --client fixture");
        check(lc_niah_client_create_fixture(read_file(grid_fixture).c_str(), &raw));
      } else {
        if (grid_endpoint.empty()) {
          throw CLI::ValidationError("--endpoint", "required (or set LONGCTX_ENDPOINT)");
        }
        const std::string adapter = grid_adapter.empty() ? "" : read_file(grid_adapter);
        check(lc_niah_client_create_http(grid_endpoint.c_str(), opt_cstr(adapter), grid_timeout_ms, &raw));
      }
      std::unique_ptr<lc_niah_client, void (*)(lc_niah_client*)> client(raw, lc_niah_client_destroy);
      lc_niah_grid_options o{grid_lengths.data(), grid_lengths.size(), grid_depths.data(),
                             grid_depths.size(),  grid_trials,         grid_seed,
                             grid_concurrency,    grid_max_tokens,     grid_retries,
                             grid_backoff_ms,     verdict_from_name(grid_metric),
                             opt_cstr(grid_filler)};
      lc_buffer* csv = nullptr;
      lc_buffer* detail = nullptr;
      check(lc_niah_grid(&o, client.get(), &csv, &detail));
      const std::string csv_text = take(csv);
      const std::string detail_text = take(detail);
      if (!grid_detail.empty()) write_file(grid_detail, detail_text);
      if (grid_format == "csv") {
        std::cout << csv_text;
      } else {
        print_json(detail_text);
      }
    };
  });

  // recipe
  auto* recipe = app.add_subcommand("recipe", "Training recipe manifest");
  recipe->require_subcommand(1);
  std::string recipe_manifest, recipe_out;
  auto load_recipe = [&](bool checked) {
    lc_recipe* r = nullptr;
    if (recipe_manifest.empty()) {
      check(lc_recipe_create_builtin(&r));
    } else {
      const std::string text = read_file(recipe_manifest);
      check(checked ? lc_recipe_load(text.data(), text.size(), &r)
                    : lc_recipe_load_unchecked(text.data(), text.size(), &r));
    }
    return std::unique_ptr<lc_recipe, void (*)(lc_recipe*)>(r, lc_recipe_destroy);
  };
  int exit_code = 0;
  auto* recipe_show = recipe->add_subcommand("show", "Summarize phases and token totals");
  recipe_show->add_option("--manifest", recipe_manifest, "Manifest file (built-in recipe when omitted)");
  recipe_show->callback([&] {
    action = [&] {
      auto r = load_recipe(true);
      lc_buffer* out = nullptr;
      check(lc_recipe_summary_json(r.get(), &out));
      print_json(take(out));
    };
  });
  auto* recipe_validate = recipe->add_subcommand("validate", "Check a manifest; exit 1 on violations");
  recipe_validate->add_option("--manifest", recipe_manifest, "Manifest file (built-in recipe when omitted)");
  recipe_validate->callback([&] {
    action = [&] {
      auto r = load_recipe(false);
      size_t violations = 0;
      lc_buffer* out = nullptr;
      check(lc_recipe_validate_json(r.get(), &violations, &out));
      print_json(take(out));
      if (violations > 0) {
        std::cerr << "longctx: manifest has " << violations << " violation(s)\n";
        exit_code = kExitDomain;
      }
    };
  });
  auto* recipe_emit = recipe->add_subcommand("emit", "Write the canonical manifest");
  recipe_emit->add_option("--manifest", recipe_manifest, "Manifest file (built-in recipe when omitted)");
  recipe_emit->add_option("--out", recipe_out, "Write to this file instead of stdout");
  recipe_emit->callback([&] {
    action = [&] {
      auto r = load_recipe(true);
      lc_buffer* out = nullptr;
      check(lc_recipe_emit(r.get(), &out));
      const std::string text = take(out);
      if (recipe_out.empty()) {
        std::cout << text;
      } else {
        write_file(recipe_out, text);
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (action) action();
  } catch (const CLI::ValidationError& e) {
    std::cerr << "longctx: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ApiFailure& f) {
    const nlohmann::json err{{"error", {{"kind", lc_status_name(f.status)}, {"message", f.message}}}};
    std::cout << err.dump(2) << "\n";
    std::cerr << "longctx: " << f.message << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    const nlohmann::json err{{"error", {{"kind", "internal_error"}, {"message", e.what()}}}};
    std::cout << err.dump(2) << "\n";
    std::cerr << "longctx: " << e.what() << "\n";
    return kExitDomain;
  }
  return exit_code;
}
