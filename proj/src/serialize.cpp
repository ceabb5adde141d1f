// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0

#include "serialize.hpp"

#include <cstdio>

namespace longctx::serialize {

namespace {

json optional_rate(const niah::CellStats& c, niah::Verdict v) {
  const auto r = c.rate(v);
  return r ? json(*r) : json(nullptr);
}

}  // namespace

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json census_json(std::uint64_t limit) {
  const std::uint64_t distinct = softnum::distinct_integer_census(limit);
  return json{{"limit", limit},
              {"distinct", distinct},
              {"collision_rate", 1.0 - static_cast<double>(distinct) / static_cast<double>(limit)}};
}

json theta_plan_json(const rope::ThetaPlan& plan) {
  json cands = json::array();
  for (const auto& c : plan.candidates) {
    cands.push_back({{"theta_base", c.theta_base},
                     {"bound_ratio", c.bound_ratio},
                     {"classification", rope::to_string(c.classification)},
                     {"recommended", c.recommended},
                     {"complete_pairs", c.complete_pairs},
                     {"incomplete_pairs", c.incomplete_pairs},
                     {"fraction_complete", c.fraction_complete}});
  }
  return json{{"context_len", plan.context_len},
              {"head_dim", plan.head_dim},
              {"lower_bound", plan.lower_bound},
              {"band_tolerance", plan.band_tolerance},
              {"candidates", cands},
              {"recommended", plan.recommended ? json(*plan.recommended) : json(nullptr)}};
}

json rotation_report_json(const rope::DimRotationReport& report) {
  json dims = json::array();
  for (const auto& d : report.dims) {
    dims.push_back({{"pair_index", d.pair_index},
                    {"inv_freq", d.inv_freq},
                    {"wavelength", d.wavelength},
                    {"complete", d.completes_full_rotation}});
  }
  return json{{"theta_base", report.theta_base},
              {"head_dim", report.head_dim},
              {"max_position", report.max_position},
              {"complete_pairs", report.complete_pairs},
              {"fraction_complete", report.fraction_complete},
              {"dims", dims}};
}

std::string rotation_report_csv(const rope::DimRotationReport& report) {
  std::string out = "pair_index,inv_freq,wavelength,complete\n";
  char buf[128];
  for (const auto& d : report.dims) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%s\n", d.pair_index, d.inv_freq, d.wavelength,
                  d.completes_full_rotation ? "true" : "false");
    out += buf;
  }
  return out;
}

json ring_run_json(const RingRunInfo& info, const ringsim::RingResult& ring,
                   const ringsim::Matrix& oracle) {
  json schedule = json::array();
  for (const auto& s : ring.trace.steps) {
    schedule.push_back({{"step", s.step}, {"device", s.device}, {"kv_origin", s.kv_origin}});
  }
  json out{{"seq_len", info.seq_len},
           {"head_dim", info.head_dim},
           {"devices", info.mesh.devices},
           {"q_chunk", info.mesh.q_chunk},
           {"kv_chunk", info.mesh.kv_chunk},
           {"seed", info.seed},
           {"segments", info.segment_lengths},
           {"max_abs_error_vs_oracle", ringsim::max_abs_diff(ring.output, oracle)},
           {"max_rel_error_vs_oracle", ringsim::max_rel_diff(ring.output, oracle)},
           {"transfers", ring.trace.transfer_count()},
           {"schedule", schedule}};
  return out;
}

std::string matrix_csv(const ringsim::Matrix& m) {
  std::string out;
  char buf[40];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) {
        out += ',';
      }
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

json chunk_plan_json(const memplan::ChunkPlan& plan) {
  return json{{"devices", plan.devices},     {"seq_len", plan.seq_len},
              {"q_chunk", plan.q_chunk},     {"kv_chunk", plan.kv_chunk},
              {"per_device", plan.per_device()}, {"q_chunks", plan.q_chunks()},
              {"kv_chunks", plan.kv_chunks()}};
}

json memory_report_json(const memplan::MemoryReport& report) {
  json terms = json::array();
  for (const auto& t : report.terms) {
    terms.push_back({{"name", t.name}, {"bytes", t.bytes}, {"human", memplan::format_gib(t.bytes)}});
  }
  return json{{"plan", chunk_plan_json(report.plan)},
              {"lookup_table_bytes", report.lookup_table_bytes},
              {"lookup_table_human", memplan::format_gib(report.lookup_table_bytes)},
              {"terms", terms},
              {"total_bytes", report.total_bytes},
              {"budget_bytes", report.budget_bytes ? json(*report.budget_bytes) : json(nullptr)},
              {"fits", report.fits}};
}

json scenario_json(const memplan::ScenarioComparison& cmp) {
  return json{{"baseline", chunk_plan_json(cmp.baseline)},
              {"candidate", chunk_plan_json(cmp.candidate)},
              {"baseline_bytes", cmp.baseline_bytes},
              {"candidate_bytes", cmp.candidate_bytes},
              {"delta_bytes", cmp.delta_bytes},
              {"delta_human", memplan::format_gib(static_cast<std::uint64_t>(
                                  cmp.delta_bytes < 0 ? -cmp.delta_bytes : cmp.delta_bytes))},
              {"ratio", cmp.ratio},
              {"note", cmp.note}};
}

json niah_document_json(const niah::NiahDocument& doc, const niah::NiahCase& spec) {
  return json{{"haystack_tokens", spec.haystack_tokens},
              {"depth_percent", spec.depth_percent},
              {"seed", spec.seed},
              {"expected", doc.expected},
              {"question", doc.question},
              {"needle_sentence_index", doc.needle_sentence_index},
              {"sentence_count", doc.sentence_count},
              {"needle_char_offset", doc.needle_char_offset},
              {"token_count", doc.token_count},
              {"document", doc.document}};
}

json niah_score_json(std::string_view expected, const niah::ScoreResult& r) {
  return json{{"expected", expected},
              {"verdict", niah::to_string(r.verdict)},
              {"matched_prefix_len", r.matched_prefix_len}};
}

json niah_grid_json(const niah::GridResult& grid) {
  json cells = json::array();
  for (std::size_t li = 0; li < grid.lengths.size(); ++li) {
    for (std::size_t di = 0; di < grid.depths.size(); ++di) {
      const auto& c = grid.cell(li, di);
      cells.push_back({{"length", grid.lengths[li]},
                       {"depth", grid.depths[di]},
                       {"trials", c.trials},
                       {"exact", c.exact},
                       {"truncated", c.truncated},
                       {"wrong", c.wrong},
                       {"empty", c.empty},
                       {"errors", c.errors},
                       {"error", c.has_error()},
                       {"exact_rate", optional_rate(c, niah::Verdict::kExact)},
                       {"truncated_rate", optional_rate(c, niah::Verdict::kTruncated)},
                       {"wrong_rate", optional_rate(c, niah::Verdict::kWrong)}});
    }
  }
  json records = json::array();
  for (const auto& r : grid.records) {
    records.push_back(
        {{"length", r.length},
         {"depth", r.depth},
         {"trial", r.trial},
         {"seed", r.seed},
         {"expected", r.expected},
         {"answer", r.answer ? json(*r.answer) : json(nullptr)},
         {"verdict", r.score ? json(niah::to_string(r.score->verdict)) : json(nullptr)},
         {"matched_prefix_len", r.score ? json(r.score->matched_prefix_len) : json(nullptr)},
         {"attempts", r.attempts},
         {"error", r.error.empty() ? json(nullptr) : json(r.error)}});
  }
  return json{{"lengths", grid.lengths}, {"depths", grid.depths}, {"cells", cells},
              {"records", records}};
}

json recipe_summary_json(const recipe::RecipeManifest& m) {
  json phases = json::array();
  for (const auto& p : m.phases) {
    std::uint64_t sum = 0;
    for (const auto& s : p.sequences) {
      sum += s.subtotal();
    }
    phases.push_back({{"id", p.id},
                      {"kind", recipe::to_string(p.kind)},
                      {"token_budget", p.token_budget},
                      {"sequence_subtotal", sum},
                      {"rope_theta", p.rope_theta},
                      {"purpose", p.purpose}});
  }
  std::uint64_t all = 0;
  for (const auto& p : m.phases) {
    all += p.token_budget;
  }
  return json{{"base_model", m.base_model},
              {"phases", phases},
              {"pretraining_tokens", recipe::pretraining_tokens(m)},
              {"total_tokens", all}};
}

json recipe_validation_json(const std::vector<recipe::Violation>& violations) {
  json list = json::array();
  for (const auto& v : violations) {
    list.push_back({{"phase", v.phase},
                    {"field", v.field},
                    {"expected", v.expected},
                    {"actual", v.actual},
                    {"message", v.message()}});
  }
  return json{{"ok", violations.empty()}, {"violations", list}};
}

}  // namespace longctx::serialize
