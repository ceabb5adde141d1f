// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0

#include "longctx/recipe.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

#include "longctx/error.hpp"

namespace longctx::recipe {

namespace {

using nlohmann::json;

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

SequenceSpec fixed_subtotal(std::uint64_t len, std::uint64_t tokens, std::string note) {
  return SequenceSpec{len, len, std::nullopt, tokens, std::move(note)};
}

SequenceSpec ranged_subtotal(std::uint64_t lo, std::uint64_t hi, std::uint64_t tokens,
                             std::string note) {
  return SequenceSpec{lo, hi, std::nullopt, tokens, std::move(note)};
}

SequenceSpec counted(std::uint64_t len, std::uint64_t count, std::string note) {
  return SequenceSpec{len, len, count, std::nullopt, std::move(note)};
}

PhaseKind kind_from_string(const std::string& s) {
  if (s == "continual_pretraining") {
    return PhaseKind::kContinualPretraining;
  }
  if (s == "sft") {
    return PhaseKind::kSupervisedFineTuning;
  }
  throw_parse_error("unknown phase kind \"" + s + "\"");
}

json to_json(const SequenceSpec& s) {
  json j;
  j["seq_len_min"] = s.seq_len_min;
  j["seq_len_max"] = s.seq_len_max;
  if (s.sequence_count) {
    j["sequence_count"] = *s.sequence_count;
  }
  if (s.token_subtotal) {
    j["token_subtotal"] = *s.token_subtotal;
  }
  j["note"] = s.note;
  return j;
}

json to_json(const PhasePlan& p) {
  json j;
  j["id"] = p.id;
  j["order"] = p.order;
  j["kind"] = to_string(p.kind);
  j["token_budget"] = p.token_budget;
  j["subtotal_tolerance"] = p.subtotal_tolerance;
  j["sequences"] = json::array();
  for (const auto& s : p.sequences) {
    j["sequences"].push_back(to_json(s));
  }
  j["mix"] = json::object();
  for (const auto& [k, v] : p.mix) {
    j["mix"][k] = v;
  }
  j["rope_theta"] = p.rope_theta;
  j["purpose"] = p.purpose;
  j["provenance"] = p.provenance;
  return j;
}

SequenceSpec sequence_from_json(const json& j) {
  SequenceSpec s;
  s.seq_len_min = j.at("seq_len_min").get<std::uint64_t>();
  s.seq_len_max = j.at("seq_len_max").get<std::uint64_t>();
  if (j.contains("sequence_count")) {
    s.sequence_count = j.at("sequence_count").get<std::uint64_t>();
  }
  if (j.contains("token_subtotal")) {
    s.token_subtotal = j.at("token_subtotal").get<std::uint64_t>();
  }
  s.note = j.value("note", "");
  return s;
}

PhasePlan phase_from_json(const json& j) {
  PhasePlan p;
  p.id = j.at("id").get<std::string>();
  p.order = j.at("order").get<int>();
  p.kind = kind_from_string(j.at("kind").get<std::string>());
  p.token_budget = j.at("token_budget").get<std::uint64_t>();
  p.subtotal_tolerance = j.value("subtotal_tolerance", kDefaultSubtotalTolerance);
  for (const json& s : j.at("sequences")) {
    p.sequences.push_back(sequence_from_json(s));
  }
  if (j.contains("mix")) {
    for (const auto& [k, v] : j.at("mix").items()) {
      p.mix[k] = v.get<double>();
    }
  }
  p.rope_theta = j.at("rope_theta").get<double>();
  p.purpose = j.value("purpose", "");
  p.provenance = j.value("provenance", "");
  return p;
}

}  // namespace

const char* to_string(PhaseKind kind) noexcept {
  return kind == PhaseKind::kContinualPretraining ? "continual_pretraining" : "sft";
}

std::uint64_t SequenceSpec::subtotal() const {
  if (sequence_count) {
    return *sequence_count * seq_len_min;
  }
  return token_subtotal.value_or(0);
}

std::string Violation::message() const {
  std::string out = phase.empty() ? "manifest" : "phase " + phase;
  out += ": " + field + " expected " + expected + ", got " + actual;
  return out;
}

RecipeManifest builtin_recipe() {
  RecipeManifest m;
  m.base_model = "Mistral-7B-Instruct-v0.2";

  PhasePlan p1;
  p1.id = "1";
  p1.order = 1;
  p1.token_budget = 1'200'000'000;
  p1.sequences = {
      fixed_subtotal(300'000, 640'000'000, "0.64B tokens packed as 300K-token sequences"),
      fixed_subtotal(600'000, 560'000'000, "0.56B tokens packed as 600K-token sequences"),
  };
  p1.mix = {{"books", 0.05}, {"code", 0.70}, {"papers", 0.10}, {"web", 0.15}};
  p1.rope_theta = 25'000'000;
  p1.purpose = "long-context continual pretraining on naturally long documents";
  p1.provenance = "300K and 600K read as decimal thousands; mix applied at phase level";
  m.phases.push_back(p1);

  PhasePlan p2a;
  p2a.id = "2a";
  p2a.order = 2;
  p2a.token_budget = 180'000'000;
  p2a.sequences = {fixed_subtotal(600'000, 180'000'000, "600K-token sequences")};
  p2a.rope_theta = 75'000'000;
  p2a.purpose = "raise the RoPE theta base to recover recall beyond 300K tokens";
  p2a.provenance = "600K read as decimal thousands";
  m.phases.push_back(p2a);

  PhasePlan p2b;
  p2b.id = "2b";
  p2b.order = 3;
  p2b.token_budget = 260'000'000;
  p2b.sequences = {ranged_subtotal(32'000, 80'000, 260'000'000, "shorter 32K-80K sequences")};
  p2b.rope_theta = 75'000'000;
  p2b.purpose = "short sequences under the new theta to repair recall at depths 0 and 100";
  p2b.provenance = "32K-80K read as decimal thousands; theta carried over from phase 2a";
  m.phases.push_back(p2b);

  PhasePlan p3;
  p3.id = "3";
  p3.order = 4;
  p3.token_budget = 200'000'000;
  p3.subtotal_tolerance = 0.25;
  p3.sequences = {
      counted(80'000, 1'200, "stated total 96M"),
      counted(256'000, 300, "stated total 77M"),
      counted(512'000, 30, "stated total 15M"),
  };
  p3.rope_theta = 75'000'000;
  p3.purpose = "long-context pretraining after moving RoPE position math to float32";
  p3.provenance =
      "budget stated as 0.2B to one significant figure, so the per-length totals (188M) are "
      "checked at +/-25%; lengths read as decimal thousands";
  m.phases.push_back(p3);

  PhasePlan p4;
  p4.id = "4";
  p4.order = 5;
  p4.kind = PhaseKind::kSupervisedFineTuning;
  p4.token_budget = 22'000'000;
  p4.sequences = {ranged_subtotal(64'000, 512'000, 22'000'000,
                                  "synthetic long documents built from question-answer pairs")};
  p4.rope_theta = 75'000'000;
  p4.purpose = "long-context supervised fine-tuning";
  p4.provenance = "64K-512K read as decimal thousands";
  m.phases.push_back(p4);

  m.checkpoints = {{"MegaBeam-Mistral-7B-300K", "1"}, {"MegaBeam-Mistral-7B-512K", "4"}};
  return m;
}

std::vector<Violation> validate(const RecipeManifest& m) {
  std::vector<Violation> out;
  auto add = [&](std::string phase, std::string field, std::string expected, std::string actual) {
    out.push_back(Violation{std::move(phase), std::move(field), std::move(expected),
                            std::move(actual)});
  };

  if (m.schema != kSchemaVersion) {
    add("", "schema", std::to_string(kSchemaVersion), std::to_string(m.schema));
  }
  if (m.base_model.empty()) {
    add("", "base_model", "non-empty", "empty");
  }
  if (m.phases.empty()) {
    add("", "phases", "at least one phase", "none");
  }

  std::set<std::string> ids;
  for (std::size_t i = 0; i < m.phases.size(); ++i) {
    const PhasePlan& p = m.phases[i];
    if (p.id.empty()) {
      add("#" + std::to_string(i), "id", "non-empty", "empty");
    } else if (!ids.insert(p.id).second) {
      add(p.id, "id", "unique", "duplicate");
    }
    if (i > 0) {
      const PhasePlan& prev = m.phases[i - 1];
      if (p.order <= prev.order) {
        add(p.id, "order", "> " + std::to_string(prev.order), std::to_string(p.order));
      }
      if (p.rope_theta < prev.rope_theta) {
        add(p.id, "rope_theta", ">= " + fmt_double(prev.rope_theta) + " (phase " + prev.id + ")",
            fmt_double(p.rope_theta));
      }
    }
    if (!(p.rope_theta > 1.0) || !std::isfinite(p.rope_theta)) {
      add(p.id, "rope_theta", "> 1", fmt_double(p.rope_theta));
    }
    if (p.token_budget == 0) {
      add(p.id, "token_budget", "> 0", "0");
    }
    if (!(p.subtotal_tolerance >= 0.0 && p.subtotal_tolerance < 1.0)) {
      add(p.id, "subtotal_tolerance", "in [0, 1)", fmt_double(p.subtotal_tolerance));
    }
    if (p.sequences.empty()) {
      add(p.id, "sequences", "at least one entry", "none");
    }

    std::uint64_t sum = 0;
    bool sequences_ok = true;
    for (std::size_t s = 0; s < p.sequences.size(); ++s) {
      const SequenceSpec& spec = p.sequences[s];
      const std::string field = "sequences[" + std::to_string(s) + "]";
      if (spec.seq_len_min == 0 || spec.seq_len_min > spec.seq_len_max) {
        add(p.id, field + ".seq_len", "0 < min <= max",
            std::to_string(spec.seq_len_min) + ".." + std::to_string(spec.seq_len_max));
        sequences_ok = false;
      }
      if (spec.sequence_count.has_value() == spec.token_subtotal.has_value()) {
        add(p.id, field, "exactly one of sequence_count or token_subtotal",
            spec.sequence_count ? "both" : "neither");
        sequences_ok = false;
        continue;
      }
      if (spec.sequence_count && spec.seq_len_min != spec.seq_len_max) {
        add(p.id, field + ".sequence_count", "a single sequence length", "a length range");
        sequences_ok = false;
        continue;
      }
      sum += spec.sequence_count ? *spec.sequence_count * spec.seq_len_min : *spec.token_subtotal;
    }
    if (sequences_ok && !p.sequences.empty() && p.token_budget > 0) {
      const double budget = static_cast<double>(p.token_budget);
      const double diff = std::abs(static_cast<double>(sum) - budget);
      if (diff > p.subtotal_tolerance * budget) {
        add(p.id, "sequences.subtotal",
            std::to_string(p.token_budget) + " +/- " + fmt_double(100.0 * p.subtotal_tolerance) +
                "%",
            std::to_string(sum));
      }
    }

    if (!p.mix.empty()) {
      double total = 0.0;
      for (const auto& [source, frac] : p.mix) {
        if (!(frac >= 0.0 && frac <= 1.0)) {
          add(p.id, "mix." + source, "in [0, 1]", fmt_double(frac));
        }
        total += frac;
      }
      if (std::abs(total - 1.0) > kMixTolerance) {
        add(p.id, "mix", "fractions summing to 1", fmt_double(total));
      }
    }
  }

  for (const Checkpoint& c : m.checkpoints) {
    if (c.name.empty()) {
      add("", "checkpoints.name", "non-empty", "empty");
    }
    if (!ids.contains(c.after_phase)) {
      add("", "checkpoints." + c.name, "an existing phase id", "\"" + c.after_phase + "\"");
    }
  }
  return out;
}

std::uint64_t pretraining_tokens(const RecipeManifest& m) {
  std::uint64_t total = 0;
  for (const PhasePlan& p : m.phases) {
    if (p.kind == PhaseKind::kContinualPretraining) {
      total += p.token_budget;
    }
  }
  return total;
}

std::string emit_manifest(const RecipeManifest& m) {
  json j;
  j["schema"] = m.schema;
  j["base_model"] = m.base_model;
  j["phases"] = json::array();
  for (const PhasePlan& p : m.phases) {
    j["phases"].push_back(to_json(p));
  }
  j["checkpoints"] = json::array();
  for (const Checkpoint& c : m.checkpoints) {
    j["checkpoints"].push_back({{"name", c.name}, {"after_phase", c.after_phase}});
  }
  return j.dump(2) + "\n";
}

RecipeManifest parse_manifest(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw_parse_error(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw_parse_error("manifest must be a JSON object");
  }

  RecipeManifest m;
  try {
    m.schema = j.at("schema").get<int>();
    if (m.schema != kSchemaVersion) {
      throw_parse_error("unsupported manifest schema " + std::to_string(m.schema));
    }
    m.base_model = j.at("base_model").get<std::string>();
    for (const json& p : j.at("phases")) {
      m.phases.push_back(phase_from_json(p));
    }
    if (j.contains("checkpoints")) {
      for (const json& c : j.at("checkpoints")) {
        m.checkpoints.push_back(
            {c.at("name").get<std::string>(), c.at("after_phase").get<std::string>()});
      }
    }
  } catch (const json::exception& e) {
    throw_parse_error(std::string("manifest field error: ") + e.what());
  }
  return m;
}

RecipeManifest load_manifest(std::string_view text) {
  RecipeManifest m = parse_manifest(text);
  const auto violations = validate(m);
  if (!violations.empty()) {
    std::string msg = "manifest violates " + std::to_string(violations.size()) + " invariant(s):";
    for (const auto& v : violations) {
      msg += "\n  " + v.message();
    }
    throw_parse_error(msg);
  }
  return m;
}

}  // namespace longctx::recipe
