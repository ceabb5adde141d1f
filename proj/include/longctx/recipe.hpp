// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0
//
// Phased context-extension training recipe as data: token budgets, sequence
// length breakdowns, source mixes and RoPE theta per phase, with a validator
// and a canonical JSON form (schema version 1).

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace longctx::recipe {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kMixTolerance = 1e-9;
inline constexpr double kDefaultSubtotalTolerance = 0.05;

enum class PhaseKind { kContinualPretraining, kSupervisedFineTuning };

const char* to_string(PhaseKind kind) noexcept;

/// A slice of a phase's tokens at one sequence length (or a length range).
/// Exactly one of sequence_count / token_subtotal is set; a count needs a
/// single length.
struct SequenceSpec {
  std::uint64_t seq_len_min = 0;
  std::uint64_t seq_len_max = 0;
  std::optional<std::uint64_t> sequence_count;
  std::optional<std::uint64_t> token_subtotal;
  std::string note;

  /// count * length, or the stated subtotal.
  std::uint64_t subtotal() const;

  friend bool operator==(const SequenceSpec&, const SequenceSpec&) = default;
};

struct PhasePlan {
  std::string id;
  int order = 0;
  PhaseKind kind = PhaseKind::kContinualPretraining;
  std::uint64_t token_budget = 0;
  double subtotal_tolerance = kDefaultSubtotalTolerance;  // relative
  std::vector<SequenceSpec> sequences;
  std::map<std::string, double> mix;  // empty when the source mix is unstated
  double rope_theta = 0.0;
  std::string purpose;
  std::string provenance;

  friend bool operator==(const PhasePlan&, const PhasePlan&) = default;
};

struct Checkpoint {
  std::string name;
  std::string after_phase;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

struct RecipeManifest {
  int schema = kSchemaVersion;
  std::string base_model;
  std::vector<PhasePlan> phases;
  std::vector<Checkpoint> checkpoints;

  friend bool operator==(const RecipeManifest&, const RecipeManifest&) = default;
};

struct Violation {
  std::string phase;  // empty for manifest-level problems
  std::string field;
  std::string expected;
  std::string actual;

  std::string message() const;
};

/// Built-in four-phase plan (phase 2 split into 2a and 2b).
RecipeManifest builtin_recipe();

/// Empty iff every invariant holds. Subtotals are recomputed from counts and
/// lengths rather than trusted.
std::vector<Violation> validate(const RecipeManifest& manifest);

/// Sum of token budgets over continual-pretraining phases.
std::uint64_t pretraining_tokens(const RecipeManifest& manifest);

/// Canonical JSON: sorted keys, two-space indent, trailing newline.
std::string emit_manifest(const RecipeManifest& manifest);

/// Parses without checking invariants (missing or mistyped fields still
/// throw Error(kParse)).
RecipeManifest parse_manifest(std::string_view text);

/// Parses and validates. Throws Error(kParse) with a descriptive message on
/// malformed JSON, missing fields, or any violation.
RecipeManifest load_manifest(std::string_view text);

}  // namespace longctx::recipe
