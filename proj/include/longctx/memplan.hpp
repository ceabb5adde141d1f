// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0
//
// Byte model for the chunk-to-segment lookup table that chunked ring
// attention materializes at compile time, plus a search for the smallest
// chunk sizes that keep it within a budget.
//
// The table has shape [devices, 1, q_chunks, kv_chunks, seq_len] of int32,
// where q_chunks and kv_chunks count chunks within one device's partition.
// The unit axis is a broadcast dimension and contributes a factor of 1.

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace longctx::memplan {

/// Element width of the table (int32 elements). Fixed by the modeled tensor.
inline constexpr std::uint64_t kLookupElementBytes = 4;

struct ChunkPlan {
  std::uint64_t devices = 1;
  std::uint64_t seq_len = 1;
  std::uint64_t q_chunk = 1;
  std::uint64_t kv_chunk = 1;

  /// All fields positive; devices | seq_len; both chunks divide per_device().
  void validate() const;

  std::uint64_t per_device() const { return seq_len / devices; }
  std::uint64_t q_chunks() const { return per_device() / q_chunk; }
  std::uint64_t kv_chunks() const { return per_device() / kv_chunk; }

  friend bool operator==(const ChunkPlan&, const ChunkPlan&) = default;
};

/// devices * q_chunks * kv_chunks * seq_len * 4. Throws on invalid plans and
/// on results that do not fit in 64 bits.
std::uint64_t lookup_table_bytes(const ChunkPlan& plan);

struct MemoryTerm {
  std::string name;
  std::uint64_t bytes = 0;
};

struct MemoryReport {
  ChunkPlan plan;
  std::uint64_t lookup_table_bytes = 0;
  std::vector<MemoryTerm> terms;  // lookup table first, then caller terms
  std::uint64_t total_bytes = 0;
  std::optional<std::uint64_t> budget_bytes;
  bool fits = true;  // total <= budget, or true without a budget
};

/// Coarse additive model: the lookup table plus any caller-supplied terms.
MemoryReport memory_report(const ChunkPlan& plan, std::span<const MemoryTerm> extra_terms = {},
                           std::optional<std::uint64_t> budget_bytes = std::nullopt);

struct ChunkConstraints {
  std::uint64_t min_q_chunk = 1;
  std::uint64_t max_q_chunk = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t min_kv_chunk = 1;
  std::uint64_t max_kv_chunk = std::numeric_limits<std::uint64_t>::max();
  bool power_of_two = true;
};

/// Smallest q_chunk (then smallest kv_chunk) whose lookup table fits the
/// budget. std::nullopt when nothing fits.
std::optional<ChunkPlan> search_chunk_plan(std::uint64_t devices, std::uint64_t seq_len,
                                           std::uint64_t budget_bytes,
                                           const ChunkConstraints& constraints = {});

struct ScenarioComparison {
  ChunkPlan baseline;
  ChunkPlan candidate;
  std::uint64_t baseline_bytes = 0;
  std::uint64_t candidate_bytes = 0;
  std::int64_t delta_bytes = 0;  // baseline - candidate
  double ratio = 0.0;            // baseline / candidate
  std::string note;
};

/// Compares the lookup-table term of two plans over the same devices and
/// sequence length. Only that term is modeled.
ScenarioComparison scenario_report(const ChunkPlan& baseline, const ChunkPlan& candidate);

/// "32.00 GiB" style rendering; informational only.
std::string format_gib(std::uint64_t bytes);

}  // namespace longctx::memplan
