// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0

#include "longctx/memplan.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "longctx/error.hpp"

namespace longctx::memplan {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw_domain_error("lookup table size overflows 64-bit byte count");
  }
  return out;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw_domain_error("memory total overflows 64-bit byte count");
  }
  return out;
}

bool is_power_of_two(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

// Ascending divisors of n inside [lo, hi].
std::vector<std::uint64_t> divisors_in(std::uint64_t n, std::uint64_t lo, std::uint64_t hi,
                                       bool power_of_two) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 1; i <= n / i; ++i) {
    if (n % i != 0) {
      continue;
    }
    for (const std::uint64_t d : {i, n / i}) {
      if (d >= lo && d <= hi && (!power_of_two || is_power_of_two(d))) {
        out.push_back(d);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

void ChunkPlan::validate() const {
  if (devices == 0 || seq_len == 0 || q_chunk == 0 || kv_chunk == 0) {
    throw_invalid_argument("chunk plan fields must all be positive");
  }
  if (seq_len % devices != 0) {
    throw_invalid_argument("devices " + std::to_string(devices) + " do not divide seq_len " +
                           std::to_string(seq_len));
  }
  const std::uint64_t part = seq_len / devices;
  if (part % q_chunk != 0) {
    throw_invalid_argument("q_chunk " + std::to_string(q_chunk) +
                           " does not divide the per-device length " + std::to_string(part));
  }
  if (part % kv_chunk != 0) {
    throw_invalid_argument("kv_chunk " + std::to_string(kv_chunk) +
                           " does not divide the per-device length " + std::to_string(part));
  }
}

std::uint64_t lookup_table_bytes(const ChunkPlan& plan) {
  plan.validate();
  std::uint64_t bytes = plan.devices;
  bytes = checked_mul(bytes, plan.q_chunks());
  bytes = checked_mul(bytes, plan.kv_chunks());
  bytes = checked_mul(bytes, plan.seq_len);
  return checked_mul(bytes, kLookupElementBytes);
}

MemoryReport memory_report(const ChunkPlan& plan, std::span<const MemoryTerm> extra_terms,
                           std::optional<std::uint64_t> budget_bytes) {
  MemoryReport report;
  report.plan = plan;
  report.lookup_table_bytes = lookup_table_bytes(plan);
  report.terms.push_back(MemoryTerm{"lookup_table", report.lookup_table_bytes});
  report.total_bytes = report.lookup_table_bytes;
  for (const MemoryTerm& t : extra_terms) {
    if (t.name.empty()) {
      throw_invalid_argument("memory terms must be named");
    }
    report.terms.push_back(t);
    report.total_bytes = checked_add(report.total_bytes, t.bytes);
  }
  report.budget_bytes = budget_bytes;
  report.fits = !budget_bytes || report.total_bytes <= *budget_bytes;
  return report;
}

std::optional<ChunkPlan> search_chunk_plan(std::uint64_t devices, std::uint64_t seq_len,
                                           std::uint64_t budget_bytes,
                                           const ChunkConstraints& constraints) {
  if (budget_bytes == 0) {
    throw_invalid_argument("budget must be positive");
  }
  if (devices == 0 || seq_len == 0 || seq_len % devices != 0) {
    throw_invalid_argument("devices must be positive and divide seq_len");
  }
  const std::uint64_t part = seq_len / devices;
  const auto q_sizes = divisors_in(part, constraints.min_q_chunk, constraints.max_q_chunk,
                                   constraints.power_of_two);
  const auto kv_sizes = divisors_in(part, constraints.min_kv_chunk, constraints.max_kv_chunk,
                                    constraints.power_of_two);
  for (const std::uint64_t cq : q_sizes) {
    // The table shrinks as kv_chunk grows, so the first fit is the smallest.
    for (const std::uint64_t ckv : kv_sizes) {
      const ChunkPlan plan{devices, seq_len, cq, ckv};
      std::uint64_t bytes = 0;
      try {
        bytes = lookup_table_bytes(plan);
      } catch (const Error&) {
        continue;  // overflow: certainly over budget
      }
      if (bytes <= budget_bytes) {
        return plan;
      }
    }
  }
  return std::nullopt;
}

ScenarioComparison scenario_report(const ChunkPlan& baseline, const ChunkPlan& candidate) {
  if (baseline.devices != candidate.devices || baseline.seq_len != candidate.seq_len) {
    throw_invalid_argument("scenario plans must share devices and seq_len");
  }
  ScenarioComparison cmp;
  cmp.baseline = baseline;
  cmp.candidate = candidate;
  cmp.baseline_bytes = lookup_table_bytes(baseline);
  cmp.candidate_bytes = lookup_table_bytes(candidate);
  cmp.delta_bytes = static_cast<std::int64_t>(cmp.baseline_bytes) -
                    static_cast<std::int64_t>(cmp.candidate_bytes);
  cmp.ratio = static_cast<double>(cmp.baseline_bytes) / static_cast<double>(cmp.candidate_bytes);
  cmp.note =
      "lookup-table term only; compiler-reported whole-graph peak differences (186 GB for "
      "1024/2048 vs 2048/4096 chunks at 524288 tokens on 8 devices) include buffers this "
      "model does not represent";
  return cmp;
}

std::string format_gib(std::uint64_t bytes) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f GiB", static_cast<double>(bytes) / (1024.0 * 1024.0 * 1024.0));
  return buf;
}

}  // namespace longctx::memplan
