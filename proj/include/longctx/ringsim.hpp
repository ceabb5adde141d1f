// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale attention simulator: an exact masked-softmax reference, a
// chunked online-softmax kernel, and a ring schedule in which each simulated
// device keeps its query partition while key/value partitions travel around
// the ring. All arithmetic is double precision.
//
// Masking: token i may attend to token j iff j <= i (when causal) and both
// carry the same segment id. Self-attention is always allowed.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace longctx::ringsim {

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct AttentionProblem {
  Matrix q;
  Matrix k;
  Matrix v;
  std::vector<std::int64_t> segment_ids;
  std::optional<double> scale;  // defaults to 1/sqrt(head_dim)
  bool causal = true;

  std::size_t seq_len() const noexcept { return q.rows(); }
  std::size_t head_dim() const noexcept { return q.cols(); }
  double effective_scale() const;

  /// Shapes agree, segment ids non-negative and non-decreasing.
  void validate() const;

  bool may_attend(std::size_t query, std::size_t key) const noexcept {
    return (!causal || key <= query) && segment_ids[query] == segment_ids[key];
  }
};

struct RingMesh {
  std::size_t devices = 1;
  std::size_t q_chunk = 1;
  std::size_t kv_chunk = 1;

  /// devices | seq_len, and both chunk sizes divide seq_len / devices.
  void validate(std::size_t seq_len) const;
};

struct RingStep {
  std::size_t step = 0;
  std::size_t device = 0;
  std::size_t kv_origin = 0;  // partition index being processed
};

struct RingTransfer {
  std::size_t step = 0;
  std::size_t from = 0;
  std::size_t to = 0;
  std::size_t partition = 0;
};

struct RingTrace {
  std::size_t devices = 0;
  std::vector<RingStep> steps;  // in execution order
  std::vector<RingTransfer> transfers;

  std::size_t transfer_count() const noexcept { return transfers.size(); }
};

struct RingResult {
  Matrix output;
  RingTrace trace;
  std::optional<Matrix> weights;  // seq_len x seq_len, present when requested
};

/// Reference path: one full score row at a time, masked, max-subtracted softmax.
Matrix exact_attention(const AttentionProblem& problem);

/// Attention weights of the reference path (rows sum to 1, masked entries 0).
Matrix exact_attention_weights(const AttentionProblem& problem);

/// Streaming accumulation over key/value chunks of size kv_chunk for each
/// query chunk of size q_chunk.
Matrix blockwise_attention(const AttentionProblem& problem, std::size_t q_chunk,
                           std::size_t kv_chunk);

/// Runs the ring schedule. At step s device d processes partition (d - s) mod P,
/// received from device (d - 1) mod P. Devices run sequentially in index
/// order, so results are bit-stable.
RingResult ring_attention(const AttentionProblem& problem, const RingMesh& mesh,
                          bool export_weights = false);

struct DospLimits {
  std::uint64_t ring = 0;
  std::uint64_t all_to_all = 0;
};

/// Degree of sequence parallelism: the ring scales with the device count,
/// head-transposing all-to-all schemes are capped by the KV head count.
DospLimits dosp_limits(std::uint64_t kv_heads, std::uint64_t devices);

/// Segment ids for consecutive documents of the given lengths.
std::vector<std::int64_t> segments_from_lengths(std::span<const std::size_t> lengths);

/// Q, K, V drawn uniformly from [-1, 1) with a fixed 64-bit Mersenne twister
/// stream; identical seeds give identical problems on every platform.
AttentionProblem random_problem(std::size_t seq_len, std::size_t head_dim,
                                std::span<const std::size_t> segment_lengths,
                                std::uint64_t seed);

double max_abs_diff(const Matrix& a, const Matrix& b);

/// max |a - b| / max(|b|, floor) over all entries.
double max_rel_diff(const Matrix& a, const Matrix& b, double floor = 1e-12);

}  // namespace longctx::ringsim
