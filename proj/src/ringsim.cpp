// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0

#include "longctx/ringsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "longctx/error.hpp"

namespace longctx::ringsim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

// Running softmax statistics for one query row.
struct RowState {
  double max = kNegInf;
  double denom = 0.0;
};

struct OnlineAccumulator {
  std::vector<RowState> rows;
  Matrix acc;

  OnlineAccumulator(std::size_t seq_len, std::size_t head_dim)
      : rows(seq_len), acc(seq_len, head_dim) {}
};

// Folds keys [kv_begin, kv_end) into query rows [q_begin, q_end). When
// `score_log` is set, the raw scaled score of every attended pair is stored
// there; untouched entries remain unset.
void accumulate_block(const AttentionProblem& p, double scale, std::size_t q_begin,
                      std::size_t q_end, std::size_t kv_begin, std::size_t kv_end,
                      OnlineAccumulator& state, Matrix* score_log,
                      std::vector<double>& scratch) {
  const std::size_t width = kv_end - kv_begin;
  scratch.resize(width);
  for (std::size_t i = q_begin; i < q_end; ++i) {
    double block_max = kNegInf;
    bool any = false;
    for (std::size_t j = kv_begin; j < kv_end; ++j) {
      if (!p.may_attend(i, j)) {
        scratch[j - kv_begin] = kNegInf;
        continue;
      }
      const double s = scale * dot(p.q.row(i), p.k.row(j));
      scratch[j - kv_begin] = s;
      block_max = std::max(block_max, s);
      any = true;
      if (score_log != nullptr) {
        (*score_log)(i, j) = s;
      }
    }
    if (!any) {
      continue;
    }

    RowState& rs = state.rows[i];
    const double new_max = std::max(rs.max, block_max);
    const double correction = rs.max == kNegInf ? 0.0 : std::exp(rs.max - new_max);
    std::span<double> out = state.acc.row(i);
    for (double& x : out) {
      x *= correction;
    }
    double denom = rs.denom * correction;
    for (std::size_t j = kv_begin; j < kv_end; ++j) {
      const double s = scratch[j - kv_begin];
      if (s == kNegInf) {
        continue;
      }
      const double w = std::exp(s - new_max);
      denom += w;
      std::span<const double> vrow = p.v.row(j);
      for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] += w * vrow[c];
      }
    }
    rs.max = new_max;
    rs.denom = denom;
  }
}

Matrix finalize(OnlineAccumulator& state) {
  Matrix out = std::move(state.acc);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const double denom = state.rows[i].denom;
    for (double& x : out.row(i)) {
      x /= denom;
    }
  }
  return out;
}

void check_chunk(std::size_t extent, std::size_t chunk, const char* what) {
  if (chunk == 0 || extent % chunk != 0) {
    throw_invalid_argument(std::string(what) + " " + std::to_string(chunk) +
                           " does not divide " + std::to_string(extent));
  }
}

// Uniform double in [0, 1) from the top 53 bits.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

double AttentionProblem::effective_scale() const {
  if (scale) {
    return *scale;
  }
  return 1.0 / std::sqrt(static_cast<double>(head_dim()));
}

void AttentionProblem::validate() const {
  const std::size_t s = q.rows();
  const std::size_t d = q.cols();
  if (s == 0 || d == 0) {
    throw_invalid_argument("attention problem must have at least one token and one feature");
  }
  if (k.rows() != s || v.rows() != s || k.cols() != d || v.cols() != d) {
    throw_invalid_argument("Q, K and V must share shape (" + std::to_string(s) + " x " +
                           std::to_string(d) + ")");
  }
  if (segment_ids.size() != s) {
    throw_invalid_argument("segment_ids length " + std::to_string(segment_ids.size()) +
                           " does not match sequence length " + std::to_string(s));
  }
  for (std::size_t i = 0; i < s; ++i) {
    if (segment_ids[i] < 0) {
      throw_invalid_argument("segment ids must be non-negative");
    }
    if (i > 0 && segment_ids[i] < segment_ids[i - 1]) {
      throw_invalid_argument("segment ids must be non-decreasing (documents are contiguous)");
    }
  }
  if (scale && !std::isfinite(*scale)) {
    throw_invalid_argument("scale must be finite");
  }
}

void RingMesh::validate(std::size_t seq_len) const {
  check_chunk(seq_len, devices, "device count");
  const std::size_t per_device = seq_len / devices;
  check_chunk(per_device, q_chunk, "query chunk");
  check_chunk(per_device, kv_chunk, "key/value chunk");
}

Matrix exact_attention_weights(const AttentionProblem& problem) {
  problem.validate();
  const std::size_t s = problem.seq_len();
  const double scale = problem.effective_scale();
  Matrix weights(s, s);
  std::vector<double> scores(s);
  for (std::size_t i = 0; i < s; ++i) {
    double row_max = kNegInf;
    for (std::size_t j = 0; j < s; ++j) {
      scores[j] = problem.may_attend(i, j) ? scale * dot(problem.q.row(i), problem.k.row(j))
                                           : kNegInf;
      row_max = std::max(row_max, scores[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      if (scores[j] != kNegInf) {
        weights(i, j) = std::exp(scores[j] - row_max);
        denom += weights(i, j);
      }
    }
    for (double& w : weights.row(i)) {
      w /= denom;
    }
  }
  return weights;
}

Matrix exact_attention(const AttentionProblem& problem) {
  const Matrix weights = exact_attention_weights(problem);
  const std::size_t s = problem.seq_len();
  const std::size_t d = problem.head_dim();
  Matrix out(s, d);
  for (std::size_t i = 0; i < s; ++i) {
    std::span<double> orow = out.row(i);
    for (std::size_t j = 0; j < s; ++j) {
      const double w = weights(i, j);
      if (w == 0.0) {
        continue;
      }
      std::span<const double> vrow = problem.v.row(j);
      for (std::size_t c = 0; c < d; ++c) {
        orow[c] += w * vrow[c];
      }
    }
  }
  return out;
}

Matrix blockwise_attention(const AttentionProblem& problem, std::size_t q_chunk,
                           std::size_t kv_chunk) {
  problem.validate();
  const std::size_t s = problem.seq_len();
  check_chunk(s, q_chunk, "query chunk");
  check_chunk(s, kv_chunk, "key/value chunk");

  const double scale = problem.effective_scale();
  OnlineAccumulator state(s, problem.head_dim());
  std::vector<double> scratch;
  for (std::size_t qb = 0; qb < s; qb += q_chunk) {
    for (std::size_t kb = 0; kb < s; kb += kv_chunk) {
      accumulate_block(problem, scale, qb, qb + q_chunk, kb, kb + kv_chunk, state, nullptr,
                       scratch);
    }
  }
  return finalize(state);
}

RingResult ring_attention(const AttentionProblem& problem, const RingMesh& mesh,
                          bool export_weights) {
  problem.validate();
  const std::size_t s = problem.seq_len();
  mesh.validate(s);

  const std::size_t devices = mesh.devices;
  const std::size_t part = s / devices;
  const double scale = problem.effective_scale();

  RingResult result;
  result.trace.devices = devices;
  result.trace.steps.reserve(devices * devices);
  result.trace.transfers.reserve(devices * (devices - 1));

  OnlineAccumulator state(s, problem.head_dim());
  std::optional<Matrix> scores;
  if (export_weights) {
    scores.emplace(s, s, kNegInf);
  }
  std::vector<double> scratch;

  for (std::size_t step = 0; step < devices; ++step) {
    for (std::size_t dev = 0; dev < devices; ++dev) {
      const std::size_t origin = (dev + devices - step % devices) % devices;
      if (step > 0) {
        result.trace.transfers.push_back(
            RingTransfer{step, (dev + devices - 1) % devices, dev, origin});
      }
      result.trace.steps.push_back(RingStep{step, dev, origin});

      const std::size_t q_begin = dev * part;
      const std::size_t kv_begin = origin * part;
      for (std::size_t qb = q_begin; qb < q_begin + part; qb += mesh.q_chunk) {
        for (std::size_t kb = kv_begin; kb < kv_begin + part; kb += mesh.kv_chunk) {
          accumulate_block(problem, scale, qb, qb + mesh.q_chunk, kb, kb + mesh.kv_chunk, state,
                           scores ? &*scores : nullptr, scratch);
        }
      }
    }
  }

  if (scores) {
    // Weights from the ring's own final statistics; pairs never attended
    // keep an exact zero.
    Matrix weights(s, s);
    for (std::size_t i = 0; i < s; ++i) {
      const RowState& rs = state.rows[i];
      for (std::size_t j = 0; j < s; ++j) {
        const double sc = (*scores)(i, j);
        if (sc != kNegInf) {
          weights(i, j) = std::exp(sc - rs.max) / rs.denom;
        }
      }
    }
    result.weights = std::move(weights);
  }
  result.output = finalize(state);
  return result;
}

DospLimits dosp_limits(std::uint64_t kv_heads, std::uint64_t devices) {
  if (kv_heads == 0 || devices == 0) {
    throw_invalid_argument("dosp_limits: kv_heads and devices must be >= 1");
  }
  return DospLimits{devices, std::min(devices, kv_heads)};
}

std::vector<std::int64_t> segments_from_lengths(std::span<const std::size_t> lengths) {
  std::vector<std::int64_t> ids;
  std::int64_t doc = 0;
  for (const std::size_t len : lengths) {
    if (len == 0) {
      throw_invalid_argument("document lengths must be positive");
    }
    ids.insert(ids.end(), len, doc);
    ++doc;
  }
  return ids;
}

AttentionProblem random_problem(std::size_t seq_len, std::size_t head_dim,
                                std::span<const std::size_t> segment_lengths,
                                std::uint64_t seed) {
  AttentionProblem p;
  if (segment_lengths.empty()) {
    p.segment_ids.assign(seq_len, 0);
  } else {
    p.segment_ids = segments_from_lengths(segment_lengths);
    if (p.segment_ids.size() != seq_len) {
      throw_invalid_argument("document lengths sum to " + std::to_string(p.segment_ids.size()) +
                             ", expected " + std::to_string(seq_len));
    }
  }
  std::mt19937_64 rng(seed);
  for (Matrix* m : {&p.q, &p.k, &p.v}) {
    *m = Matrix(seq_len, head_dim);
    for (double& x : m->values()) {
      x = 2.0 * unit_uniform(rng) - 1.0;
    }
  }
  p.validate();
  return p;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw_invalid_argument("max_abs_diff: shape mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  }
  return worst;
}

double max_rel_diff(const Matrix& a, const Matrix& b, double floor) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw_invalid_argument("max_rel_diff: shape mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    const double denom = std::max(std::abs(b.values()[i]), floor);
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]) / denom);
  }
  return worst;
}

}  // namespace longctx::ringsim
