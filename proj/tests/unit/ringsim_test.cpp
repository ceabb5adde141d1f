// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0

#include "longctx/ringsim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "longctx/error.hpp"
#include "oracles.hpp"

namespace {

using namespace longctx::ringsim;

oracle::Dense dense(const Matrix& m) {
  return {m.rows(), m.cols(), std::vector<double>(m.values().begin(), m.values().end())};
}

std::vector<std::size_t> divisors(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i <= n; ++i) {
    if (n % i == 0) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> random_layout(std::mt19937_64& rng, std::size_t s) {
  std::uniform_int_distribution<std::size_t> docs(1, 5);
  const std::size_t n = std::min(docs(rng), s);
  std::set<std::size_t> cuts;
  std::uniform_int_distribution<std::size_t> cut(1, s - 1);
  while (s > 1 && cuts.size() + 1 < n) cuts.insert(cut(rng));
  std::vector<std::size_t> lengths;
  std::size_t prev = 0;
  for (std::size_t c : cuts) {
    lengths.push_back(c - prev);
    prev = c;
  }
  lengths.push_back(s - prev);
  return lengths;
}

TEST(ExactAttention, SingleTokenReturnsV) {
  const auto p = random_problem(1, 4, {}, 9);
  EXPECT_EQ(exact_attention(p), p.v);
}

TEST(ExactAttention, UniformScoresAverageV) {
  AttentionProblem p;
  p.q = Matrix(2, 2, 0.0);
  p.k = Matrix(2, 2, 0.0);
  p.v = Matrix(2, 2);
  p.v(0, 0) = 1.0;
  p.v(0, 1) = 3.0;
  p.v(1, 0) = 5.0;
  p.v(1, 1) = -1.0;
  p.segment_ids = {0, 0};
  const Matrix out = exact_attention(p);
  EXPECT_DOUBLE_EQ(out(1, 0), 3.0);
  EXPECT_DOUBLE_EQ(out(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(out(0, 0), 1.0);
}

TEST(ExactAttention, MatchesBruteForce) {
  const std::vector<std::size_t> seg{4, 4};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = random_problem(8, 6, seg, seed);
    oracle::Dense out, w;
    oracle::brute_attention(dense(p.q), dense(p.k), dense(p.v), p.segment_ids, true, out, w);
    const auto got = exact_attention(p);
    for (std::size_t i = 0; i < out.v.size(); ++i) {
      ASSERT_NEAR(got.values()[i], out.v[i], 1e-10);
    }
    const auto gw = exact_attention_weights(p);
    for (std::size_t i = 0; i < w.v.size(); ++i) {
      ASSERT_NEAR(gw.values()[i], w.v[i], 1e-12);
    }
  }
}

TEST(ExactAttention, NonCausalMatchesBruteForce) {
  auto p = random_problem(12, 4, std::vector<std::size_t>{5, 7}, 4);
  p.causal = false;
  oracle::Dense out, w;
  oracle::brute_attention(dense(p.q), dense(p.k), dense(p.v), p.segment_ids, false, out, w);
  const auto got = exact_attention(p);
  for (std::size_t i = 0; i < out.v.size(); ++i) EXPECT_NEAR(got.values()[i], out.v[i], 1e-10);
}

TEST(Blockwise, SingleChunkMatchesExact) {
  const auto p = random_problem(32, 8, std::vector<std::size_t>{10, 22}, 1);
  EXPECT_LE(max_abs_diff(blockwise_attention(p, 32, 32), exact_attention(p)), 1e-12);
}

TEST(Blockwise, ChunkSizeIndependent) {
  const auto p = random_problem(64, 16, {}, 2);
  const auto exact = exact_attention(p);
  const auto a = blockwise_attention(p, 8, 16);
  const auto b = blockwise_attention(p, 16, 8);
  EXPECT_LE(max_rel_diff(a, exact), 1e-6);
  EXPECT_LE(max_rel_diff(b, exact), 1e-6);
  EXPECT_LE(max_abs_diff(a, b), 1e-12);
}

TEST(Blockwise, RejectsNonDividingChunks) {
  const auto p = random_problem(12, 4, {}, 3);
  EXPECT_THROW(blockwise_attention(p, 5, 4), longctx::Error);
  EXPECT_THROW(blockwise_attention(p, 4, 0), longctx::Error);
}

TEST(Ring, SingleDeviceIsBlockwise) {
  const auto p = random_problem(48, 8, std::vector<std::size_t>{20, 28}, 5);
  const auto r = ring_attention(p, {1, 8, 16});
  EXPECT_EQ(r.output, blockwise_attention(p, 8, 16));
  EXPECT_EQ(r.trace.transfer_count(), 0u);
}

TEST(Ring, FourDevices) {
  const auto p = random_problem(64, 16, {}, 6);
  const auto r = ring_attention(p, {4, 8, 16});
  EXPECT_LE(max_rel_diff(r.output, exact_attention(p)), 1e-6);
  EXPECT_EQ(r.trace.transfer_count(), 12u);
}

TEST(Ring, CrossDocumentWeightsAreExactlyZero) {
  const auto p = random_problem(128, 8, std::vector<std::size_t>{50, 78}, 7);
  const auto r = ring_attention(p, {8, 4, 8}, true);
  ASSERT_TRUE(r.weights);
  for (std::size_t i = 0; i < 128; ++i) {
    for (std::size_t j = 0; j < 128; ++j) {
      if (p.segment_ids[i] != p.segment_ids[j] || j > i) {
        ASSERT_EQ((*r.weights)(i, j), 0.0) << i << "," << j;
      } else {
        ASSERT_GT((*r.weights)(i, j), 0.0);
      }
    }
  }
}

TEST(Ring, TraceScheduleIsARotation) {
  for (std::size_t P : {1u, 2u, 3u, 5u, 8u}) {
    const auto p = random_problem(P * 4, 2, {}, P);
    const auto r = ring_attention(p, {P, 2, 4});
    EXPECT_EQ(r.trace.transfer_count(), P * (P - 1));
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& st : r.trace.steps) {
      EXPECT_EQ(st.kv_origin, (st.device + P - st.step % P) % P);
      EXPECT_TRUE(seen.insert({st.device, st.kv_origin}).second);
    }
    EXPECT_EQ(seen.size(), P * P);
    for (const auto& t : r.trace.transfers) {
      EXPECT_EQ(t.to, (t.from + 1) % P);
      EXPECT_EQ(t.partition, (t.to + P - t.step) % P);
    }
  }
}

TEST(Ring, OracleEquivalenceProperty) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> seqs(1, 128);
  std::uniform_int_distribution<std::size_t> dims(1, 16);
  for (int t = 0; t < 60; ++t) {
    const std::size_t s = seqs(rng), d = dims(rng);
    const auto layout = random_layout(rng, s);
    const auto p = random_problem(s, d, layout, rng());
    oracle::Dense out, w;
    oracle::brute_attention(dense(p.q), dense(p.k), dense(p.v), p.segment_ids, true, out, w);
    Matrix oracle_out(s, d);
    std::copy(out.v.begin(), out.v.end(), oracle_out.values().begin());
    const auto devs = divisors(s);
    const std::size_t P = devs[rng() % devs.size()];
    const auto chunks = divisors(s / P);
    const std::size_t cq = chunks[rng() % chunks.size()];
    const std::size_t ckv = chunks[rng() % chunks.size()];
    const auto r = ring_attention(p, {P, cq, ckv}, true);
    ASSERT_LE(max_rel_diff(r.output, oracle_out), 1e-6) << s << " " << P << " " << cq << " " << ckv;
    for (std::size_t i = 0; i < s; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < s; ++j) {
        const double wij = (*r.weights)(i, j);
        if (p.segment_ids[i] != p.segment_ids[j]) {
          ASSERT_EQ(wij, 0.0);
        }
        sum += wij;
      }
      ASSERT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(Ring, DeviceCountInvariance) {
  const auto p = random_problem(96, 8, std::vector<std::size_t>{30, 40, 26}, 8);
  const auto reference = ring_attention(p, {1, 96, 96}).output;
  for (std::size_t P : divisors(96)) {
    const auto r = ring_attention(p, {P, 96 / P, 96 / P});
    EXPECT_LE(max_rel_diff(r.output, reference), 1e-9) << P;
  }
}

TEST(Ring, OutputInConvexHullOfAttendableValues) {
  const auto p = random_problem(60, 5, std::vector<std::size_t>{17, 43}, 9);
  const auto out = ring_attention(p, {3, 5, 10}).output;
  for (std::size_t i = 0; i < 60; ++i) {
    for (std::size_t c = 0; c < 5; ++c) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t j = 0; j <= i; ++j) {
        if (!p.may_attend(i, j)) continue;
        lo = std::min(lo, p.v(j, c));
        hi = std::max(hi, p.v(j, c));
      }
      EXPECT_GE(out(i, c), lo - 1e-12);
      EXPECT_LE(out(i, c), hi + 1e-12);
    }
  }
}

TEST(Ring, InvalidMeshRejected) {
  const auto p = random_problem(12, 2, {}, 1);
  EXPECT_THROW(ring_attention(p, {5, 1, 1}), longctx::Error);
  EXPECT_THROW(ring_attention(p, {3, 3, 1}), longctx::Error);
  EXPECT_THROW(ring_attention(p, {0, 1, 1}), longctx::Error);
}

TEST(Problem, Validation) {
  auto p = random_problem(4, 2, {}, 1);
  p.segment_ids = {0, 1, 0, 1};
  EXPECT_THROW(p.validate(), longctx::Error);
  p.segment_ids = {0, 0, 0};
  EXPECT_THROW(p.validate(), longctx::Error);
  EXPECT_THROW(random_problem(4, 2, std::vector<std::size_t>{1, 2}, 0), longctx::Error);
}

TEST(Dosp, Rule) {
  EXPECT_EQ(dosp_limits(8, 64).ring, 64u);
  EXPECT_EQ(dosp_limits(8, 64).all_to_all, 8u);
  EXPECT_EQ(dosp_limits(64, 8).all_to_all, 8u);
  EXPECT_EQ(dosp_limits(1, 1).ring, 1u);
  EXPECT_EQ(dosp_limits(1, 1).all_to_all, 1u);
  EXPECT_THROW(dosp_limits(0, 4), longctx::Error);
  for (std::uint64_t h = 1; h <= 64; ++h) {
    for (std::uint64_t dv = 1; dv <= 64; ++dv) {
      const auto l = dosp_limits(h, dv);
      ASSERT_EQ(l.ring, dv);
      ASSERT_EQ(l.all_to_all, h < dv ? h : dv);
    }
  }
}

}  // namespace
