// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0

#include "longctx/rope.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "longctx/error.hpp"

namespace {

using namespace longctx::rope;

RopeConfig config(double theta, int d, std::int64_t max_pos,
                  PrecisionMode mode = PrecisionMode::kFull32) {
  RopeConfig cfg;
  cfg.theta_base = theta;
  cfg.head_dim = d;
  cfg.max_position = max_pos;
  cfg.precision = mode;
  return cfg;
}

std::vector<double> random_vector(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(d));
  for (auto& x : v) x = n(rng);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

TEST(InverseFrequencies, KnownValues) {
  EXPECT_EQ(inverse_frequencies(config(1e4, 128, 10))[0], 1.0);
  EXPECT_EQ(inverse_frequencies(config(123.0, 8, 10))[0], 1.0);
  EXPECT_NEAR(inverse_frequencies(config(1e4, 4, 10))[1], 0.01, 1e-15);
  // 75e6^(-126/128) at 40 significant digits.
  const double reference = 1.770054216121903025248095414155041343448e-8;
  const double got = inverse_frequencies(config(75e6, 128, 10))[63];
  EXPECT_NEAR(got / reference, 1.0, 1e-14);
}

TEST(RopeConfig, Validation) {
  EXPECT_THROW(config(1e4, 3, 10).validate(), longctx::Error);
  EXPECT_THROW(config(1e4, 0, 10).validate(), longctx::Error);
  EXPECT_THROW(config(1.0, 8, 10).validate(), longctx::Error);
  EXPECT_THROW(config(1e4, 8, 0).validate(), longctx::Error);
  EXPECT_NO_THROW(config(1e4, 8, 1).validate());
}

TEST(Rotate, PositionZeroIsIdentity) {
  std::mt19937_64 rng(1);
  const auto v = random_vector(rng, 16);
  EXPECT_EQ(rotate(v, 0, config(1e4, 16, 100)), v);
}

TEST(Rotate, SinglePairIsCosSin) {
  const std::vector<double> e1{1.0, 0.0};
  for (int p : {1, 2, 17, 999}) {
    const auto r = rotate(e1, p, config(5.0, 2, 1000));
    EXPECT_NEAR(r[0], std::cos(p), 1e-12);
    EXPECT_NEAR(r[1], std::sin(p), 1e-12);
  }
}

TEST(Rotate, MatchesComplexMultiplication) {
  std::mt19937_64 rng(2);
  const auto cfg = config(5e5, 32, 100000);
  const auto v = random_vector(rng, 32);
  for (std::int64_t p : {3, 511, 77777}) {
    const auto r = rotate(v, p, cfg);
    for (int i = 0; i < 16; ++i) {
      const double freq = std::pow(5e5, -2.0 * i / 32.0);
      const std::complex<double> z =
          std::complex<double>(v[2 * i], v[2 * i + 1]) * std::polar(1.0, p * freq);
      EXPECT_NEAR(r[2 * i], z.real(), 1e-9);
      EXPECT_NEAR(r[2 * i + 1], z.imag(), 1e-9);
    }
  }
}

TEST(Rotate, Errors) {
  const auto cfg = config(1e4, 4, 10);
  EXPECT_THROW(rotate(std::vector<double>(3), 1, cfg), longctx::Error);
  EXPECT_THROW(rotate(std::vector<double>(4), 10, cfg), longctx::Error);
  EXPECT_THROW(rotate(std::vector<double>(4), -1, cfg), longctx::Error);
}

TEST(Rotate, PreservesPairNorms) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> pos(0, 999999);
  const auto cfg = config(75e6, 64, 1000000);
  for (int t = 0; t < 500; ++t) {
    const auto v = random_vector(rng, 64);
    const auto r = rotate(v, pos(rng), cfg);
    for (int i = 0; i < 32; ++i) {
      const double a = std::hypot(v[2 * i], v[2 * i + 1]);
      const double b = std::hypot(r[2 * i], r[2 * i + 1]);
      ASSERT_NEAR(b / a, 1.0, 1e-6);
    }
  }
}

TEST(Rotate, Reduced16CollapsesPositionsThatRoundTogether) {
  std::mt19937_64 rng(4);
  const auto cfg = config(1e4, 16, 2000, PrecisionMode::kReduced16);
  const auto v = random_vector(rng, 16);
  EXPECT_EQ(rotate(v, 257, cfg), rotate(v, 256, cfg));
  // Every integer position maps to the rotation of its rounded value.
  std::int64_t run_start = 0;
  for (std::int64_t p = 1; p < 2000; ++p) {
    const bool same_group = encoded_position(p, cfg) == encoded_position(run_start, cfg);
    if (same_group) {
      ASSERT_EQ(rotate(v, p, cfg), rotate(v, run_start, cfg)) << p;
    } else {
      run_start = p;
    }
  }
  EXPECT_NE(rotate(v, 257, config(1e4, 16, 2000)), rotate(v, 256, config(1e4, 16, 2000)));
}

TEST(Rotate, AngleInjectionIsSeparateFromPositionInjection) {
  auto cfg = config(1e4, 8, 1000, PrecisionMode::kReduced16);
  cfg.injection.position = false;
  cfg.injection.angle = true;
  EXPECT_EQ(encoded_position(257, cfg), 257.0);
  const std::vector<double> e1{1, 0, 1, 0, 1, 0, 1, 0};
  const auto r = rotate(e1, 257, cfg);
  // angle 257 rounds to 256 in pair 0
  EXPECT_NEAR(r[0], std::cos(256.0), 1e-12);
}

TEST(RelativeScore, EqualPositionsGiveDot) {
  std::mt19937_64 rng(5);
  const auto cfg = config(1e4, 32, 5000);
  const auto q = random_vector(rng, 32), k = random_vector(rng, 32);
  EXPECT_NEAR(relative_score(q, k, 1234, 1234, cfg), dot(q, k), 1e-9);
}

TEST(RelativeScore, ShiftInvariantInFull32) {
  std::mt19937_64 rng(6);
  const std::int64_t L = 1 << 20;
  const auto cfg = config(75e6, 64, L);
  std::uniform_int_distribution<std::int64_t> pos(0, L / 2 - 1);
  int checked = 0;
  for (int t = 0; t < 500; ++t) {
    const auto q = random_vector(rng, 64), k = random_vector(rng, 64);
    const std::int64_t m = pos(rng), n = pos(rng), s = pos(rng);
    const double a = relative_score(q, k, m, n, cfg);
    const double b = relative_score(q, k, m + s, n + s, cfg);
    if (std::abs(a) < 1e-3) continue;
    EXPECT_NEAR(b / a, 1.0, 1e-5);
    ++checked;
  }
  EXPECT_GT(checked, 400);
  const auto q = random_vector(rng, 64), k = random_vector(rng, 64);
  EXPECT_NEAR(relative_score(q, k, 105, 103, cfg) / relative_score(q, k, 5, 3, cfg), 1.0, 1e-5);
}

TEST(RelativeScore, Reduced16BreaksShiftInvarianceAtLargePositions) {
  const auto cfg = config(75e6, 8, 600000, PrecisionMode::kReduced16);
  const std::vector<double> e1{1, 0, 0, 0, 0, 0, 0, 0};
  const double near = relative_score(e1, e1, 1, 0, cfg);
  const double far = relative_score(e1, e1, 300001, 300000, cfg);
  EXPECT_NEAR(near, std::cos(1.0), 1e-12);
  EXPECT_GT(std::abs(far - near) / std::abs(near), 1e-3);
}

TEST(RotationReport, WavelengthsIncreaseAndMatchCompleteness) {
  const auto rr = rotation_report(config(75e6, 128, 524288));
  ASSERT_EQ(rr.dims.size(), 64u);
  for (std::size_t i = 1; i < rr.dims.size(); ++i) {
    EXPECT_GT(rr.dims[i].wavelength, rr.dims[i - 1].wavelength);
  }
  int complete = 0;
  for (const auto& d : rr.dims) {
    const double wl = 2.0 * std::numbers::pi * std::pow(75e6, 2.0 * d.pair_index / 128.0);
    EXPECT_NEAR(d.wavelength / wl, 1.0, 1e-12);
    EXPECT_EQ(d.completes_full_rotation, wl <= 524288.0);
    complete += d.completes_full_rotation;
  }
  EXPECT_EQ(rr.complete_pairs, complete);
  EXPECT_EQ(rr.complete_pairs, 40);
  EXPECT_DOUBLE_EQ(rr.fraction_complete, 40.0 / 64.0);
}

TEST(RotationReport, SmallThetaCompletesEverything) {
  EXPECT_EQ(rotation_report(config(1.5, 64, 1000000)).fraction_complete, 1.0);
}

TEST(RotationReport, LargeThetaLeavesTopDimensionsIncomplete) {
  const auto rr = rotation_report(config(100e6, 128, 600000));
  EXPECT_LT(rr.fraction_complete, 1.0);
  // incomplete set is a suffix
  bool seen_incomplete = false;
  for (const auto& d : rr.dims) {
    if (!d.completes_full_rotation) seen_incomplete = true;
    EXPECT_EQ(d.completes_full_rotation, !seen_incomplete);
  }
  EXPECT_TRUE(!rr.dims.back().completes_full_rotation);
}

TEST(RotationReport, FractionMonotoneInThetaAndLength) {
  const std::vector<double> thetas{1e3, 1e4, 1e5, 1e6, 25e6, 75e6, 1e8, 1e9};
  const std::vector<std::int64_t> lens{1024, 32768, 262144, 524288, 1 << 22};
  for (auto L : lens) {
    double prev = 2.0;
    for (double t : thetas) {
      const double f = rotation_report(config(t, 128, L)).fraction_complete;
      EXPECT_LE(f, prev);
      prev = f;
    }
  }
  for (double t : thetas) {
    double prev = -1.0;
    for (auto L : lens) {
      const double f = rotation_report(config(t, 128, L)).fraction_complete;
      EXPECT_GE(f, prev);
      prev = f;
    }
  }
}

TEST(ThetaBound, Values) {
  EXPECT_NEAR(theta_lower_bound(262144), 28102751.91380293, 1e-3);
  EXPECT_NEAR(theta_lower_bound(524288), 86861171.51174277, 1e-3);
  EXPECT_NEAR(theta_lower_bound(1024), 3373.915380013465, 1e-7);
  EXPECT_DOUBLE_EQ(theta_lower_bound(1), 0.0424);
  EXPECT_THROW(theta_lower_bound(0.5), longctx::Error);
}

TEST(ThetaBound, StrictlyIncreasing) {
  double prev = 0.0;
  for (double L = 1; L < 1e7; L *= 1.37) {
    const double b = theta_lower_bound(L);
    EXPECT_GT(b, prev);
    prev = b;
  }
}

TEST(PlanTheta, LongContextCandidates) {
  const std::vector<double> c{25e6, 75e6, 100e6};
  const auto plan = plan_theta(524288, c);
  ASSERT_TRUE(plan.recommended);
  EXPECT_EQ(*plan.recommended, 75e6);
  EXPECT_EQ(plan.candidates[0].classification, ThetaClass::kBelowBound);
  EXPECT_TRUE(plan.candidates[1].recommended);
  // At this length 100M completes as many pairs as 75M, so it is not flagged.
  EXPECT_EQ(plan.candidates[2].incomplete_pairs, plan.candidates[1].incomplete_pairs);
  EXPECT_EQ(plan.candidates[2].classification, ThetaClass::kInBand);
}

TEST(PlanTheta, FlagsLargerThetaWithMoreIncompletePairs) {
  const std::vector<double> c{25e6, 75e6, 150e6};
  const auto plan = plan_theta(524288, c);
  ASSERT_TRUE(plan.recommended);
  EXPECT_EQ(*plan.recommended, 75e6);
  EXPECT_GT(plan.candidates[2].incomplete_pairs, plan.candidates[1].incomplete_pairs);
  EXPECT_EQ(plan.candidates[2].classification, ThetaClass::kFarAboveBound);
}

TEST(PlanTheta, ExactBoundAndShortContext) {
  const std::vector<double> c28{28e6};
  const auto p = plan_theta(262144, c28);
  ASSERT_TRUE(p.recommended);
  EXPECT_NEAR(p.candidates[0].bound_ratio, 1.0, 0.01);
  const std::vector<double> c1{1e4};
  EXPECT_EQ(plan_theta(1024, c1).recommended, 1e4);
}

TEST(PlanTheta, PicksSmallestInBandRegardlessOfOrder) {
  const std::vector<double> c{5e8, 90e6, 87e6, 1e6};
  EXPECT_EQ(plan_theta(524288, c).recommended, 87e6);
}

TEST(PlanTheta, NoCandidateInBand) {
  const std::vector<double> c{1e4, 1e5};
  const auto plan = plan_theta(524288, c);
  EXPECT_FALSE(plan.recommended);
  for (const auto& cand : plan.candidates) EXPECT_EQ(cand.classification, ThetaClass::kBelowBound);
}

TEST(PlanTheta, Errors) {
  EXPECT_THROW(plan_theta(1024, std::vector<double>{}), longctx::Error);
  EXPECT_THROW(plan_theta(0, std::vector<double>{1e4}), longctx::Error);
  EXPECT_THROW(plan_theta(1024, std::vector<double>{1e4}, {.head_dim = 128, .band_tolerance = 1.0}),
               longctx::Error);
}

}  // namespace
