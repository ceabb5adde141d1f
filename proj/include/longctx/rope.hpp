// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0
//
// Rotary position encoding with switchable position precision, per-dimension
// wavelength analysis and a theta-base planner built on the empirical lower
// bound 0.0424 * L^1.628.
//
// Pair layout: dimensions (2i, 2i+1) form rotation pair i.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "longctx/softnum.hpp"

namespace longctx::rope {

using softnum::PrecisionMode;

/// Where values are forced through the 16-bit format when precision is
/// kReduced16. Ignored under kFull32.
struct Reduced16Injection {
  bool position = true;  // round the integer position before the angle product
  bool angle = false;    // round the angle product itself
};

struct RopeConfig {
  double theta_base = 10000.0;
  int head_dim = 128;
  std::int64_t max_position = 4096;
  PrecisionMode precision = PrecisionMode::kFull32;
  Reduced16Injection injection{};

  /// Throws Error(kInvalidArgument) unless head_dim is even and positive,
  /// theta_base > 1 and max_position >= 1.
  void validate() const;
};

/// theta_base^(-2i/d) for i in [0, d/2). Element 0 is 1, strictly decreasing.
std::vector<double> inverse_frequencies(const RopeConfig& cfg);

/// The position value that enters the angle product: the integer converted
/// to binary32, and additionally rounded to 16 bits under kReduced16 when
/// position injection is on.
double encoded_position(std::int64_t position, const RopeConfig& cfg);

/// Rotates each pair i by encoded_position * inv_freq(i). sin/cos run in
/// double precision regardless of mode.
std::vector<double> rotate(std::span<const double> vector, std::int64_t position,
                           const RopeConfig& cfg);

/// dot(rotate(q, m), rotate(k, n)).
double relative_score(std::span<const double> q, std::span<const double> k, std::int64_t m,
                      std::int64_t n, const RopeConfig& cfg);

struct DimRotation {
  int pair_index = 0;
  double inv_freq = 0.0;
  double wavelength = 0.0;  // tokens per full 2*pi turn
  bool completes_full_rotation = false;
};

struct DimRotationReport {
  double theta_base = 0.0;
  int head_dim = 0;
  std::int64_t max_position = 0;
  std::vector<DimRotation> dims;
  int complete_pairs = 0;
  double fraction_complete = 0.0;

  int incomplete_pairs() const { return static_cast<int>(dims.size()) - complete_pairs; }
};

DimRotationReport rotation_report(const RopeConfig& cfg);

/// 0.0424 * L^1.628. Requires L >= 1.
double theta_lower_bound(double context_len);

enum class ThetaClass {
  kBelowBound,
  kInBand,
  kFarAboveBound,
};

const char* to_string(ThetaClass cls) noexcept;

struct ThetaPlanOptions {
  int head_dim = 128;
  // A candidate at or above (1 - band_tolerance) * bound counts as meeting the
  // bound. Empirically chosen bases sit at 0.86-1.0 of the fitted bound.
  double band_tolerance = 0.15;
};

struct ThetaCandidate {
  double theta_base = 0.0;
  double bound_ratio = 0.0;
  ThetaClass classification = ThetaClass::kBelowBound;
  bool recommended = false;
  int complete_pairs = 0;
  int incomplete_pairs = 0;
  double fraction_complete = 0.0;
};

struct ThetaPlan {
  std::int64_t context_len = 0;
  int head_dim = 0;
  double lower_bound = 0.0;
  double band_tolerance = 0.0;
  std::vector<ThetaCandidate> candidates;  // input order
  std::optional<double> recommended;
};

/// Classifies each candidate against the bound for `context_len` and
/// recommends the smallest one that meets it (within the band tolerance).
/// A candidate is far above the bound when its incomplete-rotation fraction
/// strictly exceeds the recommended candidate's. Throws on empty candidates.
ThetaPlan plan_theta(std::int64_t context_len, std::span<const double> candidates,
                     const ThetaPlanOptions& options = {});

}  // namespace longctx::rope
