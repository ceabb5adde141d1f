// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0

#include "longctx/rope.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "longctx/error.hpp"

namespace longctx::rope {

namespace {

constexpr double kBoundCoefficient = 0.0424;
constexpr double kBoundExponent = 1.628;

void check_position(std::int64_t position, const RopeConfig& cfg) {
  if (position < 0 || position >= cfg.max_position) {
    throw_invalid_argument("position " + std::to_string(position) + " outside [0, " +
                           std::to_string(cfg.max_position) + ")");
  }
}

void check_vector(std::span<const double> v, const RopeConfig& cfg) {
  if (v.size() != static_cast<std::size_t>(cfg.head_dim)) {
    throw_invalid_argument("vector length " + std::to_string(v.size()) +
                           " does not match head_dim " + std::to_string(cfg.head_dim));
  }
}

}  // namespace

void RopeConfig::validate() const {
  if (head_dim <= 0 || head_dim % 2 != 0) {
    throw_invalid_argument("head_dim must be a positive even integer, got " +
                           std::to_string(head_dim));
  }
  if (!(theta_base > 1.0) || !std::isfinite(theta_base)) {
    throw_invalid_argument("theta_base must be finite and > 1");
  }
  if (max_position < 1) {
    throw_invalid_argument("max_position must be >= 1");
  }
}

std::vector<double> inverse_frequencies(const RopeConfig& cfg) {
  cfg.validate();
  const int pairs = cfg.head_dim / 2;
  std::vector<double> out(static_cast<std::size_t>(pairs));
  for (int i = 0; i < pairs; ++i) {
    const double exponent = -2.0 * static_cast<double>(i) / static_cast<double>(cfg.head_dim);
    out[static_cast<std::size_t>(i)] = std::pow(cfg.theta_base, exponent);
  }
  return out;
}

double encoded_position(std::int64_t position, const RopeConfig& cfg) {
  const float as_float = static_cast<float>(position);
  if (cfg.precision == PrecisionMode::kReduced16 && cfg.injection.position) {
    return static_cast<double>(softnum::quantize_reduced16(as_float));
  }
  return static_cast<double>(as_float);
}

std::vector<double> rotate(std::span<const double> vector, std::int64_t position,
                           const RopeConfig& cfg) {
  cfg.validate();
  check_vector(vector, cfg);
  check_position(position, cfg);

  const std::vector<double> inv_freq = inverse_frequencies(cfg);
  const double pos = encoded_position(position, cfg);
  const bool round_angle = cfg.precision == PrecisionMode::kReduced16 && cfg.injection.angle;

  std::vector<double> out(vector.size());
  for (std::size_t i = 0; i < inv_freq.size(); ++i) {
    double angle = pos * inv_freq[i];
    if (round_angle) {
      angle = static_cast<double>(softnum::quantize_reduced16(static_cast<float>(angle)));
    }
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double x = vector[2 * i];
    const double y = vector[2 * i + 1];
    out[2 * i] = x * c - y * s;
    out[2 * i + 1] = x * s + y * c;
  }
  return out;
}

double relative_score(std::span<const double> q, std::span<const double> k, std::int64_t m,
                      std::int64_t n, const RopeConfig& cfg) {
  const std::vector<double> rq = rotate(q, m, cfg);
  const std::vector<double> rk = rotate(k, n, cfg);
  double dot = 0.0;
  for (std::size_t i = 0; i < rq.size(); ++i) {
    dot += rq[i] * rk[i];
  }
  return dot;
}

DimRotationReport rotation_report(const RopeConfig& cfg) {
  cfg.validate();
  DimRotationReport report;
  report.theta_base = cfg.theta_base;
  report.head_dim = cfg.head_dim;
  report.max_position = cfg.max_position;

  const int pairs = cfg.head_dim / 2;
  const double horizon = static_cast<double>(cfg.max_position);
  report.dims.reserve(static_cast<std::size_t>(pairs));
  for (int i = 0; i < pairs; ++i) {
    const double exponent = 2.0 * static_cast<double>(i) / static_cast<double>(cfg.head_dim);
    DimRotation dim;
    dim.pair_index = i;
    dim.inv_freq = std::pow(cfg.theta_base, -exponent);
    dim.wavelength = 2.0 * std::numbers::pi * std::pow(cfg.theta_base, exponent);
    dim.completes_full_rotation = dim.wavelength <= horizon;
    if (dim.completes_full_rotation) {
      ++report.complete_pairs;
    }
    report.dims.push_back(dim);
  }
  report.fraction_complete = static_cast<double>(report.complete_pairs) / pairs;
  return report;
}

double theta_lower_bound(double context_len) {
  if (!(context_len >= 1.0) || !std::isfinite(context_len)) {
    throw_invalid_argument("theta_lower_bound: context length must be >= 1");
  }
  return kBoundCoefficient * std::pow(context_len, kBoundExponent);
}

const char* to_string(ThetaClass cls) noexcept {
  switch (cls) {
    case ThetaClass::kBelowBound:
      return "below_bound";
    case ThetaClass::kInBand:
      return "in_band";
    case ThetaClass::kFarAboveBound:
      return "far_above_bound";
  }
  return "unknown";
}

ThetaPlan plan_theta(std::int64_t context_len, std::span<const double> candidates,
                     const ThetaPlanOptions& options) {
  if (candidates.empty()) {
    throw_invalid_argument("plan_theta: candidate list is empty");
  }
  if (context_len < 1) {
    throw_invalid_argument("plan_theta: context length must be >= 1");
  }
  if (!(options.band_tolerance >= 0.0 && options.band_tolerance < 1.0)) {
    throw_invalid_argument("plan_theta: band tolerance must lie in [0, 1)");
  }

  ThetaPlan plan;
  plan.context_len = context_len;
  plan.head_dim = options.head_dim;
  plan.lower_bound = theta_lower_bound(static_cast<double>(context_len));
  plan.band_tolerance = options.band_tolerance;

  const double threshold = 1.0 - options.band_tolerance;
  std::optional<std::size_t> best;
  for (const double theta : candidates) {
    RopeConfig cfg;
    cfg.theta_base = theta;
    cfg.head_dim = options.head_dim;
    cfg.max_position = context_len;
    const DimRotationReport rr = rotation_report(cfg);

    ThetaCandidate c;
    c.theta_base = theta;
    c.bound_ratio = theta / plan.lower_bound;
    c.complete_pairs = rr.complete_pairs;
    c.incomplete_pairs = rr.incomplete_pairs();
    c.fraction_complete = rr.fraction_complete;
    c.classification = c.bound_ratio >= threshold ? ThetaClass::kInBand : ThetaClass::kBelowBound;
    plan.candidates.push_back(c);

    if (c.classification == ThetaClass::kInBand &&
        (!best || theta < plan.candidates[*best].theta_base)) {
      best = plan.candidates.size() - 1;
    }
  }

  if (best) {
    ThetaCandidate& chosen = plan.candidates[*best];
    chosen.recommended = true;
    plan.recommended = chosen.theta_base;
    const double reference_incomplete = 1.0 - chosen.fraction_complete;
    for (ThetaCandidate& c : plan.candidates) {
      if (c.classification == ThetaClass::kInBand && c.theta_base > chosen.theta_base &&
          1.0 - c.fraction_complete > reference_incomplete) {
        c.classification = ThetaClass::kFarAboveBound;
      }
    }
  }
  return plan;
}

}  // namespace longctx::rope
