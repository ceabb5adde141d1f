// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0
//
// Software emulation of the 16-bit "brain float" format (1 sign bit, 8
// exponent bits, 7 fraction bits). Only conversion is modeled: a 32-bit float
// is rounded to the nearest 16-bit value (ties to even) and can be widened
// back without loss. Everything is integer bit manipulation, so results do
// not depend on any native half-width type or on the host FPU rounding mode.

#pragma once

#include <cstdint>

namespace longctx::softnum {

enum class PrecisionMode {
  kFull32,     // values stay in IEEE binary32
  kReduced16,  // values pass through the 16-bit format
};

const char* to_string(PrecisionMode mode) noexcept;

struct Reduced16 {
  std::uint16_t bits = 0;

  friend bool operator==(Reduced16, Reduced16) = default;
};

std::uint32_t float_bits(float x) noexcept;
float float_from_bits(std::uint32_t bits) noexcept;

/// Round-to-nearest-even conversion. Total: overflow goes to a signed
/// infinity, subnormals are kept exactly (no flush-to-zero), and NaN stays
/// NaN with its sign and top payload bits preserved.
Reduced16 round_to_reduced16(float x) noexcept;

/// Exact embedding back into binary32.
float widen(Reduced16 v) noexcept;

/// Convenience: widen(round_to_reduced16(x)).
inline float quantize_reduced16(float x) noexcept {
  return widen(round_to_reduced16(x));
}

bool is_nan(Reduced16 v) noexcept;

/// Number of distinct values in { round_to_reduced16(float(p)) : p in [0, limit) }.
/// Closed form over binades; O(1). `limit` must be at least 1.
std::uint64_t distinct_integer_census(std::uint64_t limit);

}  // namespace longctx::softnum
