// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0

#include "longctx/softnum.hpp"

#include <bit>

#include "longctx/error.hpp"

namespace longctx::softnum {

namespace {

constexpr std::uint32_t kExponentMask32 = 0x7F800000u;
constexpr std::uint32_t kFractionMask32 = 0x007FFFFFu;
constexpr std::uint16_t kQuietBit16 = 0x0040u;
constexpr int kFractionBits16 = 7;
constexpr int kExponentBias = 127;

}  // namespace

const char* to_string(PrecisionMode mode) noexcept {
  return mode == PrecisionMode::kFull32 ? "full32" : "reduced16";
}

std::uint32_t float_bits(float x) noexcept { return std::bit_cast<std::uint32_t>(x); }

float float_from_bits(std::uint32_t bits) noexcept { return std::bit_cast<float>(bits); }

Reduced16 round_to_reduced16(float x) noexcept {
  const std::uint32_t bits = float_bits(x);
  if ((bits & kExponentMask32) == kExponentMask32 && (bits & kFractionMask32) != 0) {
    // Truncating a NaN could clear every surviving fraction bit; force quiet.
    return Reduced16{static_cast<std::uint16_t>((bits >> 16) | kQuietBit16)};
  }
  // Adding 0x7FFF plus the lowest kept bit rounds to nearest with ties to
  // even. A carry out of the fraction bumps the exponent, which is exactly
  // the right answer, including the step from the largest finite value to
  // infinity.
  const std::uint32_t lsb = (bits >> 16) & 1u;
  const std::uint32_t rounded = bits + 0x7FFFu + lsb;
  return Reduced16{static_cast<std::uint16_t>(rounded >> 16)};
}

float widen(Reduced16 v) noexcept {
  return float_from_bits(static_cast<std::uint32_t>(v.bits) << 16);
}

bool is_nan(Reduced16 v) noexcept {
  return (v.bits & 0x7F80u) == 0x7F80u && (v.bits & 0x007Fu) != 0;
}

std::uint64_t distinct_integer_census(std::uint64_t limit) {
  if (limit == 0) {
    throw_invalid_argument("distinct_integer_census: limit must be >= 1");
  }
  // Rounding is monotone and every representable integer maps to itself, so
  // the image of [0, limit) is exactly the set of representable non-negative
  // integers <= round(limit - 1).
  const Reduced16 top = round_to_reduced16(static_cast<float>(limit - 1));
  const float top_value = widen(top);
  if (top_value < 256.0f) {
    return static_cast<std::uint64_t>(top_value) + 1;
  }
  const int exponent = static_cast<int>((top.bits >> kFractionBits16) & 0xFFu) - kExponentBias;
  const std::uint64_t fraction = top.bits & 0x7Fu;
  // [0, 256] holds 257 integers; every binade [2^k, 2^(k+1)) above it holds 128.
  return 257u + 128u * static_cast<std::uint64_t>(exponent - 8) + fraction;
}

}  // namespace longctx::softnum
