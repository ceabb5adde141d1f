// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference implementations used only by tests. None of them share code with
// the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

namespace oracle {

// Value of a 16-bit pattern (1/8/7 layout) decoded from its fields.
inline double reduced16_value(std::uint16_t bits) {
  const int sign = bits >> 15;
  const int exp = (bits >> 7) & 0xFF;
  const int frac = bits & 0x7F;
  double mag;
  if (exp == 0) {
    mag = std::ldexp(static_cast<double>(frac), -126 - 7);
  } else {
    mag = std::ldexp(1.0 + frac / 128.0, exp - 127);
  }
  return sign ? -mag : mag;
}

// Round-to-nearest-even onto the 16-bit grid by searching the sorted table
// of finite non-negative patterns. Only for finite x >= 0 below the largest
// finite value.
class Reduced16Grid {
 public:
  Reduced16Grid() {
    for (std::uint32_t b = 0; b < 0x7F80; ++b) {
      entries_.push_back({reduced16_value(static_cast<std::uint16_t>(b)),
                          static_cast<std::uint16_t>(b)});
    }
  }

  std::uint16_t round(double x) const {
    auto hi = std::lower_bound(entries_.begin(), entries_.end(), x,
                               [](const Entry& e, double v) { return e.value < v; });
    if (hi->value == x) return hi->bits;
    auto lo = hi - 1;
    const double dl = x - lo->value;
    const double dh = hi->value - x;
    if (dl < dh) return lo->bits;
    if (dh < dl) return hi->bits;
    return (lo->bits & 1) == 0 ? lo->bits : hi->bits;
  }

  double round_value(double x) const { return reduced16_value(round(x)); }

 private:
  struct Entry {
    double value;
    std::uint16_t bits;
  };
  std::vector<Entry> entries_;
};

inline std::uint64_t brute_census(const Reduced16Grid& grid, std::uint64_t limit) {
  std::set<std::uint16_t> seen;
  for (std::uint64_t p = 0; p < limit; ++p) {
    seen.insert(grid.round(static_cast<double>(p)));
  }
  return seen.size();
}

// Plain double-loop masked softmax attention.
struct Dense {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v;
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

inline void brute_attention(const Dense& q, const Dense& k, const Dense& val,
                            const std::vector<std::int64_t>& seg, bool causal, Dense& out,
                            Dense& weights) {
  const std::size_t S = q.rows, d = q.cols;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  out = Dense{S, d, std::vector<double>(S * d, 0.0)};
  weights = Dense{S, S, std::vector<double>(S * S, 0.0)};
  for (std::size_t i = 0; i < S; ++i) {
    std::vector<double> s(S, -std::numeric_limits<double>::infinity());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < S; ++j) {
      if (seg[i] != seg[j] || (causal && j > i)) continue;
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) dot += q.at(i, c) * k.at(j, c);
      s[j] = dot * scale;
      mx = std::max(mx, s[j]);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < S; ++j) {
      if (std::isfinite(s[j])) z += std::exp(s[j] - mx);
    }
    for (std::size_t j = 0; j < S; ++j) {
      if (!std::isfinite(s[j])) continue;
      const double w = std::exp(s[j] - mx) / z;
      weights.v[i * S + j] = w;
      for (std::size_t c = 0; c < d; ++c) out.v[i * d + c] += w * val.at(j, c);
    }
  }
}

}  // namespace oracle
