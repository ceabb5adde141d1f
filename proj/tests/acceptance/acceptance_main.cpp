// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate. One line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/oracles.hpp"
#include "longctx/memplan.hpp"
#include "longctx/niah.hpp"
#include "longctx/recipe.hpp"
#include "longctx/ringsim.hpp"
#include "longctx/rope.hpp"
#include "longctx/softnum.hpp"

namespace {

using namespace longctx;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome theta_bound() {
  Outcome o;
  const double a = rope::theta_lower_bound(262144);
  const double b = rope::theta_lower_bound(524288);
  o.require(a >= 2.75e7 && a <= 2.85e7, "bound(262144)=" + fmt("%.6g", a));
  o.require(b >= 8.5e7 && b <= 8.7e7, "bound(524288)=" + fmt("%.6g", b));
  if (o.pass) o.detail = "bound(262144)=" + fmt("%.4g", a) + " bound(524288)=" + fmt("%.4g", b);
  return o;
}

Outcome memory_model() {
  Outcome o;
  const auto base = memplan::lookup_table_bytes({8, 524288, 1024, 2048});
  const auto doubled = memplan::lookup_table_bytes({8, 524288, 2048, 4096});
  o.require(base == 34359738368ull, "bytes=" + std::to_string(base));
  o.require(doubled * 4 == base, "doubled=" + std::to_string(doubled));
  if (o.pass) o.detail = std::to_string(base) + " bytes, doubled chunks " + std::to_string(doubled);
  return o;
}

std::vector<std::size_t> divisors(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i <= n; ++i) {
    if (n % i == 0) out.push_back(i);
  }
  return out;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(20240731);
  double worst = 0.0;
  std::size_t nonzero_cross = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t s = 1 + rng() % 256;
    const std::size_t d = 1 + rng() % 32;
    std::vector<std::size_t> lengths;
    for (std::size_t left = s; left > 0;) {
      const std::size_t len = std::min<std::size_t>(left, 1 + rng() % s);
      lengths.push_back(len);
      left -= len;
    }
    const auto problem = ringsim::random_problem(s, d, lengths, rng());
    const auto devices = divisors(s);
    const std::size_t p = devices[rng() % devices.size()];
    const auto chunks = divisors(s / p);
    const std::size_t cq = chunks[rng() % chunks.size()];
    const std::size_t ckv = chunks[rng() % chunks.size()];
    const auto ring = ringsim::ring_attention(problem, {p, cq, ckv}, true);
    worst = std::max(worst, ringsim::max_rel_diff(ring.output, ringsim::exact_attention(problem)));
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) {
        if (problem.segment_ids[i] != problem.segment_ids[j] && (*ring.weights)(i, j) != 0.0) {
          ++nonzero_cross;
        }
      }
    }
  }
  o.require(worst <= 1e-6, "max relative error " + fmt("%.3g", worst));
  o.require(nonzero_cross == 0, std::to_string(nonzero_cross) + " cross-document weights nonzero");
  if (o.pass) o.detail = "200 problems, max relative error " + fmt("%.3g", worst);
  return o;
}

Outcome precision_failure() {
  Outcome o;
  rope::RopeConfig cfg;
  cfg.head_dim = 64;
  cfg.max_position = 1 << 20;
  cfg.precision = softnum::PrecisionMode::kReduced16;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(64);
  for (auto& x : v) x = n(rng);
  o.require(rope::rotate(v, 257, cfg) == rope::rotate(v, 256, cfg), "rotate(257) != rotate(256)");
  // Every collision group in the first 2^14 positions rotates identically.
  std::int64_t start = 0;
  auto ref = rope::rotate(v, 0, cfg);
  for (std::int64_t p = 1; p < (1 << 14); ++p) {
    if (softnum::quantize_reduced16(static_cast<float>(p)) !=
        softnum::quantize_reduced16(static_cast<float>(start))) {
      start = p;
      ref = rope::rotate(v, p, cfg);
    } else if (rope::rotate(v, p, cfg) != ref) {
      o.require(false, "group at " + std::to_string(start) + " not constant");
      break;
    }
  }
  const oracle::Reduced16Grid grid;
  const std::uint64_t brute = oracle::brute_census(grid, 524288);
  const std::uint64_t census = softnum::distinct_integer_census(524288);
  o.require(census == brute && brute == 1665,
            "census " + std::to_string(census) + " vs enumeration " + std::to_string(brute));
  bool distinct = true;
  for (std::uint32_t p = 1; p < (1u << 24); ++p) {
    const float f = static_cast<float>(p);
    if (!(f > static_cast<float>(p - 1)) || static_cast<std::uint32_t>(f) != p) {
      distinct = false;
      break;
    }
  }
  o.require(distinct, "full32 integers collide below 2^24");
  if (o.pass) o.detail = "census(524288)=" + std::to_string(census) + " matches enumeration";
  return o;
}

Outcome shift_invariance() {
  Outcome o;
  rope::RopeConfig cfg;
  cfg.theta_base = 75e6;
  cfg.head_dim = 64;
  cfg.max_position = 1 << 20;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> pos(0, (1 << 19) - 1);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> q(64), k(64);
    for (auto& x : q) x = n(rng);
    for (auto& x : k) x = n(rng);
    const std::int64_t m = pos(rng), nn = pos(rng), s = pos(rng);
    const double a = rope::relative_score(q, k, m, nn, cfg);
    const double b = rope::relative_score(q, k, m + s, nn + s, cfg);
    worst = std::max(worst, std::abs(a - b) / std::abs(a));
  }
  o.require(worst <= 1e-5, "full32 worst relative drift " + fmt("%.3g", worst));

  rope::RopeConfig low = cfg;
  low.precision = softnum::PrecisionMode::kReduced16;
  std::vector<double> e1(64, 0.0);
  e1[0] = 1.0;
  const double near = rope::relative_score(e1, e1, 1, 0, low);
  const double far = rope::relative_score(e1, e1, 300001, 300000, low);
  const double violation = std::abs(far - near) / std::abs(near);
  o.require(violation > 1e-3, "reduced16 violation only " + fmt("%.3g", violation));
  if (o.pass) {
    o.detail = "full32 worst " + fmt("%.3g", worst) + ", reduced16 at 300000 off by " +
               fmt("%.3g", violation);
  }
  return o;
}

Outcome recipe_validation() {
  Outcome o;
  const auto m = recipe::builtin_recipe();
  const auto v = recipe::validate(m);
  o.require(v.empty(), std::to_string(v.size()) + " violations");
  const auto total = recipe::pretraining_tokens(m);
  o.require(total <= 2'000'000'000ull, "pretraining tokens " + std::to_string(total));
  const std::string golden =
      read_file(std::string(LONGCTX_TEST_DATA_DIR) + "/golden/builtin_recipe.json");
  o.require(recipe::emit_manifest(m) == golden, "manifest differs from golden");
  if (o.pass) o.detail = "0 violations, " + std::to_string(total) + " pretraining tokens";
  return o;
}

Outcome niah_harness() {
  Outcome o;
  niah::NiahCase c;
  c.haystack_tokens = 4000;
  c.depth_percent = 35;
  c.seed = 7;
  const auto a = niah::generate_case(c);
  const auto b = niah::generate_case(c);
  const std::string golden = read_file(std::string(LONGCTX_TEST_DATA_DIR) + "/golden/niah_case_seed7.txt");
  o.require(a.document == b.document && a.document + "\n" == golden, "case not byte-identical");
  const auto verdict = niah::score("7418118", "The number is 741811.").verdict;
  o.require(verdict == niah::Verdict::kTruncated, std::string("verdict ") + niah::to_string(verdict));
  niah::GridOptions g;
  g.lengths = {1000, 4000, 16000};
  g.depths = {0, 25, 50, 75, 100};
  g.trials = 2;
  g.max_concurrency = 4;
  auto echo = niah::make_echo_client();
  const auto grid = niah::run_grid(g, *echo);
  bool all_exact = true;
  for (const auto& cell : grid.cells) all_exact = all_exact && cell.rate(niah::Verdict::kExact) == 1.0;
  o.require(all_exact, "echo grid not 100% exact");
  if (o.pass) o.detail = "deterministic case, truncated verdict, echo grid 100% exact";
  return o;
}

Outcome dosp_rule() {
  Outcome o;
  std::size_t checked = 0;
  for (std::uint64_t h = 1; h <= 128; ++h) {
    for (std::uint64_t d = 1; d <= 512; ++d) {
      const auto l = ringsim::dosp_limits(h, d);
      if (l.ring != d || l.all_to_all != std::min(h, d)) {
        o.require(false, "kv_heads=" + std::to_string(h) + " devices=" + std::to_string(d));
        return o;
      }
      ++checked;
    }
  }
  o.detail = std::to_string(checked) + " cases";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"theta bound reproduction", theta_bound},
      {"memory model reproduction", memory_model},
      {"oracle equivalence suite", oracle_equivalence},
      {"precision failure reproduction", precision_failure},
      {"shift-invariance property", shift_invariance},
      {"recipe validation", recipe_validation},
      {"niah determinism and scoring", niah_harness},
      {"dosp rule", dosp_rule},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %zu %-32s %s  (%.2fs) %s\n", i + 1, criteria[i].first,
                o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
