// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0

#include "longctx/niah.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "longctx/error.hpp"

namespace longctx::niah {

namespace detail {
std::string_view bundled_filler_text() noexcept;
}  // namespace detail

namespace {

constexpr std::string_view kPlaceholder = "{payload}";

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_digit);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + 1)) {
    ++count;
  }
  return count;
}

std::string render_needle(std::string_view tmpl, std::string_view payload) {
  if (count_occurrences(tmpl, kPlaceholder) != 1) {
    throw_invalid_argument("needle template must contain {payload} exactly once");
  }
  std::string out(tmpl);
  out.replace(out.find(kPlaceholder), kPlaceholder.size(), payload);
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Digits with in-number separators (',' or '_' between two digits) removed.
std::string normalize_digits(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool separator = (c == ',' || c == '_') && i > 0 && i + 1 < text.size() &&
                           is_digit(text[i - 1]) && is_digit(text[i + 1]);
    if (!separator) {
      out.push_back(c);
    }
  }
  return out;
}

std::string format_depth(double depth) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", depth);
  return buf;
}

}  // namespace

double approx_token_count(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (const char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) {
      ++words;
    }
    in_word = !space;
  }
  return 1.3 * static_cast<double>(words);
}

FillerCorpus FillerCorpus::from_text(std::string_view text) {
  FillerCorpus corpus;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') {
      continue;
    }
    if (std::any_of(line.begin(), line.end(), is_digit)) {
      throw_parse_error("filler line " + std::to_string(line_no) +
                        " contains a digit; filler must not collide with needle payloads");
    }
    corpus.sentences_.emplace_back(line);
  }
  if (corpus.sentences_.empty()) {
    throw_parse_error("filler corpus has no sentences");
  }
  return corpus;
}

FillerCorpus FillerCorpus::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw_io_error("cannot open filler corpus " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

const FillerCorpus& FillerCorpus::bundled() {
  static const FillerCorpus corpus = from_text(detail::bundled_filler_text());
  return corpus;
}

std::string payload_from_seed(std::uint64_t seed) {
  const std::uint64_t mixed = splitmix64(seed ^ 0x6E6565646C65ull);
  return std::to_string(1000000 + mixed % 9000000);
}

NiahDocument generate_case(const NiahCase& spec, const FillerCorpus& corpus,
                           const TokenCounter& counter) {
  if (!(spec.depth_percent >= 0.0 && spec.depth_percent <= 100.0)) {
    throw_invalid_argument("depth_percent must lie in [0, 100]");
  }
  const std::string payload =
      spec.needle_payload.empty() ? payload_from_seed(spec.seed) : spec.needle_payload;
  if (!all_digits(payload)) {
    throw_invalid_argument("needle payload must be a non-empty digit string");
  }

  NiahDocument doc;
  doc.expected = payload;
  doc.question = spec.question_template;
  if (doc.question.find(payload) != std::string::npos) {
    throw_invalid_argument("question template must not contain the payload");
  }
  const std::string needle = render_needle(spec.needle_template, payload);

  const double needle_tokens = counter(needle);
  const double question_tokens = counter(doc.question);
  const double target = static_cast<double>(spec.haystack_tokens);
  if (target < needle_tokens + question_tokens) {
    throw_invalid_argument("haystack target of " + std::to_string(spec.haystack_tokens) +
                           " tokens is shorter than needle plus question");
  }

  const auto& pool = corpus.sentences();
  std::vector<double> pool_tokens;
  pool_tokens.reserve(pool.size());
  for (const auto& s : pool) {
    pool_tokens.push_back(counter(s));
  }

  // Draw random sentences while they fit, then close the gap with the
  // sentence whose length best matches what remains.
  const double budget = target - needle_tokens;
  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> chosen;
  double total = 0.0;
  while (true) {
    const std::size_t idx = static_cast<std::size_t>(rng() % pool.size());
    if (total + pool_tokens[idx] <= budget) {
      chosen.push_back(idx);
      total += pool_tokens[idx];
      continue;
    }
    const double remaining = budget - total;
    std::size_t best = 0;
    for (std::size_t j = 1; j < pool.size(); ++j) {
      if (std::abs(remaining - pool_tokens[j]) < std::abs(remaining - pool_tokens[best])) {
        best = j;
      }
    }
    if (std::abs(remaining - pool_tokens[best]) < remaining) {
      chosen.push_back(best);
    }
    break;
  }

  const std::size_t n = chosen.size();
  doc.needle_sentence_index =
      static_cast<std::size_t>(std::llround(spec.depth_percent / 100.0 * static_cast<double>(n)));
  doc.sentence_count = n + 1;

  std::string text;
  for (std::size_t i = 0; i <= n; ++i) {
    if (i == doc.needle_sentence_index) {
      if (!text.empty()) {
        text.push_back(' ');
      }
      doc.needle_char_offset = text.size();
      text += needle;
    }
    if (i < n) {
      if (!text.empty()) {
        text.push_back(' ');
      }
      text += pool[chosen[i]];
    }
  }
  if (count_occurrences(text, payload) != 1) {
    throw_invalid_argument("needle template repeats the payload");
  }
  doc.token_count = counter(text);
  doc.document = std::move(text);
  return doc;
}

std::string build_prompt(const NiahDocument& doc) { return doc.document + "\n\n" + doc.question; }

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::kExact:
      return "exact";
    case Verdict::kTruncated:
      return "truncated";
    case Verdict::kWrong:
      return "wrong";
    case Verdict::kEmpty:
      return "empty";
  }
  return "unknown";
}

ScoreResult score(std::string_view expected, std::string_view answer) {
  if (!all_digits(expected)) {
    throw_invalid_argument("expected payload must be a non-empty digit string");
  }
  ScoreResult result;
  if (trim(answer).empty()) {
    result.verdict = Verdict::kEmpty;
    return result;
  }
  const std::string norm = normalize_digits(answer);
  std::size_t matched = 0;
  for (std::size_t len = expected.size(); len > 0; --len) {
    if (norm.find(expected.substr(0, len)) != std::string::npos) {
      matched = len;
      break;
    }
  }
  result.matched_prefix_len = matched;
  if (matched == expected.size()) {
    result.verdict = Verdict::kExact;
  } else if (2 * matched >= expected.size()) {
    result.verdict = Verdict::kTruncated;
  } else {
    result.verdict = Verdict::kWrong;
  }
  return result;
}

std::optional<double> CellStats::rate(Verdict v) const {
  if (scored() == 0) {
    return std::nullopt;
  }
  std::size_t hits = 0;
  switch (v) {
    case Verdict::kExact:
      hits = exact;
      break;
    case Verdict::kTruncated:
      hits = truncated;
      break;
    case Verdict::kWrong:
      hits = wrong;
      break;
    case Verdict::kEmpty:
      hits = empty;
      break;
  }
  return static_cast<double>(hits) / static_cast<double>(scored());
}

std::uint64_t trial_seed(std::uint64_t grid_seed, std::size_t length_index,
                         std::size_t depth_index, std::size_t trial) {
  std::uint64_t h = splitmix64(grid_seed);
  h = splitmix64(h ^ length_index);
  h = splitmix64(h ^ depth_index);
  return splitmix64(h ^ trial);
}

GridResult run_grid(const GridOptions& options, CompletionClient& client,
                    const FillerCorpus& corpus) {
  if (options.lengths.empty() || options.depths.empty()) {
    throw_invalid_argument("grid needs at least one length and one depth");
  }
  if (options.trials == 0) {
    throw_invalid_argument("grid needs at least one trial");
  }
  if (options.retry.attempts < 1) {
    throw_invalid_argument("retry policy needs at least one attempt");
  }
  for (const double d : options.depths) {
    if (!(d >= 0.0 && d <= 100.0)) {
      throw_invalid_argument("depth " + format_depth(d) + " outside [0, 100]");
    }
  }
  const std::string probe_needle = render_needle(options.needle_template, "0");
  const double floor_tokens =
      approx_token_count(probe_needle) + approx_token_count(options.question_template);
  for (const std::int64_t len : options.lengths) {
    if (static_cast<double>(len) < floor_tokens) {
      throw_invalid_argument("length " + std::to_string(len) +
                             " is shorter than needle plus question");
    }
  }

  GridResult grid;
  grid.lengths = options.lengths;
  grid.depths = options.depths;
  const std::size_t n_depths = options.depths.size();
  const std::size_t total = options.lengths.size() * n_depths * options.trials;
  grid.records.resize(total);

  auto run_one = [&](std::size_t job) {
    const std::size_t trial = job % options.trials;
    const std::size_t cell = job / options.trials;
    const std::size_t li = cell / n_depths;
    const std::size_t di = cell % n_depths;

    TrialRecord& rec = grid.records[job];
    rec.length = options.lengths[li];
    rec.depth = options.depths[di];
    rec.trial = trial;
    rec.seed = trial_seed(options.seed, li, di, trial);

    NiahCase c;
    c.haystack_tokens = rec.length;
    c.depth_percent = rec.depth;
    c.seed = rec.seed;
    c.needle_template = options.needle_template;
    c.question_template = options.question_template;
    NiahDocument doc;
    try {
      doc = generate_case(c, corpus);
    } catch (const std::exception& e) {
      rec.error = std::string("generation failed: ") + e.what();
      return;
    }
    rec.expected = doc.expected;

    CompletionRequest req;
    req.prompt = build_prompt(doc);
    req.max_tokens = options.max_tokens;
    req.length = rec.length;
    req.depth = rec.depth;
    req.trial = trial;

    auto backoff = options.retry.initial_backoff;
    for (int attempt = 1; attempt <= options.retry.attempts; ++attempt) {
      rec.attempts = attempt;
      try {
        rec.answer = client.complete(req);
        rec.score = score(rec.expected, *rec.answer);
        rec.error.clear();
        return;
      } catch (const ClientError& e) {
        rec.error = std::string(e.kind() == ClientError::Kind::kMalformed ? "malformed: "
                                                                          : "unreachable: ") +
                    e.what();
        if (e.kind() == ClientError::Kind::kMalformed) {
          return;
        }
      } catch (const std::exception& e) {
        rec.error = std::string("unreachable: ") + e.what();
      }
      if (attempt < options.retry.attempts && backoff.count() > 0) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.max_concurrency, total));
  if (workers == 1) {
    for (std::size_t job = 0; job < total; ++job) {
      run_one(job);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t job = next++; job < total; job = next++) {
          run_one(job);
        }
      });
    }
  }

  grid.cells.assign(options.lengths.size() * n_depths, CellStats{});
  for (std::size_t job = 0; job < total; ++job) {
    const TrialRecord& rec = grid.records[job];
    CellStats& cs = grid.cells[job / options.trials];
    ++cs.trials;
    if (!rec.error.empty() || !rec.score) {
      ++cs.errors;
      continue;
    }
    switch (rec.score->verdict) {
      case Verdict::kExact:
        ++cs.exact;
        break;
      case Verdict::kTruncated:
        ++cs.truncated;
        break;
      case Verdict::kWrong:
        ++cs.wrong;
        break;
      case Verdict::kEmpty:
        ++cs.empty;
        break;
    }
  }
  return grid;
}

std::string grid_csv(const GridResult& grid, Verdict metric) {
  std::string out = "length";
  for (const double d : grid.depths) {
    out += ',' + format_depth(d);
  }
  out += '\n';
  char buf[32];
  for (std::size_t li = 0; li < grid.lengths.size(); ++li) {
    out += std::to_string(grid.lengths[li]);
    for (std::size_t di = 0; di < grid.depths.size(); ++di) {
      const auto r = grid.cell(li, di).rate(metric);
      if (r) {
        std::snprintf(buf, sizeof(buf), "%.4f", *r);
        out += ',';
        out += buf;
      } else {
        out += ",ERR";
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace longctx::niah
