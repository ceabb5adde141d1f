// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0
//
// Needle-in-a-haystack harness: deterministic document generation, a scorer
// that separates exact recall from a truncated trailing digit, and a grid
// runner over (length, depth) cells against a pluggable completion client.

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace longctx::niah {

/// Returns an estimate of the token count of `text`. Must be additive over
/// space-joined sentences for generation to hit its target.
using TokenCounter = std::function<double(std::string_view)>;

/// Whitespace-separated words times 1.3.
double approx_token_count(std::string_view text);

/// Sentences of filler text, one per entry, none containing a digit.
class FillerCorpus {
 public:
  /// Parses one sentence per line; blank lines and '#' comments are skipped.
  /// Throws Error(kParse) if a sentence contains a digit or nothing remains.
  static FillerCorpus from_text(std::string_view text);
  static FillerCorpus from_file(const std::string& path);
  static const FillerCorpus& bundled();

  const std::vector<std::string>& sentences() const noexcept { return sentences_; }

 private:
  std::vector<std::string> sentences_;
};

inline constexpr std::string_view kDefaultNeedleTemplate =
    "The special magic number mentioned in this document is {payload}.";
inline constexpr std::string_view kDefaultQuestionTemplate =
    "What is the special magic number mentioned in the document above? "
    "Answer with the number only.";

struct NiahCase {
  std::int64_t haystack_tokens = 2000;  // target for the document, needle included
  double depth_percent = 50.0;          // 0 = first sentence, 100 = last
  std::string needle_payload;           // digits; empty = derive from seed
  std::string needle_template{kDefaultNeedleTemplate};
  std::string question_template{kDefaultQuestionTemplate};
  std::uint64_t seed = 0;
};

struct NiahDocument {
  std::string document;
  std::string question;
  std::string expected;  // the payload
  std::size_t needle_sentence_index = 0;
  std::size_t sentence_count = 0;  // haystack sentences plus the needle
  std::size_t needle_char_offset = 0;
  double token_count = 0.0;
};

/// Seven-digit payload with a non-zero leading digit, derived from `seed`.
std::string payload_from_seed(std::uint64_t seed);

/// Deterministic for a fixed case and corpus. The needle is inserted at
/// sentence index round(depth/100 * haystack_sentences).
NiahDocument generate_case(const NiahCase& spec, const FillerCorpus& corpus = FillerCorpus::bundled(),
                           const TokenCounter& counter = approx_token_count);

/// The full prompt sent to a model: document, blank line, question.
std::string build_prompt(const NiahDocument& doc);

enum class Verdict { kExact, kTruncated, kWrong, kEmpty };

const char* to_string(Verdict v) noexcept;

struct ScoreResult {
  Verdict verdict = Verdict::kEmpty;
  std::size_t matched_prefix_len = 0;
};

/// Digits are compared after removing commas and underscores sitting between
/// digits. exact: payload appears; truncated: it does not, but a prefix of
/// at least half its length does; empty: answer is blank.
ScoreResult score(std::string_view expected, std::string_view answer);

/// --- completion clients -------------------------------------------------

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 32;
  // Grid coordinates; ignored by network clients, used by fixtures.
  std::int64_t length = 0;
  double depth = 0.0;
  std::size_t trial = 0;
};

class ClientError : public std::runtime_error {
 public:
  enum class Kind { kTransient, kMalformed };
  ClientError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Implementations must be safe to call from several threads at once.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  /// Returns completion text or throws ClientError.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

/// Maps the neutral request onto another completion API's JSON shape.
struct AdapterConfig {
  std::string prompt_field = "prompt";
  std::string max_tokens_field = "max_tokens";
  std::string temperature_field = "temperature";
  std::string response_pointer = "/text";  // RFC 6901 pointer into the reply
  std::string extra_json = "{}";           // merged into every request body
  std::vector<std::pair<std::string, std::string>> headers;

  /// {"prompt_field": ..., "response_pointer": ..., "extra": {...}, "headers": {...}}
  static AdapterConfig from_json(std::string_view text);
};

/// HTTP POST client. Only plain http:// URLs are supported.
std::unique_ptr<CompletionClient> make_http_client(const std::string& url,
                                                   AdapterConfig adapter = {},
                                                   std::chrono::milliseconds timeout =
                                                       std::chrono::seconds(120));

/// Answers with the first digit run found in the prompt.
std::unique_ptr<CompletionClient> make_echo_client();

/// Like the echo client but drops the last digit.
std::unique_ptr<CompletionClient> make_truncating_client();

/// Replays recorded answers keyed by (length, depth, trial). Fixture format:
/// {"responses": [{"length": L, "depth": D, "trial": T, "text": "..."} |
///                {"length": L, "depth": D, "trial": T, "error": "transient"|"malformed"}]}
std::unique_ptr<CompletionClient> make_fixture_client(std::string_view fixture_json);

/// --- grid ------------------------------------------------------------------

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{200};  // doubles after each failure
};

struct GridOptions {
  std::vector<std::int64_t> lengths;
  std::vector<double> depths;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t max_concurrency = 1;
  int max_tokens = 32;
  RetryPolicy retry{};
  std::string needle_template{kDefaultNeedleTemplate};
  std::string question_template{kDefaultQuestionTemplate};
};

struct TrialRecord {
  std::int64_t length = 0;
  double depth = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string expected;
  std::optional<std::string> answer;
  std::optional<ScoreResult> score;
  std::string error;  // empty on success
  int attempts = 0;
};

struct CellStats {
  std::size_t trials = 0;
  std::size_t exact = 0;
  std::size_t truncated = 0;
  std::size_t wrong = 0;
  std::size_t empty = 0;
  std::size_t errors = 0;

  std::size_t scored() const noexcept { return trials - errors; }
  /// Fraction of scored trials; nullopt when every trial errored.
  std::optional<double> rate(Verdict v) const;
  bool has_error() const noexcept { return errors > 0; }
};

struct GridResult {
  std::vector<std::int64_t> lengths;
  std::vector<double> depths;
  std::vector<CellStats> cells;      // row-major: lengths x depths
  std::vector<TrialRecord> records;  // (length, depth, trial) order

  const CellStats& cell(std::size_t length_index, std::size_t depth_index) const {
    return cells[length_index * depths.size() + depth_index];
  }
};

/// Seed of one trial, mixed from the grid seed and its coordinates.
std::uint64_t trial_seed(std::uint64_t grid_seed, std::size_t length_index,
                         std::size_t depth_index, std::size_t trial);

/// Runs every (length, depth, trial). Client failures become per-trial
/// errors; the run itself only throws for invalid options.
GridResult run_grid(const GridOptions& options, CompletionClient& client,
                    const FillerCorpus& corpus = FillerCorpus::bundled());

/// Matrix of one verdict's rate: header row of depths, one row per length.
/// Cells where every trial errored read "ERR".
std::string grid_csv(const GridResult& grid, Verdict metric = Verdict::kExact);

}  // namespace longctx::niah
