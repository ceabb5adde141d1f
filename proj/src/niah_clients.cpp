// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <map>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "longctx/error.hpp"
#include "longctx/niah.hpp"

namespace longctx::niah {

namespace {

using nlohmann::json;

std::string first_digit_run(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && !(text[i] >= '0' && text[i] <= '9')) {
    ++i;
  }
  std::size_t j = i;
  while (j < text.size() && text[j] >= '0' && text[j] <= '9') {
    ++j;
  }
  return std::string(text.substr(i, j - i));
}

class EchoClient final : public CompletionClient {
 public:
  explicit EchoClient(bool drop_last) : drop_last_(drop_last) {}

  std::string complete(const CompletionRequest& request) override {
    std::string digits = first_digit_run(request.prompt);
    if (digits.empty()) {
      return "I could not find a number.";
    }
    if (drop_last_) {
      digits.pop_back();
    }
    return "The special magic number is " + digits + ".";
  }

 private:
  bool drop_last_;
};

std::string fixture_key(std::int64_t length, double depth, std::size_t trial) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%lld/%.17g/%zu", static_cast<long long>(length), depth, trial);
  return buf;
}

class FixtureClient final : public CompletionClient {
 public:
  explicit FixtureClient(std::string_view text) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw_parse_error(std::string("fixture is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("responses") || !doc["responses"].is_array()) {
      throw_parse_error("fixture must be an object with a \"responses\" array");
    }
    for (const json& r : doc["responses"]) {
      try {
        Entry e;
        if (r.contains("text")) {
          e.text = r.at("text").get<std::string>();
        } else {
          const std::string kind = r.at("error").get<std::string>();
          if (kind != "transient" && kind != "malformed") {
            throw_parse_error("fixture error kind must be transient or malformed");
          }
          e.error = kind;
        }
        const auto key = fixture_key(r.at("length").get<std::int64_t>(),
                                     r.at("depth").get<double>(), r.at("trial").get<std::size_t>());
        entries_[key] = std::move(e);
      } catch (const json::exception& ex) {
        throw_parse_error(std::string("bad fixture entry: ") + ex.what());
      }
    }
  }

  std::string complete(const CompletionRequest& request) override {
    const auto it = entries_.find(fixture_key(request.length, request.depth, request.trial));
    if (it == entries_.end()) {
      throw ClientError(ClientError::Kind::kMalformed, "no recorded response for this cell");
    }
    if (it->second.error == "transient") {
      throw ClientError(ClientError::Kind::kTransient, "recorded transient failure");
    }
    if (it->second.error == "malformed") {
      throw ClientError(ClientError::Kind::kMalformed, "recorded malformed response");
    }
    return it->second.text;
  }

 private:
  struct Entry {
    std::string text;
    std::string error;
  };
  std::map<std::string, Entry> entries_;
};

class HttpClient final : public CompletionClient {
 public:
  HttpClient(const std::string& url, AdapterConfig adapter, std::chrono::milliseconds timeout)
      : adapter_(std::move(adapter)), timeout_(timeout) {
    constexpr std::string_view kScheme = "http://";
    if (url.rfind(kScheme, 0) != 0) {
      throw_invalid_argument("endpoint must be an http:// URL, got " + url);
    }
    const std::size_t slash = url.find('/', kScheme.size());
    base_ = url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url.substr(slash);
    if (base_.size() == kScheme.size()) {
      throw_invalid_argument("endpoint URL has no host: " + url);
    }
    try {
      extra_ = json::parse(adapter_.extra_json);
    } catch (const json::parse_error& e) {
      throw_parse_error(std::string("adapter extra body is not JSON: ") + e.what());
    }
    if (!extra_.is_object()) {
      throw_parse_error("adapter extra body must be a JSON object");
    }
    try {
      pointer_ = json::json_pointer(adapter_.response_pointer);
    } catch (const json::exception& e) {
      throw_parse_error(std::string("bad response pointer: ") + e.what());
    }
  }

  std::string complete(const CompletionRequest& request) override {
    json body = extra_;
    body[adapter_.prompt_field] = request.prompt;
    body[adapter_.max_tokens_field] = request.max_tokens;
    body[adapter_.temperature_field] = 0;

    httplib::Client cli(base_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    for (const auto& [k, v] : adapter_.headers) {
      headers.emplace(k, v);
    }
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
      throw ClientError(ClientError::Kind::kTransient,
                        "request failed: " + httplib::to_string(res.error()));
    }
    if (res->status >= 500 || res->status == 429) {
      throw ClientError(ClientError::Kind::kTransient,
                        "server returned HTTP " + std::to_string(res->status));
    }
    if (res->status < 200 || res->status >= 300) {
      throw ClientError(ClientError::Kind::kMalformed,
                        "server rejected request with HTTP " + std::to_string(res->status));
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::parse_error&) {
      throw ClientError(ClientError::Kind::kMalformed, "response body is not JSON");
    }
    if (!reply.contains(pointer_) || !reply.at(pointer_).is_string()) {
      throw ClientError(ClientError::Kind::kMalformed,
                        "response has no string at " + adapter_.response_pointer);
    }
    return reply.at(pointer_).get<std::string>();
  }

 private:
  AdapterConfig adapter_;
  std::chrono::milliseconds timeout_;
  std::string base_;
  std::string path_;
  json extra_;
  json::json_pointer pointer_;
};

}  // namespace

AdapterConfig AdapterConfig::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw_parse_error(std::string("adapter config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw_parse_error("adapter config must be a JSON object");
  }
  AdapterConfig cfg;
  try {
    cfg.prompt_field = doc.value("prompt_field", cfg.prompt_field);
    cfg.max_tokens_field = doc.value("max_tokens_field", cfg.max_tokens_field);
    cfg.temperature_field = doc.value("temperature_field", cfg.temperature_field);
    cfg.response_pointer = doc.value("response_pointer", cfg.response_pointer);
    if (doc.contains("extra")) {
      cfg.extra_json = doc.at("extra").dump();
    }
    if (doc.contains("headers")) {
      for (const auto& [k, v] : doc.at("headers").items()) {
        cfg.headers.emplace_back(k, v.get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw_parse_error(std::string("bad adapter config: ") + e.what());
  }
  return cfg;
}

std::unique_ptr<CompletionClient> make_http_client(const std::string& url, AdapterConfig adapter,
                                                   std::chrono::milliseconds timeout) {
  return std::make_unique<HttpClient>(url, std::move(adapter), timeout);
}

std::unique_ptr<CompletionClient> make_echo_client() { return std::make_unique<EchoClient>(false); }

std::unique_ptr<CompletionClient> make_truncating_client() {
  return std::make_unique<EchoClient>(true);
}

std::unique_ptr<CompletionClient> make_fixture_client(std::string_view fixture_json) {
  return std::make_unique<FixtureClient>(fixture_json);
}

}  // namespace longctx::niah
