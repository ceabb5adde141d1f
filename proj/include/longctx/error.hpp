// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace longctx {

enum class ErrorKind {
  kInvalidArgument,  // caller passed something outside the contract
  kDomain,           // well-formed request the model cannot satisfy
  kParse,            // malformed text input (JSON, CSV, flags)
  kIo,               // file or network failure
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void throw_invalid_argument(const std::string& message);
[[noreturn]] void throw_domain_error(const std::string& message);
[[noreturn]] void throw_parse_error(const std::string& message);
[[noreturn]] void throw_io_error(const std::string& message);

}  // namespace longctx
