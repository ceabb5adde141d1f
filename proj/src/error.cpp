// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0

#include "longctx/error.hpp"

namespace longctx {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return "invalid_argument";
    case ErrorKind::kDomain:
      return "domain_error";
    case ErrorKind::kParse:
      return "parse_error";
    case ErrorKind::kIo:
      return "io_error";
  }
  return "unknown";
}

void throw_invalid_argument(const std::string& message) {
  throw Error(ErrorKind::kInvalidArgument, message);
}

void throw_domain_error(const std::string& message) {
  throw Error(ErrorKind::kDomain, message);
}

void throw_parse_error(const std::string& message) {
  throw Error(ErrorKind::kParse, message);
}

void throw_io_error(const std::string& message) {
  throw Error(ErrorKind::kIo, message);
}

}  // namespace longctx
