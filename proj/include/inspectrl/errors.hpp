#pragma once

#include <stdexcept>
#include <string>

namespace inspectrl {

// Malformed input files or text (PGM headers, JSONL lines, seg text).
class InputFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a data contract: missing ids, shortfalls,
// dimension mismatches, empty pools.
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failures talking to an embedding or generation service.
class ProviderError : public std::runtime_error {
 public:
  enum class Kind { Connection, HttpStatus, CountMismatch, DimensionMismatch, MalformedPayload, Timeout };

  ProviderError(Kind kind, const std::string& what, std::string raw = {}, int http_status = 0)
      : std::runtime_error(what), kind_(kind), raw_(std::move(raw)), http_status_(http_status) {}

  Kind kind() const noexcept { return kind_; }
  // Raw payload that failed to parse, when there was one.
  const std::string& raw() const noexcept { return raw_; }
  // Non-zero for Kind::HttpStatus.
  int http_status() const noexcept { return http_status_; }

 private:
  Kind kind_;
  std::string raw_;
  int http_status_;
};

}  // namespace inspectrl
