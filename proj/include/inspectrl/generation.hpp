#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include "inspectrl/http.hpp"

namespace inspectrl {

// Text generator behind every dataset-construction call. Implementations
// must be callable concurrently.
class GenerationProvider {
 public:
  virtual ~GenerationProvider() = default;
  // `user` is always a JSON object carrying a "task" field.
  virtual std::string generate(std::string_view system, std::string_view user) const = 0;
  virtual std::string describe() const = 0;
};

struct HttpGenerationConfig {
  std::string endpoint;  // requests go to {endpoint}/generate
  std::string bearer_token;
  int max_tokens = 2048;
  std::chrono::milliseconds timeout{120000};
  int max_retries = 0;
  std::chrono::milliseconds initial_backoff{500};
};

/// POST {endpoint}/generate {"system", "user", "max_tokens"} -> {"text"}.
class HttpGenerationProvider final : public GenerationProvider {
 public:
  explicit HttpGenerationProvider(HttpGenerationConfig config);
  std::string generate(std::string_view system, std::string_view user) const override;
  std::string describe() const override { return "remote:" + config_.endpoint; }

 private:
  HttpGenerationConfig config_;
  HttpEndpoint endpoint_;
};

/// Deterministic template-based stand-in used when no generation service is
/// configured. Output is derived only from the request payload.
class OfflineGenerationProvider final : public GenerationProvider {
 public:
  std::string generate(std::string_view system, std::string_view user) const override;
  std::string describe() const override { return "builtin-offline"; }
};

}  // namespace inspectrl
