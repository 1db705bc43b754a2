#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "inspectrl/errors.hpp"
#include "inspectrl/http.hpp"

namespace inspectrl {

/// Dense embedding with its Euclidean norm cached at construction.
template <typename Scalar>
class BasicEmbedding {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicEmbedding() = default;
  explicit BasicEmbedding(Vector values) : values_(std::move(values)) {
    if (!values_.allFinite()) throw ContractError("embedding has non-finite components");
    norm_ = values_.norm();
  }

  const Vector& values() const noexcept { return values_; }
  Scalar norm() const noexcept { return norm_; }
  Eigen::Index dim() const noexcept { return values_.size(); }

 private:
  Vector values_;
  Scalar norm_ = Scalar(0);
};

using EmbeddingVector = BasicEmbedding<double>;

/// dot(a, b) / (|a| |b|), clamped to [-1, 1]; zero when either norm is zero.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) {
    throw ContractError("cosine of vectors with dimensions " + std::to_string(a.size()) + " and " +
                        std::to_string(b.size()));
  }
  const Scalar denom = a.norm() * b.norm();
  if (denom == Scalar(0)) return Scalar(0);
  const Scalar c = a.dot(b) / denom;
  return std::clamp(c, Scalar(-1), Scalar(1));
}

template <typename Scalar>
Scalar cosine(const BasicEmbedding<Scalar>& a, const BasicEmbedding<Scalar>& b) {
  if (a.dim() != b.dim()) {
    throw ContractError("cosine of embeddings with dimensions " + std::to_string(a.dim()) + " and " +
                        std::to_string(b.dim()));
  }
  const Scalar denom = a.norm() * b.norm();
  if (denom == Scalar(0)) return Scalar(0);
  return std::clamp(a.values().dot(b.values()) / denom, Scalar(-1), Scalar(1));
}

// Implementations must be safe to call from several threads at once.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // One vector per input, all of the same dimension.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const = 0;
  virtual std::string describe() const = 0;
};

inline constexpr int kDefaultHashedDim = 256;

/// Feature-hashed bag of words: lowercase, split on every non-alphanumeric
/// byte, bump component fnv1a64(token) % dim for each token, L2-normalize.
/// Text without tokens yields the zero vector.
EmbeddingVector hashed_embed(std::string_view text, int dim = kDefaultHashedDim);

class HashedEmbedder final : public EmbeddingProvider {
 public:
  explicit HashedEmbedder(int dim = kDefaultHashedDim);
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
  std::string describe() const override;
  int dim() const noexcept { return dim_; }

 private:
  int dim_;
};

struct RemoteEmbeddingConfig {
  std::string endpoint;  // base URL; requests go to {endpoint}/embed
  std::string bearer_token;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::milliseconds timeout{30000};
  int max_in_flight = 8;
};

/// Client for the /embed service:
///   request  {"texts": [...]}
///   response {"embeddings": [[...], ...], "dim": N, "model": "..."}
/// Connection failures, 5xx and 429 are retried with exponential backoff.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(RemoteEmbeddingConfig config);
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
  std::string describe() const override;

  // Model identifier reported by the last successful response, if any.
  std::string last_model() const;

 private:
  std::vector<EmbeddingVector> request_once(std::span<const std::string> texts) const;

  RemoteEmbeddingConfig config_;
  HttpEndpoint endpoint_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
  mutable std::mutex model_mu_;
  mutable std::string model_;
};

// One-shot convenience over RemoteEmbedder.
std::vector<EmbeddingVector> remote_embed_batch(std::span<const std::string> texts, const RemoteEmbeddingConfig& config);

}  // namespace inspectrl
