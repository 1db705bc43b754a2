#include <thread>

#include <json.hpp>

#include "inspectrl/embedding.hpp"

namespace inspectrl {
namespace {

bool retryable(const ProviderError& e) {
  switch (e.kind()) {
    case ProviderError::Kind::Connection:
    case ProviderError::Kind::Timeout:
      return true;
    case ProviderError::Kind::HttpStatus:
      return e.http_status() == 429 || e.http_status() >= 500;
    default:
      return false;
  }
}

}  // namespace

RemoteEmbedder::RemoteEmbedder(RemoteEmbeddingConfig config)
    : config_(std::move(config)),
      endpoint_(HttpEndpoint::parse(config_.endpoint)),
      in_flight_(std::make_unique<std::counting_semaphore<>>(std::max(1, config_.max_in_flight))) {}

std::string RemoteEmbedder::describe() const { return "remote:" + config_.endpoint; }

std::string RemoteEmbedder::last_model() const {
  std::lock_guard lock(model_mu_);
  return model_;
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) const {
  if (texts.empty()) return {};
  auto backoff = config_.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      return request_once(texts);
    } catch (const ProviderError& e) {
      if (!retryable(e) || attempt >= config_.max_retries) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

std::vector<EmbeddingVector> RemoteEmbedder::request_once(std::span<const std::string> texts) const {
  using nlohmann::json;
  const std::string body = json{{"texts", json(std::vector<std::string>(texts.begin(), texts.end()))}}.dump();

  HttpReply reply;
  in_flight_->acquire();
  try {
    reply = http_post_json(endpoint_, "/embed", body, config_.timeout, config_.bearer_token);
  } catch (...) {
    in_flight_->release();
    throw;
  }
  in_flight_->release();

  if (reply.status < 200 || reply.status >= 300) {
    throw ProviderError(ProviderError::Kind::HttpStatus,
                        "embedding service returned HTTP " + std::to_string(reply.status), reply.body, reply.status);
  }

  json doc;
  try {
    doc = json::parse(reply.body);
  } catch (const json::exception& e) {
    throw ProviderError(ProviderError::Kind::MalformedPayload, std::string("embedding reply is not JSON: ") + e.what(),
                        reply.body);
  }
  if (!doc.is_object() || !doc.contains("embeddings") || !doc["embeddings"].is_array()) {
    throw ProviderError(ProviderError::Kind::MalformedPayload, "embedding reply lacks an 'embeddings' array",
                        reply.body);
  }
  const auto& rows = doc["embeddings"];
  if (rows.size() != texts.size()) {
    throw ProviderError(ProviderError::Kind::CountMismatch, "embedding service returned " +
                                                                std::to_string(rows.size()) + " vectors for " +
                                                                std::to_string(texts.size()) + " texts");
  }

  std::vector<EmbeddingVector> out;
  out.reserve(rows.size());
  std::size_t dim = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || row.empty()) {
      throw ProviderError(ProviderError::Kind::MalformedPayload, "embedding " + std::to_string(i) + " is not a vector",
                          reply.body);
    }
    if (i == 0) dim = row.size();
    if (row.size() != dim) {
      throw ProviderError(ProviderError::Kind::DimensionMismatch,
                          "embedding " + std::to_string(i) + " has dimension " + std::to_string(row.size()) +
                              ", expected " + std::to_string(dim));
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      if (!row[k].is_number()) {
        throw ProviderError(ProviderError::Kind::MalformedPayload, "non-numeric embedding component", reply.body);
      }
      v[static_cast<Eigen::Index>(k)] = row[k].get<double>();
    }
    if (!v.allFinite()) {
      throw ProviderError(ProviderError::Kind::MalformedPayload, "non-finite embedding component", reply.body);
    }
    out.emplace_back(std::move(v));
  }
  if (doc.contains("dim") && doc["dim"].is_number_integer() && doc["dim"].get<std::size_t>() != dim) {
    throw ProviderError(ProviderError::Kind::DimensionMismatch,
                        "advertised dim " + doc["dim"].dump() + " differs from vectors of size " + std::to_string(dim));
  }
  if (doc.contains("model") && doc["model"].is_string()) {
    std::lock_guard lock(model_mu_);
    model_ = doc["model"].get<std::string>();
  }
  return out;
}

std::vector<EmbeddingVector> remote_embed_batch(std::span<const std::string> texts, const RemoteEmbeddingConfig& config) {
  return RemoteEmbedder(config).embed_batch(texts);
}

}  // namespace inspectrl
