#include <cctype>

#include "inspectrl/embedding.hpp"
#include "inspectrl/rng.hpp"

namespace inspectrl {

EmbeddingVector hashed_embed(std::string_view text, int dim) {
  if (dim < 8) throw ContractError("hashed embedding dimension must be >= 8");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(dim);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    counts[static_cast<Eigen::Index>(fnv1a64(token) % static_cast<std::uint64_t>(dim))] += 1.0;
    token.clear();
  };
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      token += static_cast<char>(std::tolower(ch));
    } else {
      flush();
    }
  }
  flush();
  const double n = counts.norm();
  if (n > 0.0) counts /= n;
  return EmbeddingVector(std::move(counts));
}

HashedEmbedder::HashedEmbedder(int dim) : dim_(dim) {
  if (dim < 8) throw ContractError("hashed embedding dimension must be >= 8");
}

std::vector<EmbeddingVector> HashedEmbedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hashed_embed(t, dim_));
  return out;
}

std::string HashedEmbedder::describe() const { return "builtin-hashed/" + std::to_string(dim_); }

}  // namespace inspectrl
