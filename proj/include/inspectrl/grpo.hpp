#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "inspectrl/embedding.hpp"
#include "inspectrl/errors.hpp"
#include "inspectrl/reward.hpp"

namespace inspectrl {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr double kAdvantageEpsilon = 1e-8;
// Below this population spread a group carries no learning signal.
inline constexpr double kDegenerateSpread = 1e-6;

/// Group-relative advantages A_i = (r_i - mean) / (std_pop + epsilon).
/// Groups whose population standard deviation is below 1e-6 get exactly
/// zero advantages.
template <typename Derived>
VectorX<typename Derived::Scalar> group_advantages(const Eigen::MatrixBase<Derived>& rewards,
                                                   typename Derived::Scalar epsilon = typename Derived::Scalar(kAdvantageEpsilon)) {
  using Scalar = typename Derived::Scalar;
  if (rewards.size() < 2) throw ContractError("a reward group needs at least two members");
  if (!rewards.allFinite()) throw ContractError("reward group has non-finite entries");
  const VectorX<Scalar> r = rewards.derived().reshaped();
  const Scalar mean = r.mean();
  const VectorX<Scalar> centered = r.array() - mean;
  const Scalar spread = std::sqrt(centered.squaredNorm() / Scalar(r.size()));
  if (spread < Scalar(kDegenerateSpread)) return VectorX<Scalar>::Zero(r.size());
  return centered / (spread + epsilon);
}

inline std::vector<double> group_advantages(const std::vector<double>& rewards, double epsilon = kAdvantageEpsilon) {
  const auto a = group_advantages(Eigen::Map<const Eigen::VectorXd>(rewards.data(), static_cast<Eigen::Index>(rewards.size())), epsilon);
  return {a.data(), a.data() + a.size()};
}

// Numerically stable softmax.
template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  const auto shifted = (logits.array() - logits.maxCoeff()).exp().eval();
  return (shifted / shifted.sum()).matrix();
}

// Shannon entropy in nats.
template <typename Derived>
typename Derived::Scalar entropy(const Eigen::MatrixBase<Derived>& probs) {
  using Scalar = typename Derived::Scalar;
  Scalar h(0);
  for (Eigen::Index i = 0; i < probs.size(); ++i)
    if (probs[i] > Scalar(0)) h -= probs[i] * std::log(probs[i]);
  return h;
}

struct SimPrompt {
  std::string prompt_id;
  std::vector<std::string> candidates;
  GroundTruth truth;
};

/// Categorical stand-in for a language-model policy: one logit vector per
/// prompt over that prompt's candidate pool.
struct ToyPolicy {
  std::vector<Eigen::VectorXd> logits;
  std::uint64_t rng_seed = 42;

  static ToyPolicy uniform(const std::vector<SimPrompt>& prompts, std::uint64_t seed);
};

struct SimConfig {
  int steps = 500;
  int group_size = 16;
  double lr = 0.1;
  double epsilon = kAdvantageEpsilon;
  RewardWeights weights;
};

struct TraceRecord {
  int step = 0;
  std::string prompt_id;
  double expected_reward = 0.0;
  double entropy = 0.0;
};

struct TrainingTrace {
  // steps + 1 records per prompt; step 0 is the initial policy.
  std::vector<TraceRecord> records;
  ToyPolicy final_policy;
  // Composite reward of each candidate, per prompt.
  std::vector<Eigen::VectorXd> candidate_rewards;
};

/// REINFORCE with group-relative advantages. Each step and prompt draws
/// group_size candidates with replacement from softmax(logits), scores them
/// with composite_reward, and applies
///   logits_k += lr * sum_i A_i * (1[sample_i == k] - softmax_k).
/// Throws ContractError if the logits become non-finite.
TrainingTrace simulate_grpo(const std::vector<SimPrompt>& prompts, ToyPolicy policy, const SimConfig& config,
                            const EmbeddingProvider& embed);

// One JSON object per line: {"step","prompt_id","expected_reward","entropy"}.
void write_trace_jsonl(std::ostream& out, const TrainingTrace& trace);

}  // namespace inspectrl
