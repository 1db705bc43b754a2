#include "inspectrl/grpo.hpp"

#include <ostream>

#include <json.hpp>

#include "inspectrl/rng.hpp"

namespace inspectrl {

ToyPolicy ToyPolicy::uniform(const std::vector<SimPrompt>& prompts, std::uint64_t seed) {
  ToyPolicy p;
  p.rng_seed = seed;
  for (const auto& prompt : prompts) p.logits.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prompt.candidates.size())));
  return p;
}

namespace {

std::size_t sample_index(const Eigen::VectorXd& probs, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<std::size_t>(k);
  }
  return static_cast<std::size_t>(probs.size() - 1);
}

}  // namespace

TrainingTrace simulate_grpo(const std::vector<SimPrompt>& prompts, ToyPolicy policy, const SimConfig& config,
                            const EmbeddingProvider& embed) {
  if (config.group_size < 2) throw ContractError("group size must be at least 2");
  if (config.steps < 0) throw ContractError("step count must be non-negative");
  if (!std::isfinite(config.lr)) throw ContractError("learning rate must be finite");
  if (policy.logits.size() != prompts.size()) throw ContractError("policy has a logit vector per prompt");

  TrainingTrace trace;
  // Each candidate is scored exactly once.
  for (std::size_t p = 0; p < prompts.size(); ++p) {
    const auto& prompt = prompts[p];
    if (prompt.candidates.empty()) throw ContractError("prompt " + prompt.prompt_id + " has an empty candidate pool");
    if (policy.logits[p].size() != static_cast<Eigen::Index>(prompt.candidates.size())) {
      throw ContractError("prompt " + prompt.prompt_id + ": logit count differs from candidate count");
    }
    Eigen::VectorXd rewards(static_cast<Eigen::Index>(prompt.candidates.size()));
    for (std::size_t k = 0; k < prompt.candidates.size(); ++k) {
      rewards[static_cast<Eigen::Index>(k)] = composite_reward(prompt.candidates[k], prompt.truth, config.weights, embed).total;
    }
    trace.candidate_rewards.push_back(std::move(rewards));
  }

  Rng rng(policy.rng_seed);
  auto record = [&](int step, std::size_t p) {
    const Eigen::VectorXd probs = softmax(policy.logits[p]);
    trace.records.push_back({step, prompts[p].prompt_id, probs.dot(trace.candidate_rewards[p]), entropy(probs)});
  };
  for (std::size_t p = 0; p < prompts.size(); ++p) record(0, p);

  const auto G = static_cast<Eigen::Index>(config.group_size);
  std::vector<std::size_t> samples(static_cast<std::size_t>(G));
  Eigen::VectorXd group_rewards(G);
  for (int step = 1; step <= config.steps; ++step) {
    for (std::size_t p = 0; p < prompts.size(); ++p) {
      Eigen::VectorXd& logits = policy.logits[p];
      const Eigen::VectorXd probs = softmax(logits);
      for (Eigen::Index i = 0; i < G; ++i) {
        samples[static_cast<std::size_t>(i)] = sample_index(probs, rng);
        group_rewards[i] = trace.candidate_rewards[p][static_cast<Eigen::Index>(samples[static_cast<std::size_t>(i)])];
      }
      const Eigen::VectorXd adv = group_advantages(group_rewards, config.epsilon);

      // sum_i A_i * (onehot(sample_i) - probs)
      Eigen::VectorXd grad = -adv.sum() * probs;
      for (Eigen::Index i = 0; i < G; ++i) grad[static_cast<Eigen::Index>(samples[static_cast<std::size_t>(i)])] += adv[i];
      logits += config.lr * grad;

      if (!logits.allFinite()) {
        throw ContractError("non-finite logits for prompt " + prompts[p].prompt_id + " at step " + std::to_string(step) +
                            " (lr " + std::to_string(config.lr) + ")");
      }
      record(step, p);
    }
  }
  trace.final_policy = std::move(policy);
  return trace;
}

void write_trace_jsonl(std::ostream& out, const TrainingTrace& trace) {
  for (const auto& r : trace.records) {
    nlohmann::ordered_json j;
    j["step"] = r.step;
    j["prompt_id"] = r.prompt_id;
    j["expected_reward"] = r.expected_reward;
    j["entropy"] = r.entropy;
    out << j.dump() << '\n';
  }
}

}  // namespace inspectrl
