#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "inspectrl/embedding.hpp"
#include "inspectrl/grid_codec.hpp"
#include "inspectrl/response_parser.hpp"

namespace inspectrl {

struct GroundTruth {
  char correct_choice = 'A';
  PatchSet gt_patches;
  std::string pseudo_rationale;
  OptionAlphabet alphabet;

  // Throws ContractError when correct_choice is outside the alphabet.
  void validate() const;
};

inline constexpr double kDefaultDomainLambda = 0.1;

struct RewardWeights {
  double lambda_domain = kDefaultDomainLambda;
  double w_choice = 1.0;
  double w_format = 0.5;
  double w_seg = 1.0;
  double w_struct_bonus = 0.5;
  double w_struct_penalty = 0.25;

  // Throws ContractError unless every weight is finite and non-negative.
  void validate() const;
};

struct RewardBreakdown {
  double r_domain = 0.0;
  double r_seg = 0.0;
  double r_choice = 0.0;
  double r_format = 0.0;
  double r_structure = 0.0;
  double total = 0.0;
  // Set when the domain reward was zeroed because a text had no content or
  // an embedding had zero norm.
  bool domain_degenerate = false;
};

/// Piecewise F1 reward over grid cells:
///   1.0                  when both sets are empty,
///   0.2 + 0.8 * F1       when both are non-empty,
///   0.0                  otherwise, and for unparseable predictions.
double segmentation_reward(const SegDecodeResult& predicted, const PatchSet& truth);
double segmentation_reward(const PatchSet& predicted, const PatchSet& truth);

// 2|P ∩ G| / (|P| + |G|); zero when both are empty.
double f1_score(const PatchSet& predicted, const PatchSet& truth);

struct DomainReward {
  double value = 0.0;
  bool degenerate = false;
};

/// lambda * cos(phi(generated), phi(reference)). Blank text or zero-norm
/// embeddings give 0 with the degenerate flag set. Provider errors propagate.
DomainReward domain_reasoning_reward(std::string_view generated, std::string_view reference,
                                     const EmbeddingProvider& embed, double lambda = kDefaultDomainLambda);

double choice_reward(const ParsedResponse& parsed, const GroundTruth& truth);
double format_reward(const ParsedResponse& parsed);

/// Bonus when the last option mentioned in the reasoning sits in its second
/// half and is the correct one; penalty per option mentioned in the first
/// half (at most two counted). The first half is byte offsets below
/// floor(len / 2). Result is clamped to [-w_bonus, w_bonus].
double structure_reward(const ParsedResponse& parsed, const GroundTruth& truth, double w_bonus, double w_penalty);

/// Parses once and combines all five components:
///   total = w_choice*r_choice + w_format*r_format + w_seg*r_seg + r_structure + r_domain
RewardBreakdown composite_reward(std::string_view raw, const GroundTruth& truth, const RewardWeights& weights,
                                 const EmbeddingProvider& embed);

}  // namespace inspectrl
