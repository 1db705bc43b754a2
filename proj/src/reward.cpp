#include "inspectrl/reward.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

namespace inspectrl {

void GroundTruth::validate() const {
  if (!alphabet.contains(correct_choice)) {
    throw ContractError(std::string("correct choice '") + correct_choice + "' is not in alphabet " + alphabet.letters());
  }
}

void RewardWeights::validate() const {
  const std::array<std::pair<const char*, double>, 6> all{{{"lambda_domain", lambda_domain},
                                                           {"w_choice", w_choice},
                                                           {"w_format", w_format},
                                                           {"w_seg", w_seg},
                                                           {"w_struct_bonus", w_struct_bonus},
                                                           {"w_struct_penalty", w_struct_penalty}}};
  for (const auto& [name, v] : all) {
    if (!std::isfinite(v) || v < 0.0) throw ContractError(std::string("reward weight ") + name + " must be finite and >= 0");
  }
}

double f1_score(const PatchSet& predicted, const PatchSet& truth) {
  const std::size_t denom = predicted.size() + truth.size();
  if (denom == 0) return 0.0;
  return 2.0 * static_cast<double>(intersection_size(predicted, truth)) / static_cast<double>(denom);
}

double segmentation_reward(const PatchSet& predicted, const PatchSet& truth) {
  if (!(predicted.grid() == truth.grid())) throw ContractError("predicted and ground-truth patches use different grids");
  if (predicted.empty() && truth.empty()) return 1.0;
  if (predicted.empty() || truth.empty()) return 0.0;
  return 0.2 + 0.8 * f1_score(predicted, truth);
}

double segmentation_reward(const SegDecodeResult& predicted, const PatchSet& truth) {
  if (const auto* p = std::get_if<PatchSet>(&predicted)) return segmentation_reward(*p, truth);
  return 0.0;
}

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

DomainReward domain_reasoning_reward(std::string_view generated, std::string_view reference,
                                     const EmbeddingProvider& embed, double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw ContractError("domain reward coefficient must be finite and >= 0");
  if (blank(generated) || blank(reference)) return {0.0, true};
  const std::array<std::string, 2> texts{std::string(generated), std::string(reference)};
  const auto vecs = embed.embed_batch(texts);
  if (vecs.size() != 2) {
    throw ProviderError(ProviderError::Kind::CountMismatch, "embedding provider returned " +
                                                                std::to_string(vecs.size()) + " vectors for 2 texts");
  }
  if (vecs[0].norm() == 0.0 || vecs[1].norm() == 0.0) return {0.0, true};
  return {lambda * cosine(vecs[0], vecs[1]), false};
}

double choice_reward(const ParsedResponse& parsed, const GroundTruth& truth) {
  if (!parsed.answer_text) return 0.0;
  const auto choice = extract_choice(*parsed.answer_text, truth.alphabet);
  return choice && *choice == truth.correct_choice ? 1.0 : 0.0;
}

double format_reward(const ParsedResponse& parsed) { return parsed.format_valid && parsed.tag_order_valid ? 1.0 : 0.0; }

double structure_reward(const ParsedResponse& parsed, const GroundTruth& truth, double w_bonus, double w_penalty) {
  if (!parsed.think_text) return 0.0;
  const std::string& think = *parsed.think_text;
  const auto mentions = find_choice_mentions(think, truth.alphabet);
  if (mentions.empty()) return 0.0;

  const std::size_t midpoint = think.size() / 2;
  const auto early = std::count_if(mentions.begin(), mentions.end(),
                                   [&](const ChoiceMention& m) { return m.offset < midpoint; });
  const auto& last = mentions.back();
  const bool conclusive = last.offset >= midpoint && last.letter == truth.correct_choice;

  const double r = (conclusive ? w_bonus : 0.0) - w_penalty * static_cast<double>(std::min<std::ptrdiff_t>(2, early));
  return std::clamp(r, -w_bonus, w_bonus);
}

RewardBreakdown composite_reward(std::string_view raw, const GroundTruth& truth, const RewardWeights& weights,
                                 const EmbeddingProvider& embed) {
  const ParsedResponse parsed = parse_response(raw);
  RewardBreakdown out;

  // A missing <seg> block is an unparseable prediction.
  out.r_seg = parsed.seg_text
                  ? segmentation_reward(decode_seg_text(*parsed.seg_text, truth.gt_patches.grid()), truth.gt_patches)
                  : 0.0;
  out.r_choice = choice_reward(parsed, truth);
  out.r_format = format_reward(parsed);
  out.r_structure = structure_reward(parsed, truth, weights.w_struct_bonus, weights.w_struct_penalty);

  if (parsed.think_text) {
    const auto domain = domain_reasoning_reward(*parsed.think_text, truth.pseudo_rationale, embed, weights.lambda_domain);
    out.r_domain = domain.value;
    out.domain_degenerate = domain.degenerate;
  } else {
    out.domain_degenerate = true;
  }

  out.total = weights.w_choice * out.r_choice + weights.w_format * out.r_format + weights.w_seg * out.r_seg +
              out.r_structure + out.r_domain;
  return out;
}

}  // namespace inspectrl
