#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "inspectrl/grpo.hpp"
#include "inspectrl/reward.hpp"

namespace inspectrl {

struct ResponseRow {
  std::string id;
  std::string response;
};

// {"id", "response"} per line.
std::vector<ResponseRow> read_responses(std::istream& in);

/// {"id" (or "item_id"), "correct_choice", "gt_patches", "pseudo_rationale",
///  "alphabet"?, "grid"?} per line, keyed by id. gt_patches is seg text on
/// the given grid (default 16x16). Stage-3 dataset records load as-is.
std::map<std::string, GroundTruth> read_ground_truth(std::istream& in);

GroundTruth parse_ground_truth(std::string_view json_object);

// {"id", "r_domain", "r_seg", "r_choice", "r_format", "r_structure", "total", "domain_degenerate"}
std::string to_json_line(const std::string& id, const RewardBreakdown& b);

/// {"prompts": [{"prompt_id", "candidates": [...], "ground_truth": {...}}]}
/// with ground_truth in the read_ground_truth schema (id optional).
std::vector<SimPrompt> parse_scenario(std::string_view json_text);

// Two candidates: a fully correct response and an empty one.
std::string_view bundled_scenario();

}  // namespace inspectrl
