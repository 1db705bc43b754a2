#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "inspectrl/reward.hpp"

namespace inspectrl {

/// Flat "key = value" document. Blank lines and lines starting with '#' or
/// ';' are ignored, values may be wrapped in double quotes, and keys may use
/// '-' or '_' interchangeably (stored with '_').
std::map<std::string, std::string> parse_kv(std::istream& in);

// Applies any of lambda_domain, w_choice, w_format, w_seg, w_struct_bonus,
// w_struct_penalty found in the document; unknown keys are an error.
RewardWeights apply_weight_overrides(RewardWeights base, const std::map<std::string, std::string>& kv);
RewardWeights load_weights(const std::filesystem::path& path, RewardWeights base = {});

}  // namespace inspectrl
