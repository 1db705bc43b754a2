#include "inspectrl/io.hpp"

#include <istream>

#include <json.hpp>

namespace inspectrl {

using nlohmann::json;

namespace {

constexpr std::string_view kBundledScenario = R"json({
  "prompts": [
    {
      "prompt_id": "bottle-contamination",
      "candidates": [
        "<seg>(11,12)-(11,14), (12,11)</seg><think>Compared with the normal bottle, the rim region shows a dark contamination spot that breaks the uniform glass surface, so the sample is defective and the matching option is D</think><answer>D</answer>",
        ""
      ],
      "ground_truth": {
        "correct_choice": "D",
        "gt_patches": "(11,12)-(11,14), (12,11)",
        "pseudo_rationale": "Compared with the normal bottle, the rim region shows a dark contamination spot that breaks the uniform glass surface, so the sample is defective and the matching option is D",
        "alphabet": "ABCD"
      }
    }
  ]
})json";

std::string require_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) throw InputFormatError(std::string("missing string field '") + key + "'");
  return j[key].get<std::string>();
}

GroundTruth ground_truth_from(const json& j) {
  GroundTruth gt;
  gt.alphabet = OptionAlphabet(j.value("alphabet", std::string("ABCD")));
  const std::string choice = require_string(j, "correct_choice");
  const auto letter = extract_choice(choice, gt.alphabet);
  if (!letter) throw InputFormatError("correct_choice '" + choice + "' is not a single option letter");
  gt.correct_choice = *letter;
  const GridSpec grid = j.contains("grid") ? parse_grid_spec(j["grid"].get<std::string>()) : GridSpec{};
  gt.gt_patches = parse_seg_text(j.contains("gt_patches") ? require_string(j, "gt_patches") : std::string(), grid);
  gt.pseudo_rationale = j.contains("pseudo_rationale") ? require_string(j, "pseudo_rationale") : std::string();
  gt.validate();
  return gt;
}

std::string id_of(const json& j) {
  for (const char* key : {"id", "item_id"}) {
    if (!j.contains(key)) continue;
    return j[key].is_string() ? j[key].get<std::string>() : j[key].dump();
  }
  throw InputFormatError("record has no 'id'");
}

template <typename Fn>
void for_each_line(std::istream& in, const char* what, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = std::string(what) + " line " + std::to_string(lineno) + ": ";
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw InputFormatError(where + e.what());
    } catch (const InputFormatError& e) {
      throw InputFormatError(where + e.what());
    } catch (const ContractError& e) {
      throw InputFormatError(where + e.what());
    }
  }
}

}  // namespace

std::vector<ResponseRow> read_responses(std::istream& in) {
  std::vector<ResponseRow> rows;
  for_each_line(in, "responses", [&](const json& j) { rows.push_back({id_of(j), require_string(j, "response")}); });
  return rows;
}

std::map<std::string, GroundTruth> read_ground_truth(std::istream& in) {
  std::map<std::string, GroundTruth> out;
  for_each_line(in, "ground truth", [&](const json& j) {
    const std::string id = id_of(j);
    if (!out.emplace(id, ground_truth_from(j)).second) throw InputFormatError("duplicate ground-truth id '" + id + "'");
  });
  return out;
}

GroundTruth parse_ground_truth(std::string_view json_object) {
  try {
    return ground_truth_from(json::parse(json_object));
  } catch (const json::exception& e) {
    throw InputFormatError(std::string("ground truth: ") + e.what());
  }
}

std::string to_json_line(const std::string& id, const RewardBreakdown& b) {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["r_domain"] = b.r_domain;
  j["r_seg"] = b.r_seg;
  j["r_choice"] = b.r_choice;
  j["r_format"] = b.r_format;
  j["r_structure"] = b.r_structure;
  j["total"] = b.total;
  j["domain_degenerate"] = b.domain_degenerate;
  return j.dump();
}

std::vector<SimPrompt> parse_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputFormatError(std::string("scenario is not JSON: ") + e.what());
  }
  try {
    std::vector<SimPrompt> prompts;
    for (const auto& p : doc.at("prompts")) {
      SimPrompt sp;
      sp.prompt_id = p.at("prompt_id").get<std::string>();
      sp.candidates = p.at("candidates").get<std::vector<std::string>>();
      sp.truth = ground_truth_from(p.at("ground_truth"));
      if (sp.candidates.empty()) throw ContractError("scenario prompt " + sp.prompt_id + " has no candidates");
      prompts.push_back(std::move(sp));
    }
    if (prompts.empty()) throw ContractError("scenario has no prompts");
    return prompts;
  } catch (const json::exception& e) {
    throw InputFormatError(std::string("scenario: ") + e.what());
  }
}

std::string_view bundled_scenario() { return kBundledScenario; }

}  // namespace inspectrl
