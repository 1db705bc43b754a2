#include "inspectrl/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <istream>
#include <set>

#include <json.hpp>

#include "inspectrl/parallel.hpp"
#include "inspectrl/prompts.hpp"
#include "inspectrl/rng.hpp"

namespace inspectrl {

using nlohmann::json;
using nlohmann::ordered_json;

bool NormalPool::has(const std::string& category) const {
  const auto it = images_.find(category);
  return it != images_.end() && !it->second.empty();
}

const std::string& NormalPool::choose(const std::string& category, std::uint64_t seed, std::uint64_t index) const {
  const auto it = images_.find(category);
  if (it == images_.end() || it->second.empty()) throw ContractError("no normal images for category '" + category + "'");
  Rng rng(derive_seed(seed, "normal/" + category, index));
  return it->second[rng.index(it->second.size())];
}

// ---- Stage 1 -----------------------------------------------------------------

Stage1Result build_stage1_record(const MaskImage& mask, std::string query_ref, std::string normal_ref,
                                 std::string category, std::string defect_type, const GenerationProvider& provider,
                                 std::uint64_t seed) {
  const PatchSet patches = rasterize_mask(mask, GridSpec{16, 16});
  Stage1Result result;
  auto& rec = result.record;
  rec.query_image_ref = std::move(query_ref);
  rec.normal_image_ref = std::move(normal_ref);
  rec.category = std::move(category);
  rec.defect_type = std::move(defect_type);
  rec.seg_text = encode_patches(patches);
  rec.seed = seed;
  if (patches.empty() && rec.defect_type != kDefectFreeType) {
    result.warnings.push_back("mask for " + rec.query_image_ref + " (" + rec.defect_type + ") marks no grid cells");
  }

  json cells = json::array();
  for (const auto& c : patches.sorted()) cells.push_back({c.row, c.col});
  const json payload{{"task", "comparative_explanation"},
                     {"category", rec.category},
                     {"defect_type", rec.defect_type},
                     {"query_image", rec.query_image_ref},
                     {"normal_image", rec.normal_image_ref},
                     {"anomalous_patches", rec.seg_text},
                     {"patch_list", cells}};
  rec.think_text = provider.generate(comparative_explanation_prompt(), payload.dump());
  if (rec.think_text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ProviderError(ProviderError::Kind::MalformedPayload, "provider returned an empty explanation", rec.think_text);
  }
  return result;
}

// ---- Stage 2 -----------------------------------------------------------------

std::string_view origin_name(QAOrigin o) {
  switch (o) {
    case QAOrigin::Generated:
      return "generated";
    case QAOrigin::Paraphrase1:
      return "paraphrase-1";
    case QAOrigin::Paraphrase2:
      return "paraphrase-2";
  }
  return "generated";
}

namespace {

struct QAPair {
  std::string question;
  std::string answer;
};

// Accepts a bare JSON array, optionally wrapped in a ``` fence.
std::vector<QAPair> parse_qa_array(const std::string& raw) {
  std::string text = raw;
  if (const auto fence = text.find("```"); fence != std::string::npos) {
    const auto body = text.find('\n', fence);
    const auto end = text.find("```", body == std::string::npos ? fence + 3 : body);
    if (body != std::string::npos && end != std::string::npos) text = text.substr(body + 1, end - body - 1);
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ProviderError(ProviderError::Kind::MalformedPayload, std::string("QA reply is not JSON: ") + e.what(), raw);
  }
  if (!doc.is_array()) throw ProviderError(ProviderError::Kind::MalformedPayload, "QA reply is not a JSON array", raw);
  std::vector<QAPair> out;
  for (const auto& el : doc) {
    if (!el.is_object() || !el.contains("question") || !el.contains("answer") || !el["question"].is_string() ||
        !el["answer"].is_string()) {
      throw ProviderError(ProviderError::Kind::MalformedPayload, "QA element lacks string question/answer", raw);
    }
    QAPair p{el["question"].get<std::string>(), el["answer"].get<std::string>()};
    if (p.question.empty() || p.answer.empty()) {
      throw ProviderError(ProviderError::Kind::MalformedPayload, "QA element has an empty question or answer", raw);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string slug(std::string_view s) {
  std::string out;
  for (unsigned char ch : s) out += std::isalnum(ch) ? static_cast<char>(std::tolower(ch)) : '_';
  return out;
}

}  // namespace

Stage2Result build_stage2_qa(const DomainSnippet& snippet, const GenerationProvider& provider, const NormalPool& normals,
                             const Stage2Options& options) {
  if (snippet.body.find_first_not_of(" \t\r\n") == std::string::npos) throw ContractError("domain snippet body is empty");
  if (options.count < 1) throw ContractError("QA count must be positive");
  if (options.paraphrases_per < 0 || options.paraphrases_per > 2) {
    throw ContractError("paraphrases per pair must be 0, 1 or 2");
  }
  const auto n = static_cast<std::size_t>(options.count);
  Stage2Result result;

  const json request{{"task", "qa_generation"},
                     {"category", snippet.category},
                     {"defect_type", snippet.defect_type},
                     {"count", options.count},
                     {"snippet", snippet.body}};
  const std::string reply = provider.generate(render_qa_generation_prompt(options.count, snippet.body), request.dump());

  std::vector<QAPair> pairs;
  std::set<std::string> seen;
  std::size_t duplicates = 0;
  for (auto& p : parse_qa_array(reply)) {
    if (!seen.insert(p.question).second) {
      ++duplicates;
      continue;
    }
    pairs.push_back(std::move(p));
  }
  if (duplicates) result.warnings.push_back("dropped " + std::to_string(duplicates) + " duplicate question(s)");
  if (pairs.size() < n) throw ShortfallError("unique question-answer pairs for " + snippet.category, n, pairs.size());
  if (pairs.size() > n) {
    result.warnings.push_back("provider returned " + std::to_string(pairs.size()) + " pairs, keeping the first " +
                              std::to_string(n));
    pairs.resize(n);
  }

  const std::string base = slug(snippet.category) + "-" + slug(snippet.defect_type);
  const std::string paraphrase_prompt = render_paraphrase_prompt(options.paraphrases_per);
  const auto per = static_cast<std::size_t>(options.paraphrases_per);

  std::vector<std::vector<QAPair>> variants(n);
  std::vector<std::string> overflow(n);
  if (per > 0) {
    parallel_for(n, options.jobs, [&](std::size_t i) {
      const json req{{"task", "paraphrase"},           {"category", snippet.category}, {"defect_type", snippet.defect_type},
                     {"question", pairs[i].question}, {"answer", pairs[i].answer},   {"variants", options.paraphrases_per}};
      auto got = parse_qa_array(provider.generate(paraphrase_prompt, req.dump()));
      if (got.size() < per) throw ShortfallError("paraphrases for question " + std::to_string(i + 1), per, got.size());
      if (got.size() > per) {
        overflow[i] = "question " + std::to_string(i + 1) + ": kept " + std::to_string(per) + " of " +
                      std::to_string(got.size()) + " paraphrases";
        got.resize(per);
      }
      variants[i] = std::move(got);
    });
  }
  for (auto& w : overflow)
    if (!w.empty()) result.warnings.push_back(std::move(w));

  std::uint64_t index = 0;
  auto make = [&](const QAPair& p, std::string id, QAOrigin origin, std::optional<std::string> source) {
    QARecord r;
    r.qa_id = std::move(id);
    r.category = snippet.category;
    r.defect_type = snippet.defect_type;
    r.question = p.question;
    r.answer = p.answer;
    r.origin = origin;
    r.source_qa_id = std::move(source);
    r.seed = options.seed;
    r.normal_image_ref = normals.choose(snippet.category, derive_seed(options.seed, base), index++);
    return r;
  };
  auto id_of = [&](std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03zu", i + 1);
    return base + "-" + buf;
  };
  for (std::size_t i = 0; i < n; ++i) result.records.push_back(make(pairs[i], id_of(i), QAOrigin::Generated, std::nullopt));
  for (std::size_t k = 0; k < per; ++k) {
    const auto origin = k == 0 ? QAOrigin::Paraphrase1 : QAOrigin::Paraphrase2;
    for (std::size_t i = 0; i < n; ++i) {
      result.records.push_back(make(variants[i][k], id_of(i) + "-p" + std::to_string(k + 1), origin, id_of(i)));
    }
  }
  return result;
}

// ---- Stage 3 -----------------------------------------------------------------

std::map<std::string, std::size_t> select_one_per_category(const Catalog& catalog, std::uint64_t seed) {
  std::map<std::string, std::size_t> chosen;
  for (const auto& [category, items] : catalog) {
    if (items.empty()) throw ContractError("catalog category '" + category + "' is empty");
    Rng rng(derive_seed(seed, "stage3/" + category));
    chosen[category] = static_cast<std::size_t>(rng.index(items.size()));
  }
  return chosen;
}

std::vector<Stage3Record> sample_stage3(const Catalog& catalog, std::uint64_t seed, const GenerationProvider& provider,
                                        std::size_t jobs) {
  const auto chosen = select_one_per_category(catalog, seed);
  std::vector<Stage3Record> out;
  out.reserve(chosen.size());
  for (const auto& [category, idx] : chosen) out.push_back({catalog.at(category)[idx], {}, seed});

  parallel_for(out.size(), jobs, [&](std::size_t i) {
    const CatalogItem& it = out[i].item;
    const json req{{"task", "pseudo_rationale"},
                   {"category", it.category},
                   {"question", it.question},
                   {"options", it.options},
                   {"correct_choice", it.correct_choice},
                   {"query_image", it.query_image_ref},
                   {"normal_image", it.normal_image_ref},
                   {"juxtaposed_reasoning", it.juxtaposed_reasoning},
                   {"domain_knowledge", it.domain_knowledge}};
    out[i].pseudo_rationale = provider.generate(pseudo_rationale_prompt(), req.dump());
    if (out[i].pseudo_rationale.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw ProviderError(ProviderError::Kind::MalformedPayload, "provider returned an empty rationale for " + it.item_id);
    }
  });
  return out;
}

// ---- JSONL I/O ---------------------------------------------------------------

std::string to_json_line(const Stage1Record& r) {
  ordered_json j;
  j["query_image_ref"] = r.query_image_ref;
  j["normal_image_ref"] = r.normal_image_ref;
  j["category"] = r.category;
  j["defect_type"] = r.defect_type;
  j["seg_text"] = r.seg_text;
  j["think_text"] = r.think_text;
  j["seed"] = r.seed;
  return j.dump();
}

std::string to_json_line(const QARecord& r) {
  ordered_json j;
  j["qa_id"] = r.qa_id;
  j["category"] = r.category;
  j["defect_type"] = r.defect_type;
  j["question"] = r.question;
  j["answer"] = r.answer;
  j["origin"] = origin_name(r.origin);
  j["source_qa_id"] = r.source_qa_id ? ordered_json(*r.source_qa_id) : ordered_json(nullptr);
  j["normal_image_ref"] = r.normal_image_ref;
  j["seed"] = r.seed;
  return j.dump();
}

std::string to_json_line(const Stage3Record& r) {
  ordered_json j;
  j["item_id"] = r.item.item_id;
  j["category"] = r.item.category;
  j["question"] = r.item.question;
  j["options"] = r.item.options;
  j["correct_choice"] = r.item.correct_choice;
  j["query_image_ref"] = r.item.query_image_ref;
  j["normal_image_ref"] = r.item.normal_image_ref;
  j["gt_patches"] = r.item.gt_patches;
  j["pseudo_rationale"] = r.pseudo_rationale;
  j["seed"] = r.seed;
  return j.dump();
}

namespace {

template <typename Fn>
void for_each_json_line(std::istream& in, const char* what, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw InputFormatError(std::string(what) + " line " + std::to_string(lineno) + ": " + e.what());
    } catch (const InputFormatError& e) {
      throw InputFormatError(std::string(what) + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::string str(const json& j, const char* key, bool required = true) {
  if (!j.contains(key) || j[key].is_null()) {
    if (required) throw InputFormatError(std::string("missing field '") + key + "'");
    return {};
  }
  return j[key].get<std::string>();
}

}  // namespace

std::vector<Stage1Input> read_stage1_inputs(std::istream& in) {
  std::vector<Stage1Input> out;
  for_each_json_line(in, "samples", [&](const json& j) {
    out.push_back({str(j, "query_image"), str(j, "mask"), str(j, "category"), str(j, "defect_type")});
  });
  return out;
}

NormalPool read_normal_pool(std::istream& in) {
  NormalPool pool;
  for_each_json_line(in, "normals", [&](const json& j) { pool.add(str(j, "category"), str(j, "image")); });
  return pool;
}

std::vector<DomainSnippet> read_snippets(std::istream& in) {
  std::vector<DomainSnippet> out;
  for_each_json_line(in, "snippets", [&](const json& j) {
    out.push_back({str(j, "category"), str(j, "defect_type"), str(j, "body")});
  });
  return out;
}

Catalog read_catalog(std::istream& in) {
  Catalog catalog;
  for_each_json_line(in, "catalog", [&](const json& j) {
    CatalogItem it;
    it.item_id = str(j, "item_id");
    it.category = str(j, "category");
    it.question = str(j, "question");
    if (j.contains("options")) it.options = j["options"].get<std::vector<std::string>>();
    it.correct_choice = str(j, "correct_choice");
    it.query_image_ref = str(j, "query_image", false);
    it.normal_image_ref = str(j, "normal_image", false);
    it.gt_patches = str(j, "gt_patches", false);
    it.juxtaposed_reasoning = str(j, "juxtaposed_reasoning", false);
    it.domain_knowledge = str(j, "domain_knowledge", false);
    catalog[it.category].push_back(std::move(it));
  });
  return catalog;
}

}  // namespace inspectrl
