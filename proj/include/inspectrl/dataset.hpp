#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "inspectrl/errors.hpp"
#include "inspectrl/generation.hpp"
#include "inspectrl/grid_codec.hpp"

namespace inspectrl {

// Provider output fell short of a requested count after validation.
class ShortfallError : public ContractError {
 public:
  ShortfallError(const std::string& what, std::size_t expected, std::size_t actual)
      : ContractError(what + ": expected " + std::to_string(expected) + ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}
  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Defect-free template images per object category. Draws are keyed by
/// (seed, category, index) so they replay identically in any order.
class NormalPool {
 public:
  void add(const std::string& category, std::string image_ref) { images_[category].push_back(std::move(image_ref)); }
  bool has(const std::string& category) const;
  // Throws ContractError when the category has no normal images.
  const std::string& choose(const std::string& category, std::uint64_t seed, std::uint64_t index) const;

 private:
  std::map<std::string, std::vector<std::string>> images_;
};

// ---- Stage 1: juxtaposed segmentation records -------------------------------

inline constexpr std::string_view kDefectFreeType = "good";

struct Stage1Record {
  std::string query_image_ref;
  std::string normal_image_ref;
  std::string category;
  std::string defect_type;
  std::string seg_text;
  std::string think_text;
  std::uint64_t seed = 0;
};

struct Stage1Result {
  Stage1Record record;
  std::vector<std::string> warnings;
};

/// Rasterizes the mask on a 16x16 grid, encodes it as seg text and asks the
/// provider for the comparative explanation. An empty rasterization on a
/// defect sample is reported as a warning; provider failures propagate.
Stage1Result build_stage1_record(const MaskImage& mask, std::string query_ref, std::string normal_ref,
                                 std::string category, std::string defect_type, const GenerationProvider& provider,
                                 std::uint64_t seed = 0);

// ---- Stage 2: domain QA ------------------------------------------------------

struct DomainSnippet {
  std::string category;
  std::string defect_type;
  std::string body;
};

enum class QAOrigin { Generated, Paraphrase1, Paraphrase2 };
std::string_view origin_name(QAOrigin o);

struct QARecord {
  std::string qa_id;
  std::string category;
  std::string defect_type;
  std::string question;
  std::string answer;
  QAOrigin origin = QAOrigin::Generated;
  std::optional<std::string> source_qa_id;
  std::string normal_image_ref;
  std::uint64_t seed = 0;
};

struct Stage2Options {
  int count = 30;
  int paraphrases_per = 2;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

struct Stage2Result {
  std::vector<QARecord> records;  // generated pairs first, then paraphrases in source order
  std::vector<std::string> warnings;
};

/// Generates `count` unique QA pairs from a snippet, then `paraphrases_per`
/// paraphrases of each, for count * (1 + paraphrases_per) records. Exact
/// duplicate questions are dropped with a warning; fewer than requested
/// raises ShortfallError and unparseable replies raise ProviderError
/// (MalformedPayload) carrying the raw text.
Stage2Result build_stage2_qa(const DomainSnippet& snippet, const GenerationProvider& provider, const NormalPool& normals,
                             const Stage2Options& options = {});

// ---- Stage 3: one-shot sampling with pseudo rationales -----------------------

struct CatalogItem {
  std::string item_id;
  std::string category;
  std::string question;
  std::vector<std::string> options;
  std::string correct_choice;
  std::string query_image_ref;
  std::string normal_image_ref;
  std::string gt_patches;  // seg text
  std::string juxtaposed_reasoning;
  std::string domain_knowledge;
};

using Catalog = std::map<std::string, std::vector<CatalogItem>>;

struct Stage3Record {
  CatalogItem item;
  std::string pseudo_rationale;
  std::uint64_t seed = 0;
};

// Index of the chosen item per category, by seeded uniform draw.
std::map<std::string, std::size_t> select_one_per_category(const Catalog& catalog, std::uint64_t seed);

/// Exactly one record per category, ordered by category name, each with a
/// provider-generated pseudo rationale. Throws ContractError on an empty
/// category.
std::vector<Stage3Record> sample_stage3(const Catalog& catalog, std::uint64_t seed, const GenerationProvider& provider,
                                        std::size_t jobs = 1);

// ---- JSONL I/O ---------------------------------------------------------------
// Writers emit one object per line with snake_case keys in a fixed order.

std::string to_json_line(const Stage1Record& r);
std::string to_json_line(const QARecord& r);
std::string to_json_line(const Stage3Record& r);

struct Stage1Input {
  std::string query_image_ref;
  std::string mask_path;
  std::string category;
  std::string defect_type;
};

std::vector<Stage1Input> read_stage1_inputs(std::istream& in);
NormalPool read_normal_pool(std::istream& in);
std::vector<DomainSnippet> read_snippets(std::istream& in);
Catalog read_catalog(std::istream& in);

}  // namespace inspectrl
