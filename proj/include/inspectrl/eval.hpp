#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inspectrl/errors.hpp"

namespace inspectrl {

enum class Subtask {
  AnomalyDiscrimination,
  DefectClassification,
  DefectLocalization,
  DefectDescription,
  DefectAnalysis,
  ObjectClassification,
  ObjectAnalysis,
};

inline constexpr std::size_t kSubtaskCount = 7;
inline constexpr std::array<Subtask, kSubtaskCount> kAllSubtasks{
    Subtask::AnomalyDiscrimination, Subtask::DefectClassification, Subtask::DefectLocalization,
    Subtask::DefectDescription,     Subtask::DefectAnalysis,       Subtask::ObjectClassification,
    Subtask::ObjectAnalysis};

// snake_case key used in JSONL files, e.g. "defect_localization".
std::string_view subtask_key(Subtask s);
// Report column header, e.g. "Localization".
std::string_view subtask_column(Subtask s);
// Accepts the snake_case key or the CamelCase enumerator name.
Subtask parse_subtask(std::string_view text);

enum class Polarity { Normal, Abnormal };
Polarity parse_polarity(std::string_view text);

struct EvalItem {
  std::string item_id;
  Subtask subtask = Subtask::AnomalyDiscrimination;
  std::optional<Polarity> polarity;
  std::optional<char> predicted;  // nullopt when the prediction could not be parsed
  char correct = 'A';

  bool is_correct() const { return predicted && *predicted == correct; }
};

/// Percentage of items accepted by `filter` whose prediction is correct;
/// missing predictions count as wrong. Throws ContractError when the filter
/// selects nothing.
template <typename Filter>
double accuracy(std::span<const EvalItem> items, Filter&& filter) {
  std::size_t total = 0, correct = 0;
  for (const auto& item : items) {
    if (!filter(item)) continue;
    ++total;
    correct += item.is_correct() ? 1 : 0;
  }
  if (total == 0) throw ContractError("accuracy over an empty selection");
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

inline double accuracy(std::span<const EvalItem> items) {
  return accuracy(items, [](const EvalItem&) { return true; });
}

struct SubtaskReport {
  std::array<double, kSubtaskCount> accuracy{};  // percent, full precision, indexed like kAllSubtasks
  std::array<std::size_t, kSubtaskCount> item_count{};
  double average = 0.0;  // unweighted mean of the seven subtask accuracies

  double at(Subtask s) const { return accuracy[static_cast<std::size_t>(s)]; }
};

/// Per-subtask accuracies plus their unweighted mean. Anomaly discrimination
/// is the mean of the normal-pool and abnormal-pool accuracies rather than
/// the pooled accuracy. Throws ContractError when a subtask or a polarity
/// pool is empty, or a discrimination item lacks polarity.
SubtaskReport build_report(std::span<const EvalItem> items);

// Report from already-computed subtask accuracies (e.g. a published table row).
SubtaskReport report_from_accuracies(const std::array<double, kSubtaskCount>& accuracies);

// Round-half-up to two decimals, e.g. 81.197... -> "81.20".
std::string format_percent(double value);

enum class TableFormat { Markdown, Csv, Json };
TableFormat parse_table_format(std::string_view text);

/// Columns: Discrimination, Classification, Localization, Description,
/// Analysis, Obj-Classification, Obj-Analysis, Average.
std::string render_table(const SubtaskReport& report, TableFormat format);

/// Reads {"item_id", "subtask", "polarity"?, "predicted", "correct"} lines.
/// "predicted" may be null, a letter, or free text run through
/// extract_choice (alphabet from an optional "alphabet" field, default ABCD).
std::vector<EvalItem> read_eval_items(std::istream& in);

}  // namespace inspectrl
