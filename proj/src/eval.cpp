#include "inspectrl/eval.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>

#include <json.hpp>

#include "inspectrl/response_parser.hpp"

namespace inspectrl {
namespace {

struct SubtaskNames {
  Subtask subtask;
  std::string_view key;
  std::string_view camel;
  std::string_view column;
};

constexpr std::array<SubtaskNames, kSubtaskCount> kNames{{
    {Subtask::AnomalyDiscrimination, "anomaly_discrimination", "AnomalyDiscrimination", "Discrimination"},
    {Subtask::DefectClassification, "defect_classification", "DefectClassification", "Classification"},
    {Subtask::DefectLocalization, "defect_localization", "DefectLocalization", "Localization"},
    {Subtask::DefectDescription, "defect_description", "DefectDescription", "Description"},
    {Subtask::DefectAnalysis, "defect_analysis", "DefectAnalysis", "Analysis"},
    {Subtask::ObjectClassification, "object_classification", "ObjectClassification", "Obj-Classification"},
    {Subtask::ObjectAnalysis, "object_analysis", "ObjectAnalysis", "Obj-Analysis"},
}};

}  // namespace

std::string_view subtask_key(Subtask s) { return kNames[static_cast<std::size_t>(s)].key; }
std::string_view subtask_column(Subtask s) { return kNames[static_cast<std::size_t>(s)].column; }

Subtask parse_subtask(std::string_view text) {
  for (const auto& n : kNames)
    if (text == n.key || text == n.camel) return n.subtask;
  throw InputFormatError("unknown subtask '" + std::string(text) + "'");
}

Polarity parse_polarity(std::string_view text) {
  if (text == "normal") return Polarity::Normal;
  if (text == "abnormal") return Polarity::Abnormal;
  throw InputFormatError("polarity must be 'normal' or 'abnormal', got '" + std::string(text) + "'");
}

SubtaskReport build_report(std::span<const EvalItem> items) {
  SubtaskReport report;
  for (const auto& item : items) {
    if (item.subtask == Subtask::AnomalyDiscrimination && !item.polarity) {
      throw ContractError("discrimination item " + item.item_id + " has no polarity");
    }
    ++report.item_count[static_cast<std::size_t>(item.subtask)];
  }
  for (Subtask s : kAllSubtasks) {
    const auto idx = static_cast<std::size_t>(s);
    if (report.item_count[idx] == 0) throw ContractError("no items for subtask " + std::string(subtask_key(s)));
    if (s == Subtask::AnomalyDiscrimination) {
      auto pool = [](Polarity p) {
        return [p](const EvalItem& it) { return it.subtask == Subtask::AnomalyDiscrimination && it.polarity == p; };
      };
      try {
        report.accuracy[idx] = 0.5 * (accuracy(items, pool(Polarity::Normal)) + accuracy(items, pool(Polarity::Abnormal)));
      } catch (const ContractError&) {
        throw ContractError("anomaly discrimination needs both normal and abnormal items");
      }
    } else {
      report.accuracy[idx] = accuracy(items, [s](const EvalItem& it) { return it.subtask == s; });
    }
  }
  report.average = std::accumulate(report.accuracy.begin(), report.accuracy.end(), 0.0) / kSubtaskCount;
  return report;
}

SubtaskReport report_from_accuracies(const std::array<double, kSubtaskCount>& accuracies) {
  SubtaskReport report;
  report.accuracy = accuracies;
  for (double a : accuracies) {
    if (!(a >= 0.0 && a <= 100.0)) throw ContractError("accuracy outside [0, 100]");
  }
  report.average = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / kSubtaskCount;
  return report;
}

std::string format_percent(double value) {
  // Decimal halves round up even when their binary value sits just below.
  const double hundredths = std::floor(value * 100.0 + 0.5 + 1e-9);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", hundredths / 100.0);
  return buf;
}

TableFormat parse_table_format(std::string_view text) {
  if (text == "markdown" || text == "md") return TableFormat::Markdown;
  if (text == "csv") return TableFormat::Csv;
  if (text == "json") return TableFormat::Json;
  throw InputFormatError("format must be markdown, csv or json");
}

std::string render_table(const SubtaskReport& report, TableFormat format) {
  std::vector<std::string> headers, values;
  for (Subtask s : kAllSubtasks) {
    headers.emplace_back(subtask_column(s));
    values.push_back(format_percent(report.at(s)));
  }
  headers.emplace_back("Average");
  values.push_back(format_percent(report.average));

  std::string out;
  switch (format) {
    case TableFormat::Markdown: {
      auto row = [&](const std::vector<std::string>& cells) {
        out += "|";
        for (const auto& c : cells) out += " " + c + " |";
        out += "\n";
      };
      row(headers);
      out += "|";
      for (std::size_t i = 0; i < headers.size(); ++i) out += "---:|";
      out += "\n";
      row(values);
      break;
    }
    case TableFormat::Csv: {
      for (std::size_t i = 0; i < headers.size(); ++i) out += (i ? "," : "") + headers[i];
      out += "\n";
      for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + values[i];
      out += "\n";
      break;
    }
    case TableFormat::Json: {
      // Numbers carry exactly their two rendered decimals.
      out += "{\"subtasks\": {";
      for (std::size_t i = 0; i < kSubtaskCount; ++i) {
        out += (i ? ", \"" : "\"") + std::string(subtask_key(kAllSubtasks[i])) + "\": " + values[i];
      }
      out += "}, \"columns\": [";
      for (std::size_t i = 0; i < headers.size(); ++i) out += (i ? ", \"" : "\"") + headers[i] + "\"";
      out += "], \"average\": " + values.back() + "}\n";
      break;
    }
  }
  return out;
}

std::vector<EvalItem> read_eval_items(std::istream& in) {
  using nlohmann::json;
  std::vector<EvalItem> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "predictions line " + std::to_string(lineno) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw InputFormatError(where + e.what());
    }
    try {
      EvalItem item;
      item.item_id = j.contains("item_id") ? (j["item_id"].is_string() ? j["item_id"].get<std::string>() : j["item_id"].dump())
                                           : std::to_string(lineno);
      item.subtask = parse_subtask(j.at("subtask").get<std::string>());
      if (j.contains("polarity") && !j["polarity"].is_null()) item.polarity = parse_polarity(j["polarity"].get<std::string>());
      const OptionAlphabet alphabet(j.value("alphabet", std::string("ABCD")));
      const auto correct = extract_choice(j.at("correct").get<std::string>(), alphabet);
      if (!correct) throw InputFormatError("'correct' is not a single option letter");
      item.correct = *correct;
      if (j.contains("predicted") && j["predicted"].is_string()) {
        item.predicted = extract_choice(j["predicted"].get<std::string>(), alphabet);
      }
      items.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw InputFormatError(where + e.what());
    } catch (const InputFormatError& e) {
      throw InputFormatError(where + e.what());
    } catch (const ContractError& e) {
      throw InputFormatError(where + e.what());
    }
  }
  return items;
}

}  // namespace inspectrl
