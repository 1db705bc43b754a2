#include "inspectrl/kv_config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

namespace inspectrl {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> parse_kv(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InputFormatError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw InputFormatError("config line " + std::to_string(lineno) + ": empty key");
    for (char& ch : key)
      if (ch == '-') ch = '_';
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out[key] = value;
  }
  return out;
}

RewardWeights apply_weight_overrides(RewardWeights w, const std::map<std::string, std::string>& kv) {
  const std::map<std::string, double RewardWeights::*> fields{{"lambda_domain", &RewardWeights::lambda_domain},
                                                              {"lambda", &RewardWeights::lambda_domain},
                                                              {"w_choice", &RewardWeights::w_choice},
                                                              {"w_format", &RewardWeights::w_format},
                                                              {"w_seg", &RewardWeights::w_seg},
                                                              {"w_struct_bonus", &RewardWeights::w_struct_bonus},
                                                              {"w_struct_penalty", &RewardWeights::w_struct_penalty}};
  for (const auto& [key, value] : kv) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw InputFormatError("unknown reward weight '" + key + "'");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
      throw InputFormatError("reward weight '" + key + "' is not a number: " + value);
    }
    w.*(it->second) = v;
  }
  w.validate();
  return w;
}

RewardWeights load_weights(const std::filesystem::path& path, RewardWeights base) {
  std::ifstream f(path);
  if (!f) throw InputFormatError("cannot open weights file " + path.string());
  return apply_weight_overrides(base, parse_kv(f));
}

}  // namespace inspectrl
