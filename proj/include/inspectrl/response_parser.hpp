#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace inspectrl {

struct ParsedResponse {
  std::optional<std::string> seg_text;
  std::optional<std::string> think_text;
  std::optional<std::string> answer_text;
  // All three pairs present exactly once, not nested, in seg -> think -> answer order.
  bool format_valid = false;
  // Opening tags appear in seg -> think -> answer order.
  bool tag_order_valid = false;

  bool operator==(const ParsedResponse&) const = default;
};

/// Splits a model response into its <seg>, <think> and <answer> segments.
/// Tags are lowercase, attribute-free and case-sensitive. Never throws:
/// malformed structure only clears the validity flags.
ParsedResponse parse_response(std::string_view raw);

// Writes the canonical "<seg>..</seg><think>..</think><answer>..</answer>" form.
std::string serialize_response(const ParsedResponse& parsed);

/// Option letters accepted for a question, uppercase ("ABCD" by default).
class OptionAlphabet {
 public:
  OptionAlphabet() : OptionAlphabet("ABCD") {}
  // Throws ContractError on anything other than distinct letters A-Z.
  explicit OptionAlphabet(std::string_view letters);

  static OptionAlphabet first_n(int n);

  bool contains(char upper) const noexcept { return upper >= 'A' && upper <= 'Z' && (mask_ >> (upper - 'A')) & 1U; }
  const std::string& letters() const noexcept { return letters_; }

 private:
  std::string letters_;
  unsigned mask_ = 0;
};

struct ChoiceMention {
  char letter;
  std::size_t offset;  // byte offset into the searched text
  bool operator==(const ChoiceMention&) const = default;
};

// A standalone token is a maximal run of alphanumerics (bytes >= 0x80 count
// as word characters) of length one; "(b)" therefore qualifies.

/// The single option letter named in an answer, compared case-insensitively.
/// Returns nullopt when zero or two distinct letters qualify.
std::optional<char> extract_choice(std::string_view answer_text, const OptionAlphabet& alphabet = {});

/// Every uppercase standalone option letter in reasoning text, in order.
std::vector<ChoiceMention> find_choice_mentions(std::string_view think_text, const OptionAlphabet& alphabet = {});

}  // namespace inspectrl
