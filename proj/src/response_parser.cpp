#include "inspectrl/response_parser.hpp"

#include <array>
#include <cctype>

#include "inspectrl/errors.hpp"

namespace inspectrl {
namespace {

struct TagSpan {
  std::size_t open = std::string_view::npos;   // position of "<tag>"
  std::size_t close = std::string_view::npos;  // position of "</tag>"
  std::size_t content_begin = 0;
  bool unique = false;
  bool present() const { return close != std::string_view::npos; }
};

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

TagSpan locate(std::string_view raw, std::string_view name) {
  const std::string open = "<" + std::string(name) + ">";
  const std::string close = "</" + std::string(name) + ">";
  TagSpan span;
  span.unique = count_occurrences(raw, open) == 1 && count_occurrences(raw, close) == 1;
  const auto o = raw.find(open);
  if (o == std::string_view::npos) return span;
  const auto c = raw.find(close, o + open.size());
  if (c == std::string_view::npos) return span;
  span.open = o;
  span.close = c;
  span.content_begin = o + open.size();
  return span;
}

bool is_word_byte(unsigned char ch) { return std::isalnum(ch) || ch >= 0x80; }

// Calls fn(letter, offset) for each length-one alphanumeric run.
template <typename Fn>
void for_each_single_char_token(std::string_view text, Fn&& fn) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
    if (j - i == 1) fn(text[i], i);
    i = j;
  }
}

}  // namespace

ParsedResponse parse_response(std::string_view raw) {
  constexpr std::array<std::string_view, 3> kNames{"seg", "think", "answer"};
  std::array<TagSpan, 3> spans;
  for (std::size_t k = 0; k < 3; ++k) spans[k] = locate(raw, kNames[k]);

  ParsedResponse out;
  auto content = [&](const TagSpan& s) -> std::optional<std::string> {
    if (!s.present()) return std::nullopt;
    return std::string(raw.substr(s.content_begin, s.close - s.content_begin));
  };
  out.seg_text = content(spans[0]);
  out.think_text = content(spans[1]);
  out.answer_text = content(spans[2]);

  const bool all_present = spans[0].present() && spans[1].present() && spans[2].present();
  out.tag_order_valid = all_present && spans[0].open < spans[1].open && spans[1].open < spans[2].open;

  // Disjoint ordered pairs rule out nesting.
  const bool disjoint = out.tag_order_valid && spans[0].close < spans[1].open && spans[1].close < spans[2].open;
  out.format_valid = disjoint && spans[0].unique && spans[1].unique && spans[2].unique;
  return out;
}

std::string serialize_response(const ParsedResponse& parsed) {
  std::string out;
  if (parsed.seg_text) out += "<seg>" + *parsed.seg_text + "</seg>";
  if (parsed.think_text) out += "<think>" + *parsed.think_text + "</think>";
  if (parsed.answer_text) out += "<answer>" + *parsed.answer_text + "</answer>";
  return out;
}

OptionAlphabet::OptionAlphabet(std::string_view letters) {
  for (char ch : letters) {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (up < 'A' || up > 'Z') throw ContractError("option alphabet may only hold letters A-Z");
    const unsigned bit = 1U << (up - 'A');
    if (mask_ & bit) throw ContractError(std::string("duplicate option letter ") + up);
    mask_ |= bit;
    letters_ += up;
  }
  if (letters_.empty()) throw ContractError("option alphabet is empty");
}

OptionAlphabet OptionAlphabet::first_n(int n) {
  if (n < 1 || n > 26) throw ContractError("option count must be in [1,26]");
  std::string letters;
  for (int i = 0; i < n; ++i) letters += static_cast<char>('A' + i);
  return OptionAlphabet(letters);
}

std::optional<char> extract_choice(std::string_view answer_text, const OptionAlphabet& alphabet) {
  std::optional<char> found;
  bool ambiguous = false;
  for_each_single_char_token(answer_text, [&](char ch, std::size_t) {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (!alphabet.contains(up)) return;
    if (found && *found != up) ambiguous = true;
    found = up;
  });
  if (ambiguous) return std::nullopt;
  return found;
}

std::vector<ChoiceMention> find_choice_mentions(std::string_view think_text, const OptionAlphabet& alphabet) {
  std::vector<ChoiceMention> out;
  for_each_single_char_token(think_text, [&](char ch, std::size_t offset) {
    if (alphabet.contains(ch)) out.push_back({ch, offset});
  });
  return out;
}

}  // namespace inspectrl
