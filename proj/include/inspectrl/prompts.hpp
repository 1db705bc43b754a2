#pragma once

#include <string>
#include <string_view>

namespace inspectrl {

// QA-generation system prompt with {count} and {snippet} slots.
std::string_view qa_generation_template();
std::string render_qa_generation_prompt(int count, std::string_view snippet);

std::string_view comparative_explanation_prompt();
std::string render_paraphrase_prompt(int variants);
std::string_view pseudo_rationale_prompt();

// Replaces every "{name}" with value.
std::string substitute(std::string_view text, std::string_view name, std::string_view value);

}  // namespace inspectrl
