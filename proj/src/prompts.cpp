#include "inspectrl/prompts.hpp"

namespace inspectrl {
namespace {

constexpr std::string_view kQaGeneration = R"(Generate unique QA pairs grounded in the snippet with enforced categories.

You are tasked with generating high-quality Q&A pairs grounded strictly in the given snippet.
Rules:
- DO NOT mention "snippet" or "according to the snippet".
- All answers must be strictly grounded in the text, no outside knowledge.
- Produce exactly {count} unique question–answer pairs.
- Use a variety of question styles, including:
  1. Criteria-based (e.g., "What criteria indicate a defect in ...?")
  2. Defect understanding (e.g., "How does this affect…?")
  3. Comparative reasoning (e.g., "What distinguishes X from Y?")
  4. Functional impact (e.g., "Why does this defect matter?")
  5. Recognition (e.g., "What is…?")
  6. Quality control reasoning (e.g., "Why is it important to detect…?")
  7. Aesthetic/structural concerns
- Ensure balance: include multiple styles, not just one.
- Keep answers factual and strictly tied to the snippet.

Return as a JSON array: [
  {"question": "...", "answer": "..."}]

Snippet:{snippet})";

constexpr std::string_view kComparative =
    R"(You are an industrial visual inspection expert. You receive a query image of an object with a defect, a defect-free template image of the same object category, the defect type, and the grid cells (row, col on a 16x16 grid) that cover the defect. Write a concise comparative explanation of how the query differs from the template, focusing on the appearance of the defective region. Reply with the explanation text only.)";

constexpr std::string_view kParaphrase =
    R"(Rewrite the question-answer pair below {count} times. Every rewrite must keep the meaning and the facts unchanged while using clearly different wording. Return a JSON array of exactly {count} objects, each with the keys "question" and "answer", and nothing else.)";

constexpr std::string_view kPseudoRationale =
    R"(You are an industrial visual inspection expert. You receive a multiple-choice inspection question, its correct answer, the query and normal reference images, a comparative explanation of the query against the reference, and domain notes for the object category. Write the step-by-step reasoning an inspector would follow to reach the correct answer, using only the evidence provided. State the chosen option at the end. Reply with the reasoning text only.)";

}  // namespace

std::string substitute(std::string_view text, std::string_view name, std::string_view value) {
  const std::string slot = "{" + std::string(name) + "}";
  std::string out;
  std::size_t pos = 0;
  for (auto hit = text.find(slot); hit != std::string_view::npos; hit = text.find(slot, pos)) {
    out.append(text.substr(pos, hit - pos));
    out.append(value);
    pos = hit + slot.size();
  }
  out.append(text.substr(pos));
  return out;
}

std::string_view qa_generation_template() { return kQaGeneration; }

std::string render_qa_generation_prompt(int count, std::string_view snippet) {
  return substitute(substitute(kQaGeneration, "count", std::to_string(count)), "snippet", snippet);
}

std::string_view comparative_explanation_prompt() { return kComparative; }

std::string render_paraphrase_prompt(int variants) { return substitute(kParaphrase, "count", std::to_string(variants)); }

std::string_view pseudo_rationale_prompt() { return kPseudoRationale; }

}  // namespace inspectrl
