#include "inspectrl/generation.hpp"

#include <array>
#include <thread>

#include <json.hpp>

#include "inspectrl/errors.hpp"

namespace inspectrl {

using nlohmann::json;

HttpGenerationProvider::HttpGenerationProvider(HttpGenerationConfig config)
    : config_(std::move(config)), endpoint_(HttpEndpoint::parse(config_.endpoint)) {}

std::string HttpGenerationProvider::generate(std::string_view system, std::string_view user) const {
  const std::string body = json{{"system", system}, {"user", user}, {"max_tokens", config_.max_tokens}}.dump();
  auto backoff = config_.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      const HttpReply reply = http_post_json(endpoint_, "/generate", body, config_.timeout, config_.bearer_token);
      if (reply.status < 200 || reply.status >= 300) {
        throw ProviderError(ProviderError::Kind::HttpStatus,
                            "generation service returned HTTP " + std::to_string(reply.status), reply.body,
                            reply.status);
      }
      json doc;
      try {
        doc = json::parse(reply.body);
      } catch (const json::exception& e) {
        throw ProviderError(ProviderError::Kind::MalformedPayload,
                            std::string("generation reply is not JSON: ") + e.what(), reply.body);
      }
      if (!doc.is_object() || !doc.contains("text") || !doc["text"].is_string()) {
        throw ProviderError(ProviderError::Kind::MalformedPayload, "generation reply lacks a 'text' string", reply.body);
      }
      return doc["text"].get<std::string>();
    } catch (const ProviderError& e) {
      const bool transient = e.kind() == ProviderError::Kind::Connection || e.kind() == ProviderError::Kind::Timeout ||
                             (e.kind() == ProviderError::Kind::HttpStatus &&
                              (e.http_status() == 429 || e.http_status() >= 500));
      if (!transient || attempt >= config_.max_retries) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

namespace {

std::vector<std::string> sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    cur += ch;
    if (ch == '.' || ch == '!' || ch == '?') {
      const auto b = cur.find_first_not_of(" \n\t");
      if (b != std::string::npos) out.push_back(cur.substr(b));
      cur.clear();
    }
  }
  const auto b = cur.find_first_not_of(" \n\t");
  if (b != std::string::npos) out.push_back(cur.substr(b));
  return out;
}

std::string field(const json& j, const char* key) {
  return j.contains(key) && j[key].is_string() ? j[key].get<std::string>() : std::string();
}

}  // namespace

std::string OfflineGenerationProvider::generate(std::string_view, std::string_view user) const {
  json req;
  try {
    req = json::parse(user);
  } catch (const json::exception&) {
    throw ProviderError(ProviderError::Kind::MalformedPayload, "offline provider needs a JSON request payload",
                        std::string(user));
  }
  const std::string task = field(req, "task");
  const std::string category = field(req, "category");
  const std::string defect = field(req, "defect_type");

  if (task == "comparative_explanation") {
    const std::string cells = field(req, "anomalous_patches");
    return "Compared with the normal " + category + " template, the query shows a " + defect + " defect" +
           (cells.empty() ? std::string(" with no marked cells.") : " covering cells " + cells + ".");
  }
  if (task == "qa_generation") {
    static constexpr std::array<const char*, 7> kStyles{
        "What criteria indicate", "How does it affect the part when there is", "What distinguishes",
        "Why does it matter to find", "What is known about", "Why is it important to detect",
        "What structural or aesthetic concern comes with"};
    const int count = req.value("count", 0);
    auto facts = sentences(field(req, "snippet"));
    if (facts.empty()) facts.push_back(field(req, "snippet"));
    json arr = json::array();
    for (int i = 0; i < count; ++i) {
      const std::string q = std::string(kStyles[static_cast<std::size_t>(i) % kStyles.size()]) + " a " + defect + " on a " +
                            category + " (point " + std::to_string(i + 1) + ")?";
      arr.push_back({{"question", q}, {"answer", facts[static_cast<std::size_t>(i) % facts.size()]}});
    }
    return arr.dump();
  }
  if (task == "paraphrase") {
    static constexpr std::array<const char*, 4> kLeads{"Put differently: ", "In other words: ", "Rephrased: ",
                                                       "Stated another way: "};
    const int variants = req.value("variants", 0);
    json arr = json::array();
    for (int i = 0; i < variants; ++i) {
      const std::string lead = std::string(kLeads[static_cast<std::size_t>(i) % kLeads.size()]) +
                               (i >= static_cast<int>(kLeads.size()) ? "(" + std::to_string(i) + ") " : "");
      arr.push_back({{"question", lead + field(req, "question")}, {"answer", field(req, "answer")}});
    }
    return arr.dump();
  }
  if (task == "pseudo_rationale") {
    std::string out = "Comparing the query " + category + " with the normal reference: " +
                      field(req, "juxtaposed_reasoning");
    const auto notes = sentences(field(req, "domain_knowledge"));
    if (!notes.empty()) out += " Domain notes: " + notes.front();
    out += " Therefore the answer is " + field(req, "correct_choice") + ".";
    return out;
  }
  throw ProviderError(ProviderError::Kind::MalformedPayload, "offline provider does not handle task '" + task + "'",
                      std::string(user));
}

}  // namespace inspectrl
