#pragma once

#include <atomic>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "inspectrl/generation.hpp"
#include "inspectrl/grid_codec.hpp"
#include "inspectrl/rng.hpp"

namespace testing {

// Dispatches on the "task" field of the user payload.
class ScriptedProvider final : public inspectrl::GenerationProvider {
 public:
  using Handler = std::function<std::string(const nlohmann::json& request)>;
  explicit ScriptedProvider(Handler h) : handler_(std::move(h)) {}
  std::string generate(std::string_view, std::string_view user) const override {
    ++calls_;
    return handler_(nlohmann::json::parse(user));
  }
  std::string describe() const override { return "scripted"; }
  int calls() const { return calls_.load(); }

 private:
  Handler handler_;
  mutable std::atomic<int> calls_{0};
};

inline std::string qa_array(int n, std::string_view prefix = "Q") {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    arr.push_back({{"question", std::string(prefix) + std::to_string(i)}, {"answer", "A" + std::to_string(i)}});
  }
  return arr.dump();
}

// Answers qa_generation with `n` pairs and paraphrase with the requested variant count.
inline ScriptedProvider compliant_provider(int n = 30) {
  return ScriptedProvider([n](const nlohmann::json& req) -> std::string {
    const std::string task = req.at("task");
    if (task == "qa_generation") return qa_array(n);
    if (task == "paraphrase") {
      nlohmann::json arr = nlohmann::json::array();
      for (int k = 0; k < req.at("variants").get<int>(); ++k) {
        arr.push_back({{"question", "P" + std::to_string(k) + ":" + req.at("question").get<std::string>()},
                       {"answer", req.at("answer")}});
      }
      return arr.dump();
    }
    if (task == "pseudo_rationale") return "rationale for " + req.at("question").get<std::string>();
    return "DESC";
  });
}

inline inspectrl::PatchSet random_patches(inspectrl::Rng& rng, inspectrl::GridSpec grid, double density) {
  inspectrl::PatchSet p(grid);
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c)
      if (rng.uniform01() < density) p.insert({r, c});
  return p;
}

inline std::string fixture(std::string_view name) { return std::string(INSPECTRL_FIXTURES) + "/" + std::string(name); }

}  // namespace testing
