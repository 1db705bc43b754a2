// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cli.hpp"
#include "inspectrl/dataset.hpp"
#include "inspectrl/eval.hpp"
#include "inspectrl/grpo.hpp"
#include "inspectrl/io.hpp"
#include "inspectrl/reward.hpp"
#include "inspectrl/rng.hpp"

using namespace inspectrl;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Verdict ac1_segmentation_oracle() {
  const auto t0 = Clock::now();
  const GridSpec grid{3, 3};
  std::vector<PatchSet> sets;
  for (unsigned bits = 0; bits < 512; ++bits) {
    PatchSet p(grid);
    for (int k = 0; k < 9; ++k)
      if (bits >> k & 1U) p.insert({k / 3, k % 3});
    sets.push_back(std::move(p));
  }
  double worst = 0.0;
  std::size_t pairs = 0;
  for (unsigned a = 0; a < 512; ++a) {
    for (unsigned b = 0; b < 512; ++b) {
      const int np = std::popcount(a), ng = std::popcount(b), ni = std::popcount(a & b);
      double expected;
      if (np == 0 && ng == 0) {
        expected = 1.0;
      } else if (np == 0 || ng == 0) {
        expected = 0.0;
      } else {
        expected = 0.2 + 0.8 * (2.0 * ni / (np + ng));
      }
      worst = std::max(worst, std::abs(segmentation_reward(sets[a], sets[b]) - expected));
      ++pairs;
    }
  }
  const double secs = seconds_since(t0);
  return {pairs == 262144 && worst == 0.0 && secs < 30.0,
          std::to_string(pairs) + " pairs, max deviation " + fmt("%g", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Verdict ac2_codec_round_trip() {
  Rng rng(2);
  std::size_t failures = 0;
  std::vector<std::string> canonical;
  for (int i = 0; i < 10000; ++i) {
    PatchSet p;
    const double density = rng.uniform01();
    for (int r = 0; r < 16; ++r)
      for (int c = 0; c < 16; ++c)
        if (rng.uniform01() < density) p.insert({r, c});
    const std::string text = encode_patches(p);
    if (!(parse_seg_text(text) == p)) ++failures;
    canonical.push_back(text);
  }
  // a second, independent draw of canonical strings
  Rng rng2(3);
  for (int i = 0; i < 10000; ++i) {
    PatchSet p;
    for (int k = 0, n = static_cast<int>(rng2.index(40)); k < n; ++k)
      p.insert({static_cast<int>(rng2.index(16)), static_cast<int>(rng2.index(16))});
    canonical[static_cast<std::size_t>(i)] = encode_patches(p);
  }
  for (const auto& text : canonical)
    if (encode_patches(parse_seg_text(text)) != text) ++failures;
  return {failures == 0, "20000 round trips, " + std::to_string(failures) + " failures"};
}

Verdict ac3_table_identities() {
  using Row = std::array<double, kSubtaskCount>;
  struct Case {
    Row row;
    const char* expected;
  };
  const std::array<Case, 3> cases{{{{65.04, 74.74, 73.01, 84.56, 89.41, 94.04, 87.58}, "81.20"},
                                   {{71.39, 54.35, 61.17, 65.81, 79.32, 91.44, 84.43}, "72.56"},
                                   {{50, 25, 25, 25, 25, 25, 25}, "28.57"}}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const double avg = report_from_accuracies(c.row).average;
    const std::string shown = format_percent(avg);
    ok = ok && shown == c.expected && std::abs(avg - std::stod(c.expected)) <= 0.005;
    detail += (detail.empty() ? "" : ", ") + shown;
  }
  return {ok, detail};
}

Verdict ac4_chance_level() {
  Rng rng(4);
  std::vector<EvalItem> items;
  constexpr int kPerSubtask = 100000;
  for (Subtask s : kAllSubtasks) {
    for (int i = 0; i < kPerSubtask; ++i) {
      EvalItem it;
      it.item_id = std::to_string(i);
      it.subtask = s;
      if (s == Subtask::AnomalyDiscrimination) {
        it.correct = "AB"[rng.index(2)];
        it.polarity = it.correct == 'A' ? Polarity::Normal : Polarity::Abnormal;
        it.predicted = "AB"[rng.index(2)];
      } else {
        it.correct = "ABCD"[rng.index(4)];
        it.predicted = "ABCD"[rng.index(4)];
      }
      items.push_back(std::move(it));
    }
  }
  const auto report = build_report(items);
  bool ok = std::abs(report.at(Subtask::AnomalyDiscrimination) - 50.0) <= 1.0;
  std::string detail = "discrimination " + fmt("%.2f", report.at(Subtask::AnomalyDiscrimination));
  for (std::size_t i = 1; i < kSubtaskCount; ++i) {
    ok = ok && std::abs(report.accuracy[i] - 25.0) <= 1.0;
    detail += ", " + fmt("%.2f", report.accuracy[i]);
  }
  return {ok, detail};
}

Verdict ac5_domain_reward() {
  const HashedEmbedder embed;
  Rng rng(5);
  static constexpr std::string_view kChars = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,;-";
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::string text(1, kChars[rng.index(62)]);
    for (std::uint64_t k = 0, n = rng.index(80); k < n; ++k) text += kChars[rng.index(kChars.size())];
    worst = std::max(worst, std::abs(domain_reasoning_reward(text, text, embed, 0.1).value - 0.1));
  }
  const auto zero = domain_reasoning_reward("... --- !!!", "a reference", embed, 0.1);
  return {worst <= 1e-6 && zero.value == 0.0 && zero.degenerate,
          "max deviation " + fmt("%.3g", worst) + ", zero-token value " + fmt("%g", zero.value)};
}

Verdict ac6_advantages() {
  Rng rng(6);
  double worst_sum = 0.0, worst_shift = 0.0;
  for (int g = 0; g < 1000; ++g) {
    Eigen::VectorXd r(16);
    for (int i = 0; i < 16; ++i) r[i] = rng.uniform01() * 10.0 - 5.0;
    const Eigen::VectorXd a = group_advantages(r);
    worst_sum = std::max(worst_sum, std::abs(a.sum()));
    const Eigen::VectorXd shifted = r.array() + (rng.uniform01() * 100.0 - 50.0);
    worst_shift = std::max(worst_shift, (group_advantages(shifted) - a).cwiseAbs().maxCoeff());
  }
  bool degenerate_zero = true;
  for (double v : {0.0, 1.0, 3.1, -2.5}) {
    degenerate_zero = degenerate_zero && group_advantages(Eigen::VectorXd::Constant(16, v)).isZero(0.0);
  }
  return {worst_sum <= 1e-6 && worst_shift <= 1e-9 && degenerate_zero,
          "max |sum| " + fmt("%.3g", worst_sum) + ", max shift deviation " + fmt("%.3g", worst_shift) +
              (degenerate_zero ? ", degenerate groups zero" : ", degenerate groups NONZERO")};
}

Verdict ac7_simulator() {
  const auto t0 = Clock::now();
  const HashedEmbedder embed;
  const auto prompts = parse_scenario(bundled_scenario());
  SimConfig cfg;
  cfg.steps = 500;
  cfg.group_size = 16;
  cfg.lr = 0.1;
  auto once = [&](TrainingTrace* keep) {
    auto trace = simulate_grpo(prompts, ToyPolicy::uniform(prompts, 42), cfg, embed);
    std::ostringstream ss;
    write_trace_jsonl(ss, trace);
    if (keep) *keep = std::move(trace);
    return ss.str();
  };
  TrainingTrace trace;
  const std::string first = once(&trace);
  const std::string second = once(nullptr);
  const double secs = seconds_since(t0);

  const double start = trace.records.front().expected_reward;
  const double end = trace.records.back().expected_reward;
  const Eigen::VectorXd& rewards = trace.candidate_rewards[0];
  Eigen::Index best = 0;
  rewards.maxCoeff(&best);
  const double mass = softmax(trace.final_policy.logits[0])[best];
  const double gain = (end - start) / start;
  return {gain >= 0.5 && mass >= 0.9 && secs < 10.0 && first == second,
          "reward " + fmt("%.4f", start) + " -> " + fmt("%.4f", end) + " (+" + fmt("%.1f", gain * 100) + "%), mass " +
              fmt("%.4f", mass) + ", " + fmt("%.2f", secs) + " s for two runs, traces " +
              (first == second ? "identical" : "DIFFER")};
}

// Answers QA generation with `n` distinct pairs and paraphrase requests with the asked-for count.
class CompliantStub final : public GenerationProvider {
 public:
  std::string generate(std::string_view, std::string_view user) const override {
    const auto req = nlohmann::json::parse(user);
    nlohmann::json arr = nlohmann::json::array();
    const std::string task = req.at("task");
    if (task == "qa_generation") {
      for (int i = 0; i < req.at("count").get<int>(); ++i)
        arr.push_back({{"question", "Q" + std::to_string(i)}, {"answer", "A" + std::to_string(i)}});
      return arr.dump();
    }
    if (task == "paraphrase") {
      for (int k = 0; k < req.at("variants").get<int>(); ++k)
        arr.push_back({{"question", std::to_string(k) + req.at("question").get<std::string>()}, {"answer", req.at("answer")}});
      return arr.dump();
    }
    return "rationale: " + req.at("question").get<std::string>();
  }
  std::string describe() const override { return "stub"; }
};

Verdict ac8_dataset_counts() {
  const CompliantStub stub;
  NormalPool pool;
  pool.add("bottle", "bottle/train/good/000.png");
  const auto qa = build_stage2_qa({"bottle", "broken_large", "Large breaks remove part of the rim."}, stub, pool);
  std::map<QAOrigin, int> origins;
  for (const auto& r : qa.records) ++origins[r.origin];

  std::ifstream f(std::string(INSPECTRL_FIXTURES) + "/build/stage3/catalog.jsonl");
  const Catalog catalog = read_catalog(f);
  auto stage3 = [&](std::uint64_t seed, std::size_t jobs) {
    std::string out;
    for (const auto& r : sample_stage3(catalog, seed, stub, jobs)) out += to_json_line(r) + "\n";
    return out;
  };
  const std::string a = stage3(42, 1), b = stage3(42, 8);
  const auto lines = static_cast<std::size_t>(std::count(a.begin(), a.end(), '\n'));
  const bool ok = qa.records.size() == 90 && origins[QAOrigin::Generated] == 30 && origins[QAOrigin::Paraphrase1] == 30 &&
                  origins[QAOrigin::Paraphrase2] == 30 && catalog.size() == 293 && lines == 293 && a == b;
  return {ok, std::to_string(qa.records.size()) + " QA records (" + std::to_string(origins[QAOrigin::Generated]) + "/" +
                  std::to_string(origins[QAOrigin::Paraphrase1]) + "/" + std::to_string(origins[QAOrigin::Paraphrase2]) +
                  "), " + std::to_string(lines) + " stage-3 records over " + std::to_string(catalog.size()) +
                  " categories, " + (a == b ? "reproducible" : "NOT reproducible")};
}

Verdict ac9_score_determinism() {
  auto score = [](const char* threads) {
    std::ostringstream out, err;
    const std::string dir = std::string(INSPECTRL_FIXTURES) + "/score/";
    const int code = cli::run({"inspectrl", "score", "--responses", dir + "responses100.jsonl", "--ground-truth",
                               dir + "gt100.jsonl", "--threads", threads},
                              out, err);
    return code == 0 ? out.str() : std::string("exit ") + std::to_string(code) + ": " + err.str();
  };
  const std::string one_a = score("1"), one_b = score("1"), eight = score("8");
  const auto lines = static_cast<std::size_t>(std::count(one_a.begin(), one_a.end(), '\n'));
  return {lines == 100 && one_a == one_b && one_a == eight,
          std::to_string(lines) + " lines, repeat " + (one_a == one_b ? "identical" : "DIFFERS") + ", 1 vs 8 threads " +
              (one_a == eight ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"AC1 segmentation reward vs brute-force F1 on 3x3", ac1_segmentation_oracle},
      {"AC2 seg-text codec round trip", ac2_codec_round_trip},
      {"AC3 benchmark row averages", ac3_table_identities},
      {"AC4 chance-level Monte Carlo", ac4_chance_level},
      {"AC5 domain reward self-similarity", ac5_domain_reward},
      {"AC6 group advantage identities", ac6_advantages},
      {"AC7 policy simulator improvement", ac7_simulator},
      {"AC8 dataset builder counts", ac8_dataset_counts},
      {"AC9 score determinism across threads", ac9_score_determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
