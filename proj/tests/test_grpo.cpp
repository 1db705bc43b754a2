#include <doctest.h>

#include <sstream>

#include "inspectrl/grpo.hpp"
#include "inspectrl/io.hpp"
#include "support.hpp"

using namespace inspectrl;

namespace {

Eigen::VectorXd random_group(Rng& rng, int n) {
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) r[i] = rng.uniform01() * 4.0 - 1.0;
  return r;
}

std::string trace_text(const TrainingTrace& t) {
  std::ostringstream ss;
  write_trace_jsonl(ss, t);
  return ss.str();
}

const HashedEmbedder kEmbed;

}  // namespace

TEST_CASE("advantages: examples") {
  CHECK(group_advantages(std::vector<double>{1, 1, 1, 1}) == std::vector<double>{0, 0, 0, 0});

  const auto two = group_advantages(std::vector<double>{0, 1});
  CHECK(two[0] == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(two[1] == doctest::Approx(1.0).epsilon(1e-7));

  const auto four = group_advantages(std::vector<double>{0, 0, 0, 4});
  for (int i = 0; i < 3; ++i) CHECK(four[i] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-7));
  CHECK(four[3] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-7));

  CHECK_THROWS_AS(group_advantages(std::vector<double>{1}), ContractError);
  CHECK_THROWS_AS(group_advantages(std::vector<double>{1, std::nan("")}), ContractError);
}

TEST_CASE("advantages: zero sum, shift and scale invariance") {
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(31));
    const Eigen::VectorXd r = random_group(rng, n);
    const Eigen::VectorXd a = group_advantages(r);
    CHECK(std::abs(a.sum()) < 1e-9);
    CHECK(std::abs(std::sqrt(a.squaredNorm() / n) - 1.0) < 1e-6);

    const double shift = rng.uniform01() * 200.0 - 100.0;
    const Eigen::VectorXd shifted = r.array() + shift;
    CHECK((group_advantages(shifted) - a).cwiseAbs().maxCoeff() < 1e-9);

    const double scale = 0.5 + rng.uniform01() * 20.0;
    CHECK((group_advantages(Eigen::VectorXd(r * scale)) - a).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("advantages: float instantiation") {
  Eigen::VectorXf r(4);
  r << 0.f, 0.f, 0.f, 4.f;
  const Eigen::VectorXf a = group_advantages(r);
  CHECK(a[3] == doctest::Approx(1.73205f).epsilon(1e-5));
}

TEST_CASE("softmax and entropy") {
  const Eigen::VectorXd p = softmax(Eigen::Vector3d(1000, 1000, 1000));
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(entropy(p) == doctest::Approx(std::log(3.0)));
  CHECK(entropy(softmax(Eigen::Vector2d(0, -1e6))) == doctest::Approx(0.0));
}

TEST_CASE("simulator: bundled scenario improves") {
  const auto prompts = parse_scenario(bundled_scenario());
  REQUIRE(prompts.size() == 1);
  const auto trace = simulate_grpo(prompts, ToyPolicy::uniform(prompts, 42), SimConfig{}, kEmbed);
  REQUIRE(trace.candidate_rewards[0].size() == 2);
  CHECK(trace.candidate_rewards[0][0] == doctest::Approx(3.1));
  CHECK(trace.candidate_rewards[0][1] == 0.0);
  REQUIRE(trace.records.size() == 501);
  CHECK(trace.records.front().expected_reward == doctest::Approx(1.55));
  CHECK(trace.records.back().expected_reward >= 1.5 * trace.records.front().expected_reward);
  CHECK(softmax(trace.final_policy.logits[0])[0] >= 0.9);
}

TEST_CASE("simulator: null updates") {
  const auto prompts = parse_scenario(bundled_scenario());
  SimConfig cfg;
  cfg.steps = 50;
  cfg.lr = 0.0;
  const auto frozen = simulate_grpo(prompts, ToyPolicy::uniform(prompts, 1), cfg, kEmbed);
  CHECK(frozen.final_policy.logits[0] == Eigen::VectorXd::Zero(2));
  for (const auto& r : frozen.records) CHECK(r.expected_reward == frozen.records.front().expected_reward);

  auto same = prompts;
  same[0].candidates = {same[0].candidates[0], same[0].candidates[0], same[0].candidates[0]};
  cfg.lr = 0.5;
  ToyPolicy init = ToyPolicy::uniform(same, 3);
  init.logits[0] = Eigen::Vector3d(0.3, -0.2, 1.0);
  const auto flat = simulate_grpo(same, init, cfg, kEmbed);
  CHECK((flat.final_policy.logits[0] - init.logits[0]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("simulator: deterministic trace") {
  const auto prompts = parse_scenario(bundled_scenario());
  SimConfig cfg;
  cfg.steps = 120;
  const auto a = trace_text(simulate_grpo(prompts, ToyPolicy::uniform(prompts, 42), cfg, kEmbed));
  const auto b = trace_text(simulate_grpo(prompts, ToyPolicy::uniform(prompts, 42), cfg, kEmbed));
  CHECK(a == b);
  CHECK(a != trace_text(simulate_grpo(prompts, ToyPolicy::uniform(prompts, 43), cfg, kEmbed)));
  CHECK(a.substr(0, a.find('\n')).rfind(R"({"step":0,"prompt_id":"bottle-contamination","expected_reward":)", 0) == 0);
}

TEST_CASE("simulator: contract violations") {
  const auto prompts = parse_scenario(bundled_scenario());
  SimConfig cfg;
  cfg.group_size = 1;
  CHECK_THROWS_AS(simulate_grpo(prompts, ToyPolicy::uniform(prompts, 1), cfg, kEmbed), ContractError);
  CHECK_THROWS_AS(simulate_grpo(prompts, ToyPolicy{}, SimConfig{}, kEmbed), ContractError);
  CHECK_THROWS_AS(parse_scenario("{"), InputFormatError);
  CHECK_THROWS_AS(parse_scenario(R"({"prompts": []})"), ContractError);
}
