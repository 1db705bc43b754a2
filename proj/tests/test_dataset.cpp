#include <doctest.h>

#include <set>
#include <sstream>

#include "inspectrl/dataset.hpp"
#include "stub_server.hpp"
#include "support.hpp"

using namespace inspectrl;
using nlohmann::json;

namespace {

MaskImage mask_with_cells(const std::vector<PatchCoord>& cells) {
  MaskImage m{256, 256, std::vector<std::uint8_t>(256 * 256, 0)};
  for (const auto& c : cells)
    for (int y = c.row * 16; y < c.row * 16 + 16; ++y)
      for (int x = c.col * 16; x < c.col * 16 + 16; ++x) m.pixels[static_cast<std::size_t>(y) * 256 + x] = 255;
  return m;
}

NormalPool pool_for(const std::string& category, int n = 3) {
  NormalPool pool;
  for (int i = 0; i < n; ++i) pool.add(category, category + "/good/" + std::to_string(i) + ".png");
  return pool;
}

const DomainSnippet kSnippet{"bottle", "broken large", "Large breaks remove part of the rim. They are critical."};

Catalog synthetic_catalog(int categories, int per) {
  Catalog c;
  for (int k = 0; k < categories; ++k) {
    const std::string cat = "cat" + std::to_string(k);
    for (int i = 0; i < per; ++i) {
      CatalogItem it;
      it.item_id = cat + "-" + std::to_string(i);
      it.category = cat;
      it.question = "Is there a defect in " + it.item_id + "?";
      it.options = {"A: yes", "B: no"};
      it.correct_choice = "A";
      c[cat].push_back(it);
    }
  }
  return c;
}

std::string stage3_bytes(const Catalog& c, std::uint64_t seed, std::size_t jobs) {
  const auto provider = testing::compliant_provider();
  std::string out;
  for (const auto& r : sample_stage3(c, seed, provider, jobs)) out += to_json_line(r) + "\n";
  return out;
}

}  // namespace

TEST_CASE("stage 1: defect record") {
  const testing::ScriptedProvider echo([](const json&) { return std::string("DESC"); });
  const auto res = build_stage1_record(mask_with_cells({{11, 12}, {11, 13}, {11, 14}, {12, 11}}), "q.png", "n.png",
                                       "bottle", "contamination", echo, 9);
  CHECK(res.record.seg_text == "(11,12)-(11,14), (12,11)");
  CHECK(res.record.think_text == "DESC");
  CHECK(res.record.seed == 9);
  CHECK(res.warnings.empty());
  CHECK(to_json_line(res.record) ==
        R"({"query_image_ref":"q.png","normal_image_ref":"n.png","category":"bottle","defect_type":"contamination",)"
        R"j("seg_text":"(11,12)-(11,14), (12,11)","think_text":"DESC","seed":9})j");
}

TEST_CASE("stage 1: empty masks") {
  const testing::ScriptedProvider echo([](const json& req) {
    CHECK(req.at("anomalous_patches") == "");
    return std::string("no difference");
  });
  const auto good = build_stage1_record(mask_with_cells({}), "q", "n", "bottle", "good", echo);
  CHECK(good.record.seg_text == "");
  CHECK(good.warnings.empty());
  const auto odd = build_stage1_record(mask_with_cells({}), "q", "n", "bottle", "crack", echo);
  CHECK(odd.warnings.size() == 1);

  const testing::ScriptedProvider blank([](const json&) { return std::string(" \n"); });
  CHECK_THROWS_AS(build_stage1_record(mask_with_cells({{0, 0}}), "q", "n", "c", "d", blank), ProviderError);
}

TEST_CASE("stage 1: provider timeout yields no record") {
  testing::StubServer stub;
  stub.server().Post("/generate", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"text": "late"})", "application/json");
  });
  stub.start();
  HttpGenerationConfig cfg{stub.url()};
  cfg.timeout = std::chrono::milliseconds(150);
  const HttpGenerationProvider slow(cfg);
  try {
    build_stage1_record(mask_with_cells({{1, 1}}), "q", "n", "c", "d", slow);
    FAIL("expected a timeout");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderError::Kind::Timeout);
  }
}

TEST_CASE("http generation provider: wire format") {
  testing::StubServer stub;
  json seen;
  stub.server().Post("/api/generate", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    res.set_content(R"({"text": "hello"})", "application/json");
  });
  stub.server().Post("/bad/generate", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"txt": "hello"})", "application/json");
  });
  stub.start();
  HttpGenerationConfig cfg{stub.url() + "/api"};
  cfg.max_tokens = 77;
  CHECK(HttpGenerationProvider(cfg).generate("sys", "usr") == "hello");
  CHECK(seen == json{{"system", "sys"}, {"user", "usr"}, {"max_tokens", 77}});
  CHECK_THROWS_AS(HttpGenerationProvider({stub.url() + "/bad"}).generate("s", "u"), ProviderError);
}

TEST_CASE("stage 2: 30 pairs with two paraphrases gives 90 records") {
  const auto provider = testing::compliant_provider(30);
  const auto res = build_stage2_qa(kSnippet, provider, pool_for("bottle"), {30, 2, 5, 4});
  REQUIRE(res.records.size() == 90);
  std::map<QAOrigin, int> origins;
  std::set<std::string> ids;
  for (const auto& r : res.records) {
    ++origins[r.origin];
    ids.insert(r.qa_id);
    CHECK(r.normal_image_ref.rfind("bottle/good/", 0) == 0);
    CHECK((r.origin == QAOrigin::Generated) != r.source_qa_id.has_value());
  }
  CHECK(origins[QAOrigin::Generated] == 30);
  CHECK(origins[QAOrigin::Paraphrase1] == 30);
  CHECK(origins[QAOrigin::Paraphrase2] == 30);
  CHECK(ids.size() == 90);
  CHECK(res.records[0].qa_id == "bottle-broken_large-001");
  CHECK(res.records[30].qa_id == "bottle-broken_large-001-p1");
  CHECK(res.records[30].source_qa_id == "bottle-broken_large-001");
  CHECK(res.warnings.empty());
}

TEST_CASE("stage 2: parallel and serial runs agree byte for byte") {
  const auto provider = testing::compliant_provider(30);
  auto bytes = [&](std::size_t jobs) {
    std::string s;
    for (const auto& r : build_stage2_qa(kSnippet, provider, pool_for("bottle", 5), {30, 2, 11, jobs}).records)
      s += to_json_line(r) + "\n";
    return s;
  };
  CHECK(bytes(1) == bytes(8));
}

TEST_CASE("stage 2: shortfall, surplus, duplicates and malformed replies") {
  const auto pool = pool_for("bottle");
  try {
    build_stage2_qa(kSnippet, testing::compliant_provider(29), pool);
    FAIL("expected a shortfall");
  } catch (const ShortfallError& e) {
    CHECK(e.expected() == 30);
    CHECK(e.actual() == 29);
  }

  const auto surplus = build_stage2_qa(kSnippet, testing::compliant_provider(33), pool);
  CHECK(surplus.records.size() == 90);
  CHECK(surplus.warnings.size() == 1);

  const testing::ScriptedProvider dupes([](const json& req) -> std::string {
    if (req.at("task") == "qa_generation") {
      auto arr = json::parse(testing::qa_array(30));
      arr.push_back(arr[0]);
      return arr.dump();
    }
    return testing::compliant_provider().generate("", req.dump());
  });
  const auto deduped = build_stage2_qa(kSnippet, dupes, pool);
  CHECK(deduped.records.size() == 90);
  CHECK(deduped.warnings.size() == 1);

  const testing::ScriptedProvider fenced([](const json& req) -> std::string {
    if (req.at("task") == "qa_generation") return "```json\n" + testing::qa_array(30) + "\n```";
    return testing::compliant_provider().generate("", req.dump());
  });
  CHECK(build_stage2_qa(kSnippet, fenced, pool).records.size() == 90);

  const testing::ScriptedProvider prose([](const json&) { return std::string("Sure! Here are the questions."); });
  try {
    build_stage2_qa(kSnippet, prose, pool);
    FAIL("expected a parse error");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderError::Kind::MalformedPayload);
    CHECK(e.raw() == "Sure! Here are the questions.");
  }

  CHECK_THROWS_AS(build_stage2_qa(kSnippet, testing::compliant_provider(), NormalPool{}), ContractError);
  CHECK_THROWS_AS(build_stage2_qa({"c", "d", "  "}, testing::compliant_provider(), pool), ContractError);
}

TEST_CASE("stage 2: builtin offline provider satisfies the contract") {
  const OfflineGenerationProvider offline;
  const auto res = build_stage2_qa(kSnippet, offline, pool_for("bottle"));
  CHECK(res.records.size() == 90);
}

TEST_CASE("stage 3: one record per category, seed reproducible") {
  const auto catalog = synthetic_catalog(293, 4);
  const auto provider = testing::compliant_provider();
  const auto records = sample_stage3(catalog, 42, provider, 4);
  CHECK(records.size() == 293);
  std::set<std::string> cats;
  for (const auto& r : records) {
    cats.insert(r.item.category);
    CHECK(r.pseudo_rationale == "rationale for " + r.item.question);
  }
  CHECK(cats.size() == 293);
  CHECK(stage3_bytes(catalog, 42, 1) == stage3_bytes(catalog, 42, 8));
  CHECK(stage3_bytes(catalog, 42, 1) != stage3_bytes(catalog, 43, 1));
}

TEST_CASE("stage 3: single-item categories ignore the seed") {
  const auto catalog = synthetic_catalog(10, 1);
  CHECK(select_one_per_category(catalog, 1) == select_one_per_category(catalog, 999));
  Catalog broken;
  broken["x"] = {};
  CHECK_THROWS_AS(select_one_per_category(broken, 0), ContractError);
}

TEST_CASE("normal pool selection") {
  const auto pool = pool_for("screw", 10);
  CHECK(pool.choose("screw", 1, 2) == pool.choose("screw", 1, 2));
  CHECK(pool.has("screw"));
  CHECK_FALSE(pool.has("nut"));
  CHECK_THROWS_AS(pool.choose("nut", 1, 0), ContractError);
}

TEST_CASE("jsonl readers") {
  std::istringstream snippets(R"({"category": "bottle", "defect_type": "crack", "body": "text"})"
                              "\n\n");
  CHECK(read_snippets(snippets).size() == 1);
  std::istringstream broken("{\"category\": \"bottle\"}\n");
  CHECK_THROWS_AS(read_snippets(broken), InputFormatError);
  std::istringstream garbage("not json\n");
  CHECK_THROWS_AS(read_normal_pool(garbage), InputFormatError);
}
