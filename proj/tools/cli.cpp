#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "inspectrl/dataset.hpp"
#include "inspectrl/embedding.hpp"
#include "inspectrl/eval.hpp"
#include "inspectrl/generation.hpp"
#include "inspectrl/grid_codec.hpp"
#include "inspectrl/grpo.hpp"
#include "inspectrl/io.hpp"
#include "inspectrl/kv_config.hpp"
#include "inspectrl/parallel.hpp"
#include "inspectrl/pgm.hpp"
#include "inspectrl/reward.hpp"

namespace fs = std::filesystem;

namespace inspectrl::cli {
namespace {

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputFormatError(std::string("cannot open ") + what + " '" + path + "'");
  return f;
}

std::string slurp(const std::string& path, const char* what) {
  auto f = open_input(path, what);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Writes to --out when given, otherwise to the command's stdout stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_.open(path, std::ios::binary);
      if (!file_) throw InputFormatError("cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::unique_ptr<EmbeddingProvider> make_embedder(const std::string& endpoint, int dim) {
  if (endpoint == "builtin") return std::make_unique<HashedEmbedder>(dim);
  RemoteEmbeddingConfig cfg;
  cfg.endpoint = endpoint;
  if (const char* token = std::getenv("INSPECTRL_EMBED_TOKEN")) cfg.bearer_token = token;
  return std::make_unique<RemoteEmbedder>(cfg);
}

std::string env_name(const std::string& flag) {
  std::string name = kEnvPrefix;
  for (char ch : flag) name += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return name;
}

// ---- option bundles ----------------------------------------------------------

struct EncodeOpts {
  std::string mask;
  std::string grid = "16x16";
  int threshold = kDefaultMaskThreshold;
};

struct ScoreOpts {
  std::string responses;
  std::string ground_truth;
  std::string weights;
  std::string embed_endpoint = "builtin";
  int embed_dim = kDefaultHashedDim;
  int threads = 1;
  bool allow_missing = false;
  std::string out;
};

struct EvalOpts {
  std::string predictions;
  std::string format = "markdown";
};

struct SimulateOpts {
  std::uint64_t seed = 42;
  int steps = 500;
  int group_size = 16;
  double lr = 0.1;
  std::string scenario;
  std::string weights;
  int embed_dim = kDefaultHashedDim;
  std::string out;
};

struct BuildOpts {
  int stage = 0;
  std::string input;
  std::string provider_endpoint = "builtin";
  std::uint64_t seed = 0;
  std::string out;
  int jobs = 1;
  int count = 30;
  int paraphrases = 2;
  int timeout_ms = 120000;
  int retries = 0;
};

// ---- subcommands -------------------------------------------------------------

int cmd_encode(const EncodeOpts& o, std::ostream& out, std::ostream&) {
  const GridSpec grid = parse_grid_spec(o.grid);
  const MaskImage mask = read_pgm(o.mask);
  out << encode_patches(rasterize_mask(mask, grid, o.threshold)) << '\n';
  return kOk;
}

int cmd_score(const ScoreOpts& o, std::ostream& out, std::ostream& err) {
  const RewardWeights weights = o.weights.empty() ? RewardWeights{} : load_weights(o.weights);
  std::vector<ResponseRow> responses;
  {
    auto f = open_input(o.responses, "responses");
    responses = read_responses(f);
  }
  std::map<std::string, GroundTruth> truth;
  {
    auto f = open_input(o.ground_truth, "ground truth");
    truth = read_ground_truth(f);
  }

  std::vector<std::size_t> joined;
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (truth.count(responses[i].id)) {
      joined.push_back(i);
    } else {
      missing.push_back(responses[i].id);
    }
  }
  if (!missing.empty()) {
    err << "responses without ground truth (" << missing.size() << "):";
    for (const auto& id : missing) err << ' ' << id;
    err << '\n';
    if (!o.allow_missing) return kDataError;
  }

  const auto embed = make_embedder(o.embed_endpoint, o.embed_dim);
  std::vector<RewardBreakdown> results(joined.size());
  parallel_for(joined.size(), static_cast<std::size_t>(std::max(1, o.threads)), [&](std::size_t k) {
    const auto& row = responses[joined[k]];
    results[k] = composite_reward(row.response, truth.at(row.id), weights, *embed);
  });

  Sink sink(o.out, out);
  double sum = 0.0;
  for (std::size_t k = 0; k < joined.size(); ++k) {
    *sink << to_json_line(responses[joined[k]].id, results[k]) << '\n';
    sum += results[k].total;
  }
  err << "scored " << joined.size() << " responses, mean total "
      << (joined.empty() ? 0.0 : sum / static_cast<double>(joined.size())) << '\n';
  return kOk;
}

int cmd_eval(const EvalOpts& o, std::ostream& out, std::ostream&) {
  const TableFormat format = parse_table_format(o.format);
  auto f = open_input(o.predictions, "predictions");
  const auto items = read_eval_items(f);
  out << render_table(build_report(items), format);
  return kOk;
}

int cmd_simulate(const SimulateOpts& o, std::ostream& out, std::ostream& err) {
  const auto prompts = parse_scenario(o.scenario.empty() ? std::string(bundled_scenario()) : slurp(o.scenario, "scenario"));
  SimConfig cfg;
  cfg.steps = o.steps;
  cfg.group_size = o.group_size;
  cfg.lr = o.lr;
  if (!o.weights.empty()) cfg.weights = load_weights(o.weights);
  const HashedEmbedder embed(o.embed_dim);
  const auto trace = simulate_grpo(prompts, ToyPolicy::uniform(prompts, o.seed), cfg, embed);

  Sink sink(o.out, out);
  write_trace_jsonl(*sink, trace);
  for (std::size_t p = 0; p < prompts.size(); ++p) {
    const auto first = trace.records[p];
    const auto last = trace.records[trace.records.size() - prompts.size() + p];
    err << prompts[p].prompt_id << ": expected reward " << first.expected_reward << " -> " << last.expected_reward
        << '\n';
  }
  return kOk;
}

std::unique_ptr<GenerationProvider> make_generator(const BuildOpts& o) {
  if (o.provider_endpoint == "builtin") return std::make_unique<OfflineGenerationProvider>();
  HttpGenerationConfig cfg;
  cfg.endpoint = o.provider_endpoint;
  cfg.timeout = std::chrono::milliseconds(o.timeout_ms);
  cfg.max_retries = o.retries;
  if (const char* token = std::getenv("INSPECTRL_PROVIDER_TOKEN")) cfg.bearer_token = token;
  return std::make_unique<HttpGenerationProvider>(cfg);
}

int cmd_build(const BuildOpts& o, std::ostream& out, std::ostream& err) {
  const fs::path dir(o.input);
  if (!fs::is_directory(dir)) throw InputFormatError("input directory '" + o.input + "' does not exist");
  const auto provider = make_generator(o);
  const auto jobs = static_cast<std::size_t>(std::max(1, o.jobs));
  std::vector<std::string> lines;

  auto normals = [&] {
    auto f = open_input((dir / "normals.jsonl").string(), "normal image list");
    return read_normal_pool(f);
  };

  switch (o.stage) {
    case 1: {
      std::vector<Stage1Input> inputs;
      {
        auto f = open_input((dir / "samples.jsonl").string(), "sample list");
        inputs = read_stage1_inputs(f);
      }
      const NormalPool pool = normals();
      std::vector<Stage1Result> results(inputs.size());
      parallel_for(inputs.size(), jobs, [&](std::size_t i) {
        const auto& in = inputs[i];
        const MaskImage mask = read_pgm(dir / in.mask_path);
        const std::string& normal = pool.choose(in.category, o.seed, i);
        results[i] = build_stage1_record(mask, in.query_image_ref, normal, in.category, in.defect_type, *provider, o.seed);
      });
      for (auto& r : results) {
        for (const auto& w : r.warnings) err << "warning: " << w << '\n';
        lines.push_back(to_json_line(r.record));
      }
      break;
    }
    case 2: {
      std::vector<DomainSnippet> snippets;
      {
        auto f = open_input((dir / "snippets.jsonl").string(), "snippet list");
        snippets = read_snippets(f);
      }
      const NormalPool pool = normals();
      Stage2Options opts;
      opts.count = o.count;
      opts.paraphrases_per = o.paraphrases;
      opts.seed = o.seed;
      opts.jobs = jobs;
      for (const auto& s : snippets) {
        auto result = build_stage2_qa(s, *provider, pool, opts);
        for (const auto& w : result.warnings) err << "warning: " << s.category << "/" << s.defect_type << ": " << w << '\n';
        for (const auto& r : result.records) lines.push_back(to_json_line(r));
      }
      break;
    }
    case 3: {
      Catalog catalog;
      {
        auto f = open_input((dir / "catalog.jsonl").string(), "catalog");
        catalog = read_catalog(f);
      }
      for (const auto& r : sample_stage3(catalog, o.seed, *provider, jobs)) lines.push_back(to_json_line(r));
      break;
    }
    default:
      throw InputFormatError("--stage must be 1, 2 or 3");
  }

  Sink sink(o.out, out);
  for (const auto& l : lines) *sink << l << '\n';
  err << "wrote " << lines.size() << " stage-" << o.stage << " records\n";
  return kOk;
}

// ---- config file injection ---------------------------------------------------

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Appends "--key=value" for config entries not already supplied by a flag or
// an environment variable.
std::vector<std::string> with_config(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config_path.empty()) {
    if (const char* env = std::getenv("INSPECTRL_CONFIG")) config_path = env;
  }
  if (config_path.empty()) return args;

  auto f = open_input(config_path, "config file");
  for (const auto& [key, value] : parse_kv(f)) {
    std::string flag = "--";
    for (char ch : key) flag += ch == '_' ? '-' : ch;
    if (has_flag(args, flag) || std::getenv(env_name(flag.substr(2)).c_str())) continue;
    args.push_back(flag + "=" + value);
  }
  return args;
}

template <typename T>
CLI::Option* opt(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  return app->add_option("--" + name, target, help)->envname(env_name(name))->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reward scoring, seg-text codec, dataset construction and benchmark aggregation for inspection reasoning", "inspectrl"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  app.add_option("--config", "flat key = value file supplying option defaults");

  EncodeOpts encode;
  auto* enc = app.add_subcommand("encode", "rasterize a PGM mask and print its seg text");
  opt(enc, "mask", encode.mask, "PGM mask (P2 or P5, maxval 255)")->required();
  opt(enc, "grid", encode.grid, "grid as ROWSxCOLS");
  opt(enc, "threshold", encode.threshold, "foreground intensity threshold (1-255)");

  ScoreOpts score;
  auto* sc = app.add_subcommand("score", "score responses against ground truth");
  opt(sc, "responses", score.responses, "responses JSONL {id, response}")->required();
  opt(sc, "ground-truth", score.ground_truth, "ground truth JSONL")->required();
  opt(sc, "weights", score.weights, "reward weights file (key = value)");
  opt(sc, "embed-endpoint", score.embed_endpoint, "embedding service URL or 'builtin'");
  opt(sc, "embed-dim", score.embed_dim, "dimension of the builtin embedder");
  opt(sc, "threads", score.threads, "scoring threads");
  sc->add_flag("--allow-missing", score.allow_missing, "skip responses without ground truth")
      ->envname(env_name("allow-missing"));
  opt(sc, "out", score.out, "output JSONL (default stdout)");

  EvalOpts eval;
  auto* ev = app.add_subcommand("eval", "aggregate multiple-choice predictions into the subtask table");
  opt(ev, "predictions", eval.predictions, "predictions JSONL")->required();
  opt(ev, "format", eval.format, "markdown, csv or json");

  SimulateOpts sim;
  auto* si = app.add_subcommand("simulate", "run the group-relative policy-gradient toy simulator");
  opt(si, "seed", sim.seed, "sampling seed");
  opt(si, "steps", sim.steps, "update steps");
  opt(si, "group-size", sim.group_size, "samples per prompt per step");
  opt(si, "lr", sim.lr, "learning rate");
  opt(si, "scenario", sim.scenario, "scenario JSON (default: bundled two-candidate scenario)");
  opt(si, "weights", sim.weights, "reward weights file (key = value)");
  opt(si, "embed-dim", sim.embed_dim, "dimension of the builtin embedder");
  opt(si, "out", sim.out, "trace JSONL (default stdout)");

  BuildOpts build;
  auto* bu = app.add_subcommand("build", "construct stage 1, 2 or 3 training records");
  opt(bu, "stage", build.stage, "1, 2 or 3")->required();
  opt(bu, "input", build.input, "input directory")->required();
  opt(bu, "provider-endpoint", build.provider_endpoint, "generation service URL or 'builtin'");
  opt(bu, "seed", build.seed, "selection seed");
  opt(bu, "out", build.out, "output JSONL (default stdout)");
  opt(bu, "jobs", build.jobs, "concurrent provider calls");
  opt(bu, "count", build.count, "QA pairs per snippet (stage 2)");
  opt(bu, "paraphrases", build.paraphrases, "paraphrases per QA pair (stage 2)");
  opt(bu, "timeout-ms", build.timeout_ms, "provider request timeout");
  opt(bu, "retries", build.retries, "provider retries on transient failures");

  try {
    const auto args = with_config(raw_args);
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputFormatError;
  } catch (const InputFormatError& e) {
    err << "error: " << e.what() << '\n';
    return kInputFormatError;
  }

  try {
    for (auto* sub : app.get_subcommands()) {
      err << "# resolved " << sub->get_name() << " config\n" << sub->config_to_str(true, false);
    }
    if (enc->parsed()) return cmd_encode(encode, out, err);
    if (sc->parsed()) return cmd_score(score, out, err);
    if (ev->parsed()) return cmd_eval(eval, out, err);
    if (si->parsed()) return cmd_simulate(sim, out, err);
    if (bu->parsed()) return cmd_build(build, out, err);
  } catch (const InputFormatError& e) {
    err << "error: " << e.what() << '\n';
    return kInputFormatError;
  } catch (const ProviderError& e) {
    err << "provider error: " << e.what() << '\n';
    if (!e.raw().empty()) err << "raw payload: " << e.raw() << '\n';
    return kProviderError;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kDataError;
}

}  // namespace inspectrl::cli
