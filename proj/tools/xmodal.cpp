#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xmodal/runner.hpp"

using namespace xmodal;

namespace {

// exit codes: 0 ok, 1 usage, 2 partial failures, 3 fatal
constexpr int kOk = 0;
constexpr int kPartial = 2;
constexpr int kFatal = 3;

struct CliOptions {
  std::string config_path;
  std::string task;
  int count = 30;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string in_file;
  std::string schema;
  std::string manifest;
  std::string strategy = "both";
  int subset_k = -1;
  std::string backend;
  std::string out;
  std::string results;
  std::vector<std::string> scores_files;
  std::string mock_mode;
  double p_image_wrong = -1.0;
};

RunnerConfig effective_config(const CliOptions& o) {
  RunnerConfig c;
  if (!o.config_path.empty()) c = load_config(o.config_path);
  // flags override config; env vars cover connection secrets only
  if (!o.backend.empty()) c.backend = o.backend;
  if (o.subset_k >= 0) c.subset_k = o.subset_k;
  if (o.seed_set) c.seed = o.seed;
  if (!o.mock_mode.empty()) {
    if (o.mock_mode == "oracle") c.mock.mode = MockBehavior::Mode::Oracle;
    else if (o.mock_mode == "biased") c.mock.mode = MockBehavior::Mode::BiasedOracle;
    else if (o.mock_mode == "echo") c.mock.mode = MockBehavior::Mode::Echo;
    else if (o.mock_mode == "fixed") c.mock.mode = MockBehavior::Mode::Fixed;
    else throw CLI::ValidationError("--mock-mode", "unknown mode " + o.mock_mode);
    c.mock.seed = c.seed;
  }
  if (o.p_image_wrong >= 0.0) c.mock.p_image_wrong = o.p_image_wrong;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-modal consistency evaluation toolkit"};
  app.require_subcommand(1);
  CliOptions o;

  app.add_option("--config", o.config_path, "JSON config file")
      ->expected(1);

  auto* gen = app.add_subcommand("gen", "Synthesize a paired dataset");
  gen->add_option("--task", o.task, "table | statemachine")->required();
  gen->add_option("--count", o.count, "number of pairs");
  gen->add_option("--seed", o.seed, "generator seed")
      ->each([&](const std::string&) { o.seed_set = true; });
  gen->add_option("--out", o.out, "output manifest path")->required();

  auto* convert = app.add_subcommand("convert", "Ingest a corpus and render image sides");
  convert->add_option("--in", o.in_file, "source JSONL file")->required();
  convert->add_option("--schema", o.schema,
                      "mes_easy | mes_hard | gsm8k | logicqa | mmlu")
      ->required();
  convert->add_option("--out", o.out, "output manifest path")->required();

  auto* run = app.add_subcommand("run", "Execute a strategy over a manifest");
  run->add_option("--manifest", o.manifest)->required();
  run->add_option("--strategy", o.strategy, "text | image | vdp | both");
  run->add_option("--subset-k", o.subset_k, "subset size (0 = all)");
  run->add_option("--seed", o.seed, "subset/mock seed")
      ->each([&](const std::string&) { o.seed_set = true; });
  run->add_option("--backend", o.backend, "mock | http");
  run->add_option("--mock-mode", o.mock_mode, "oracle | biased | echo | fixed");
  run->add_option("--p-image-wrong", o.p_image_wrong,
                  "biased mock image error probability");
  run->add_option("--out", o.results, "results JSONL path")->required();

  auto* probe = app.add_subcommand("ocr-probe", "Set ocr_ok on image records");
  probe->add_option("--manifest", o.manifest)->required();
  probe->add_option("--results", o.results)->required();
  probe->add_option("--backend", o.backend, "mock | http");

  auto* score = app.add_subcommand("score", "Aggregate results into scores JSON");
  score->add_option("--results", o.results)->required();
  score->add_option("--manifest", o.manifest)->required();
  score->add_option("--out", o.out, "scores JSON path")->required();

  auto* report = app.add_subcommand("report", "Render tables and radar chart");
  report->add_option("--scores", o.scores_files, "scores JSON file(s)")
      ->required()
      ->expected(-1);
  report->add_option("--out", o.out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const RunnerConfig config = effective_config(o);
    if (gen->parsed()) {
      cmd_gen(o.task, o.count, o.seed, o.out, config.style);
      const auto violations = validate_manifest(o.out);
      if (!violations.empty()) {
        for (const auto& v : violations)
          std::fprintf(stderr, "violation %s %s: %s\n", v.code.c_str(),
                       v.pair_id.c_str(), v.detail.c_str());
        return kFatal;
      }
      std::printf("wrote %s (%d pairs)\n", o.out.c_str(), o.count);
      return kOk;
    }
    if (convert->parsed()) {
      const ConvertStats stats =
          cmd_convert(o.in_file, o.schema, o.out, config.style);
      for (const auto& w : stats.warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
      std::printf("wrote %s (%d pairs, %zu skipped)\n", o.out.c_str(),
                  stats.pairs, stats.warnings.size());
      return kOk;
    }
    if (run->parsed()) {
      const RunOutcome outcome =
          cmd_run(o.manifest, run_strategy_from_string(o.strategy), o.results,
                  config);
      std::printf("completed %d, skipped %d, errors %d\n", outcome.completed,
                  outcome.skipped, outcome.errors);
      return outcome.errors > 0 ? kPartial : kOk;
    }
    if (probe->parsed()) {
      const RunOutcome outcome = cmd_ocr_probe(o.manifest, o.results, config);
      std::printf("probed %d, already flagged %d, errors %d\n",
                  outcome.completed, outcome.skipped, outcome.errors);
      return outcome.errors > 0 ? kPartial : kOk;
    }
    if (score->parsed()) {
      const ScoresJson scores = cmd_score(o.results, o.manifest);
      write_file_atomic(o.out, scores.dump(2) + "\n");
      std::printf("wrote %s\n", o.out.c_str());
      return kOk;
    }
    if (report->parsed()) {
      std::vector<ScoresJson> scores;
      for (const auto& f : o.scores_files)
        scores.push_back(ScoresJson::parse(read_file_bytes(f)));
      cmd_report(scores, o.out);
      std::printf("wrote report.md, report.csv%s under %s\n",
                  scores.size() >= 3 ? ", radar.svg" : "", o.out.c_str());
      return kOk;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFatal;
  }
  return kOk;
}
