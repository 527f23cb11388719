#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "xmodal/core.hpp"
#include "xmodal/metrics.hpp"
#include "xmodal/modelclient.hpp"
#include "xmodal/prompting.hpp"
#include "xmodal/render.hpp"
#include "xmodal/report.hpp"

namespace xmodal {

struct NotSynthesizable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunnerConfig {
  // backend
  std::string backend = "mock";  // "mock" | "http"
  std::string model_id = "default";
  double temperature = 0.0;
  int max_tokens = 1024;
  std::string cache_dir;
  int rpm_limit = 0;
  MockBehavior mock;
  // style
  RenderStyle style;
  // run
  int subset_k = 0;  // 0 = whole manifest
  std::uint64_t seed = 0;
  int max_in_flight = 4;
  std::string templates_path = "templates/vdp.toml";
};

// JSON config with sections {backend, style, run}; missing keys keep
// defaults. CLI flags override the loaded values (handled by the CLI).
RunnerConfig load_config(const std::string& path);

// Digest over everything that can change answers: backend identity, decoding
// parameters, mock behavior, subset/seed, style and template version.
std::string config_digest(const RunnerConfig& config);

// --- commands -------------------------------------------------------------------

// task must be "table" or "statemachine"; writes manifest + images +
// sidecars; the result passes validate_manifest.
void cmd_gen(const std::string& task, int count, std::uint64_t seed,
             const std::string& out_manifest, const RenderStyle& style);

struct ConvertStats {
  int pairs = 0;
  std::vector<std::string> warnings;
};

// schema is one of mes_easy, mes_hard, gsm8k, logicqa, mmlu.
ConvertStats cmd_convert(const std::string& in_file, const std::string& schema,
                         const std::string& out_manifest,
                         const RenderStyle& style);

enum class RunStrategy { NaiveText, NaiveImage, VDP, Both };
RunStrategy run_strategy_from_string(const std::string& s);

struct RunOutcome {
  int completed = 0;
  int skipped = 0;  // request digests already present (resumption)
  int errors = 0;   // error-records appended
  bool aborted = false;
};

// Appends RunRecords to `results_path` (header line first if the file is
// new); already-present request digests are skipped, so an interrupted run
// can simply be re-invoked. `backend_override` substitutes the configured
// backend (tests use an instrumented mock). `abort_after_records` > 0 stops
// the run after that many appends, simulating a mid-flight kill.
RunOutcome cmd_run(const std::string& manifest_path, RunStrategy strategy,
                   const std::string& results_path, const RunnerConfig& config,
                   std::shared_ptr<Backend> backend_override = nullptr,
                   long abort_after_records = 0);

// Sets ocr_ok on every naive-image record via the model-mediated OCR probe;
// idempotent (already-flagged records are untouched).
RunOutcome cmd_ocr_probe(const std::string& manifest_path,
                         const std::string& results_path,
                         const RunnerConfig& config,
                         std::shared_ptr<Backend> backend_override = nullptr);

// Aggregates one results file into the per-task scores document.
ScoresJson cmd_score(const std::string& results_path,
                     const std::string& manifest_path);

// Renders scores documents into report.md, report.csv and radar.svg under
// out_dir.
void cmd_report(const std::vector<ScoresJson>& scores,
                const std::string& out_dir);

// --- results file helpers (exposed for tests) --------------------------------------

ScoresJson run_record_to_json(const RunRecord& r);
RunRecord run_record_from_json(const ScoresJson& j);

struct ResultsFile {
  ScoresJson header;
  std::vector<RunRecord> records;
};
ResultsFile read_results(const std::string& path);

// Backend factory honoring config (mock behavior / env-configured HTTP) and
// registering the dataset with mock backends.
std::shared_ptr<Backend> make_backend(const RunnerConfig& config,
                                      const Dataset& dataset,
                                      const std::string& manifest_dir);

}  // namespace xmodal
