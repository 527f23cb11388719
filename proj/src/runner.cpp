#include "xmodal/runner.hpp"

#include "xmodal/rng.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "xmodal/generators.hpp"
#include "xmodal/ocr.hpp"

namespace fs = std::filesystem;

namespace xmodal {

// --- config ------------------------------------------------------------------------

RunnerConfig load_config(const std::string& path) {
  RunnerConfig c;
  const auto j = ScoresJson::parse(read_file_bytes(path));
  if (j.contains("backend")) {
    const auto& b = j.at("backend");
    c.backend = b.value("name", c.backend);
    c.model_id = b.value("model_id", c.model_id);
    c.temperature = b.value("temperature", c.temperature);
    c.max_tokens = b.value("max_tokens", c.max_tokens);
    c.cache_dir = b.value("cache_dir", c.cache_dir);
    c.rpm_limit = b.value("rpm_limit", c.rpm_limit);
    if (b.contains("mock")) {
      const auto& m = b.at("mock");
      const std::string mode = m.value("mode", "oracle");
      if (mode == "oracle") c.mock.mode = MockBehavior::Mode::Oracle;
      else if (mode == "biased_oracle") c.mock.mode = MockBehavior::Mode::BiasedOracle;
      else if (mode == "echo") c.mock.mode = MockBehavior::Mode::Echo;
      else if (mode == "fixed") c.mock.mode = MockBehavior::Mode::Fixed;
      else throw std::runtime_error("unknown mock mode: " + mode);
      c.mock.p_image_wrong = m.value("p_image_wrong", 0.0);
      c.mock.seed = m.value("seed", std::uint64_t{0});
      c.mock.fixed_text = m.value("fixed_text", "");
    }
  }
  if (j.contains("style")) {
    const auto& s = j.at("style");
    c.style.font_size_px = s.value("font_size_px", c.style.font_size_px);
    c.style.max_width_px = s.value("max_width_px", c.style.max_width_px);
    c.style.margin_px = s.value("margin_px", c.style.margin_px);
    c.style.line_spacing = s.value("line_spacing", c.style.line_spacing);
  }
  if (j.contains("run")) {
    const auto& r = j.at("run");
    c.subset_k = r.value("subset_k", c.subset_k);
    c.seed = r.value("seed", c.seed);
    c.max_in_flight = r.value("max_in_flight", c.max_in_flight);
    c.templates_path = r.value("templates_path", c.templates_path);
  }
  return c;
}

std::string config_digest(const RunnerConfig& c) {
  const PromptTemplates t = load_templates(c.templates_path);
  ScoresJson j;
  j["backend"] = c.backend;
  j["model_id"] = c.model_id;
  j["temperature"] = c.temperature;
  j["max_tokens"] = c.max_tokens;
  j["mock"] = {{"mode", static_cast<int>(c.mock.mode)},
               {"p_image_wrong", c.mock.p_image_wrong},
               {"seed", c.mock.seed},
               {"fixed_text", c.mock.fixed_text}};
  j["style"] = {{"font_size_px", c.style.font_size_px},
                {"max_width_px", c.style.max_width_px},
                {"margin_px", c.style.margin_px},
                {"line_spacing", c.style.line_spacing}};
  j["subset_k"] = c.subset_k;
  j["seed"] = c.seed;
  j["template_version"] = t.version;
  return sha256_hex(j.dump()).substr(0, 16);
}

// --- gen / convert -------------------------------------------------------------------

namespace {

std::string images_dir_for(const std::string& manifest_path) {
  fs::path p(manifest_path);
  return p.stem().string() + "_images";
}

}  // namespace

void cmd_gen(const std::string& task, int count, std::uint64_t seed,
             const std::string& out_manifest, const RenderStyle& style) {
  if (task != "table" && task != "statemachine")
    throw NotSynthesizable("task '" + task +
                           "' is ingested, not synthesized; use convert");
  if (count < 1) throw InvalidDimensions("count must be >= 1");

  const fs::path manifest(out_manifest);
  if (manifest.has_parent_path()) fs::create_directories(manifest.parent_path());
  const std::string rel_dir = images_dir_for(out_manifest);
  const std::string out_dir =
      (manifest.has_parent_path() ? manifest.parent_path() / rel_dir
                                  : fs::path(rel_dir))
          .string();

  Dataset ds;
  ds.task_id = task;
  ds.name = task + "-seed" + std::to_string(seed);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t pair_seed = seed + static_cast<std::uint64_t>(i);
    if (task == "table") {
      Rng knobs(pair_seed ^ 0xA5A5A5A5ULL);
      const int rows = 3 + static_cast<int>(knobs.next_below(3));
      const int cols = 3 + static_cast<int>(knobs.next_below(3));
      ds.pairs.push_back(
          gen_table(rows, cols, pair_seed, style, out_dir, rel_dir));
    } else {
      Rng knobs(pair_seed ^ 0x5A5A5A5AULL);
      const int num_nodes = 5 + static_cast<int>(knobs.next_below(3));
      const int steps = 4 + 2 * static_cast<int>(knobs.next_below(3));
      ds.pairs.push_back(gen_state_machine(num_nodes, steps, pair_seed, style,
                                           out_dir, rel_dir));
    }
  }
  write_manifest(ds, out_manifest);
}

ConvertStats cmd_convert(const std::string& in_file, const std::string& schema,
                         const std::string& out_manifest,
                         const RenderStyle& style) {
  IngestResult ingested;
  if (schema == "mes_easy")
    ingested = ingest_math(in_file, MathDifficulty::Easy);
  else if (schema == "mes_hard")
    ingested = ingest_math(in_file, MathDifficulty::Hard);
  else if (schema == "gsm8k")
    ingested = ingest_qa(in_file, QaSchema::GSM8K);
  else if (schema == "logicqa")
    ingested = ingest_qa(in_file, QaSchema::LogicQA);
  else if (schema == "mmlu")
    ingested = ingest_qa(in_file, QaSchema::MMLU);
  else
    throw std::runtime_error("unknown schema: " + schema);

  const fs::path manifest(out_manifest);
  if (manifest.has_parent_path()) fs::create_directories(manifest.parent_path());
  const std::string rel_dir = images_dir_for(out_manifest);
  const std::string out_dir =
      (manifest.has_parent_path() ? manifest.parent_path() / rel_dir
                                  : fs::path(rel_dir))
          .string();

  Dataset ds;
  ds.task_id = schema;
  ds.name = schema + "-" + fs::path(in_file).stem().string();
  for (const auto& inst : ingested.instances)
    ds.pairs.push_back(convert_pair(inst, style, out_dir, rel_dir));
  write_manifest(ds, out_manifest);
  return {static_cast<int>(ds.pairs.size()), ingested.warnings};
}

// --- results records -----------------------------------------------------------------

ScoresJson run_record_to_json(const RunRecord& r) {
  ScoresJson j;
  j["pair_id"] = r.pair_id;
  j["modality"] = to_string(r.modality);
  j["strategy"] = to_string(r.strategy);
  j["kind"] = to_string(r.kind);
  j["raw_answer"] = r.raw_answer;
  j["norm_answer"] = r.norm_answer;
  j["correct"] = r.correct;
  if (r.ocr_ok.has_value()) j["ocr_ok"] = *r.ocr_ok;
  j["request_digest"] = r.request_digest;
  j["timestamp"] = r.timestamp;
  j["error"] = r.error;
  return j;
}

RunRecord run_record_from_json(const ScoresJson& j) {
  RunRecord r;
  r.pair_id = j.at("pair_id").get<std::string>();
  r.modality = modality_from_string(j.at("modality").get<std::string>());
  r.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  r.kind = answer_kind_from_string(j.at("kind").get<std::string>());
  r.raw_answer = j.at("raw_answer").get<std::string>();
  r.norm_answer = j.at("norm_answer").get<std::string>();
  r.correct = j.at("correct").get<bool>();
  if (j.contains("ocr_ok")) r.ocr_ok = j.at("ocr_ok").get<bool>();
  r.request_digest = j.at("request_digest").get<std::string>();
  r.timestamp = j.at("timestamp").get<std::string>();
  r.error = j.value("error", "");
  return r;
}

ResultsFile read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read results: " + path);
  ResultsFile out;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty results file: " + path);
  out.header = ScoresJson::parse(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.records.push_back(run_record_from_json(ScoresJson::parse(line)));
  }
  return out;
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::shared_ptr<Backend> make_backend(const RunnerConfig& config,
                                      const Dataset& dataset,
                                      const std::string& manifest_dir) {
  if (config.backend == "mock") {
    auto mock = std::make_shared<MockBackend>(config.mock);
    mock->register_dataset(dataset, manifest_dir);
    return mock;
  }
  if (config.backend == "http")
    return std::make_shared<HttpBackend>(http_config_from_env());
  throw std::runtime_error("unknown backend: " + config.backend);
}

// --- cmd_run --------------------------------------------------------------------------

RunStrategy run_strategy_from_string(const std::string& s) {
  if (s == "text") return RunStrategy::NaiveText;
  if (s == "image") return RunStrategy::NaiveImage;
  if (s == "vdp") return RunStrategy::VDP;
  if (s == "both") return RunStrategy::Both;
  throw std::runtime_error("unknown strategy: " + s);
}

namespace {

struct PlannedCall {
  const PairedInstance* pair = nullptr;
  Strategy strategy = Strategy::NaiveText;
};

std::string planned_digest(const PlannedCall& call, const PromptConfig& pc,
                           const std::string& backend_name) {
  switch (call.strategy) {
    case Strategy::NaiveText:
      return cache_key(backend_name, prompt_text(call.pair->text_side, pc));
    case Strategy::NaiveImage:
      return cache_key(backend_name, prompt_image(call.pair->image_side, pc));
    case Strategy::VDP: {
      // the VDP record is keyed by its step-1 request so the digest stays
      // recomputable without a model call
      ModelRequest step1;
      step1.model_id = pc.model_id;
      step1.temperature = pc.temperature;
      step1.max_tokens = pc.max_tokens;
      const std::string image_path =
          (fs::path(pc.manifest_dir) / *call.pair->image_side.element.image_path)
              .string();
      step1.messages.push_back(
          {"user",
           {ImagePart{read_file_bytes(image_path)},
            TextPart{pc.templates.describe}}});
      return cache_key(backend_name, step1);
    }
  }
  return "";
}

RunRecord execute_call(const PlannedCall& call, ModelClient& client,
                       const PromptConfig& pc, const std::string& digest) {
  RunRecord rec;
  rec.pair_id = call.pair->pair_id;
  rec.strategy = call.strategy;
  rec.kind = call.pair->gold.kind;
  rec.modality =
      call.strategy == Strategy::NaiveText ? Modality::Text : Modality::Image;
  rec.request_digest = digest;
  rec.timestamp = utc_timestamp();
  try {
    std::string raw;
    switch (call.strategy) {
      case Strategy::NaiveText:
        raw = client.complete(prompt_text(call.pair->text_side, pc)).text;
        break;
      case Strategy::NaiveImage:
        raw = client.complete(prompt_image(call.pair->image_side, pc)).text;
        break;
      case Strategy::VDP:
        raw = run_vdp(call.pair->image_side, client, pc).first;
        break;
    }
    rec.raw_answer = raw;
    rec.norm_answer = normalize_answer(raw, rec.kind);
    rec.correct =
        answers_equal(rec.norm_answer, call.pair->gold.value, rec.kind);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

RunOutcome cmd_run(const std::string& manifest_path, RunStrategy strategy,
                   const std::string& results_path, const RunnerConfig& config,
                   std::shared_ptr<Backend> backend_override,
                   long abort_after_records) {
  const Dataset full = read_manifest(manifest_path);
  const std::string manifest_dir =
      fs::path(manifest_path).parent_path().string();
  const Dataset ds =
      (config.subset_k > 0 &&
       config.subset_k < static_cast<int>(full.pairs.size()))
          ? sample_subset(full, config.subset_k, config.seed)
          : full;

  PromptConfig pc;
  pc.model_id = config.model_id;
  pc.temperature = config.temperature;
  pc.max_tokens = config.max_tokens;
  pc.manifest_dir = manifest_dir;
  pc.templates = load_templates(config.templates_path);

  auto backend = backend_override ? backend_override
                                  : make_backend(config, full, manifest_dir);
  ModelClient client(backend, config.cache_dir, config.rpm_limit);

  std::vector<PlannedCall> plan;
  for (const auto& pair : ds.pairs) {
    if (strategy == RunStrategy::NaiveText || strategy == RunStrategy::Both)
      plan.push_back({&pair, Strategy::NaiveText});
    if (strategy == RunStrategy::NaiveImage || strategy == RunStrategy::Both)
      plan.push_back({&pair, Strategy::NaiveImage});
    if (strategy == RunStrategy::VDP)
      plan.push_back({&pair, Strategy::VDP});
  }

  // resumption: collect digests already on disk
  std::set<std::string> seen;
  const bool fresh = !fs::exists(results_path);
  if (!fresh) {
    for (const auto& rec : read_results(results_path).records)
      seen.insert(rec.request_digest);
  }

  std::ofstream out(results_path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open results: " + results_path);
  if (fresh) {
    ScoresJson header;
    header["run_id"] =
        sha256_hex(sha256_hex(read_file_bytes(manifest_path)) +
                   config_digest(config))
            .substr(0, 16);
    header["seed"] = config.seed;
    header["config_digest"] = config_digest(config);
    header["template_version"] = pc.templates.version;
    out << header.dump() << "\n";
    out.flush();
  }

  RunOutcome outcome;
  const int window = std::max(1, config.max_in_flight);
  std::size_t next = 0;
  while (next < plan.size()) {
    if (abort_after_records > 0 && outcome.completed >= abort_after_records) {
      outcome.aborted = true;
      break;
    }
    const std::size_t batch_end = std::min(plan.size(), next + window);
    std::vector<std::pair<std::string, std::future<RunRecord>>> batch;
    for (std::size_t i = next; i < batch_end; ++i) {
      std::string digest;
      try {
        digest = planned_digest(plan[i], pc, backend->name());
      } catch (const std::exception& e) {
        // request not even buildable (missing/corrupt image); error-record
        digest = sha256_hex(plan[i].pair->pair_id + ":" +
                            to_string(plan[i].strategy));
        if (seen.contains(digest)) {
          ++outcome.skipped;
          continue;
        }
        seen.insert(digest);
        RunRecord rec;
        rec.pair_id = plan[i].pair->pair_id;
        rec.strategy = plan[i].strategy;
        rec.kind = plan[i].pair->gold.kind;
        rec.modality = plan[i].strategy == Strategy::NaiveText
                           ? Modality::Text
                           : Modality::Image;
        rec.request_digest = digest;
        rec.timestamp = utc_timestamp();
        rec.error = e.what();
        out << run_record_to_json(rec).dump() << "\n";
        out.flush();
        ++outcome.completed;
        ++outcome.errors;
        continue;
      }
      if (seen.contains(digest)) {
        ++outcome.skipped;
        continue;
      }
      seen.insert(digest);
      batch.emplace_back(digest,
                         std::async(std::launch::async, execute_call, plan[i],
                                    std::ref(client), std::cref(pc), digest));
    }
    for (auto& [digest, fut] : batch) {
      if (abort_after_records > 0 &&
          outcome.completed >= abort_after_records) {
        fut.wait();
        outcome.aborted = true;
        continue;
      }
      const RunRecord rec = fut.get();
      out << run_record_to_json(rec).dump() << "\n";
      out.flush();
      ++outcome.completed;
      if (!rec.error.empty()) ++outcome.errors;
    }
    next = batch_end;
  }
  return outcome;
}

// --- cmd_ocr_probe -----------------------------------------------------------------------

RunOutcome cmd_ocr_probe(const std::string& manifest_path,
                         const std::string& results_path,
                         const RunnerConfig& config,
                         std::shared_ptr<Backend> backend_override) {
  const Dataset ds = read_manifest(manifest_path);
  const std::string manifest_dir =
      fs::path(manifest_path).parent_path().string();

  PromptConfig pc;
  pc.model_id = config.model_id;
  pc.temperature = config.temperature;
  pc.max_tokens = config.max_tokens;
  pc.manifest_dir = manifest_dir;
  pc.templates = load_templates(config.templates_path);

  auto backend = backend_override ? backend_override
                                  : make_backend(config, ds, manifest_dir);
  ModelClient client(backend, config.cache_dir, config.rpm_limit);

  ResultsFile results = read_results(results_path);
  RunOutcome outcome;
  for (auto& rec : results.records) {
    if (rec.modality != Modality::Image ||
        rec.strategy != Strategy::NaiveImage)
      continue;
    if (rec.ocr_ok.has_value()) {
      ++outcome.skipped;
      continue;
    }
    const auto it =
        std::find_if(ds.pairs.begin(), ds.pairs.end(), [&](const auto& p) {
          return p.pair_id == rec.pair_id;
        });
    if (it == ds.pairs.end()) {
      ++outcome.errors;
      continue;
    }
    try {
      const std::string extracted =
          ocr_extract(it->image_side, client, pc);
      rec.ocr_ok = ocr_match(extracted, *it->text_side.element.text_content,
                             rec.kind);
    } catch (const std::exception&) {
      rec.ocr_ok = false;
    }
    ++outcome.completed;
  }

  std::string bytes = results.header.dump() + "\n";
  for (const auto& rec : results.records)
    bytes += run_record_to_json(rec).dump() + "\n";
  write_file_atomic(results_path, bytes);
  return outcome;
}

// --- cmd_score -------------------------------------------------------------------------

ScoresJson cmd_score(const std::string& results_path,
                     const std::string& manifest_path) {
  const Dataset ds = read_manifest(manifest_path);
  const ResultsFile results = read_results(results_path);

  // latest record per (pair, strategy), iterated in manifest order
  auto find_record = [&](const std::string& pair_id,
                         Strategy s) -> const RunRecord* {
    const RunRecord* found = nullptr;
    for (const auto& rec : results.records)
      if (rec.pair_id == pair_id && rec.strategy == s) found = &rec;
    return found;
  };

  std::vector<RunRecord> text_records, image_records, vdp_records;
  std::vector<PairResult> naive_pairs, vdp_pairs;
  int errors = 0;
  for (const auto& pair : ds.pairs) {
    const RunRecord* t = find_record(pair.pair_id, Strategy::NaiveText);
    const RunRecord* i = find_record(pair.pair_id, Strategy::NaiveImage);
    const RunRecord* v = find_record(pair.pair_id, Strategy::VDP);
    if (t) text_records.push_back(*t);
    if (i) image_records.push_back(*i);
    if (v) vdp_records.push_back(*v);
    if (t && i) naive_pairs.push_back(make_pair_result(*t, *i));
    if (t && v) vdp_pairs.push_back(make_pair_result(*t, *v));
    for (const RunRecord* r : {t, i, v})
      if (r && !r->error.empty()) ++errors;
  }
  if (naive_pairs.empty() && vdp_pairs.empty())
    throw EmptyInput("results cover no complete pair");

  ScoresJson scores;
  scores["run_id"] = results.header.value("run_id", "");
  scores["seed"] = results.header.value("seed", std::uint64_t{0});
  scores["config_digest"] = results.header.value("config_digest", "");
  scores["template_version"] = results.header.value("template_version", "");
  scores["task_id"] = ds.task_id;
  scores["n_pairs"] = naive_pairs.size();

  ScoresJson strategies;
  if (!naive_pairs.empty()) {
    const double ta = accuracy(text_records);
    const double ia = accuracy(image_records);
    strategies["naive"] = {
        {"text_acc", ta},
        {"image_acc", ia},
        {"consistency", consistency(naive_pairs)},
        {"gap_flag", to_string(gap_flag(ta, ia))},
        {"n", naive_pairs.size()},
        {"errors", errors},
    };
  }
  if (!vdp_pairs.empty() && !naive_pairs.empty()) {
    const double va = accuracy(vdp_records);
    const double nia = accuracy(image_records);
    const double nc = consistency(naive_pairs);
    const double vc = consistency(vdp_pairs);
    strategies["vdp"] = {
        {"image_acc", va},
        {"consistency", vc},
        {"acc_flag", to_string(gap_flag(nia, va))},
        {"consistency_flag", to_string(gap_flag(nc, vc))},
        {"n", vdp_pairs.size()},
    };
  }
  scores["strategies"] = strategies;

  const bool any_probed = std::any_of(
      image_records.begin(), image_records.end(),
      [](const RunRecord& r) { return r.ocr_ok.has_value(); });
  if (any_probed) {
    const auto cond = conditional_consistency(naive_pairs);  // throws if partial
    long ok = 0;
    for (const auto& r : image_records) ok += *r.ocr_ok ? 1 : 0;
    ScoresJson ocr;
    ocr["accuracy"] =
        static_cast<double>(ok) / static_cast<double>(image_records.size());
    if (cond.y_score) ocr["y_consistency"] = *cond.y_score;
    if (cond.n_score) ocr["n_consistency"] = *cond.n_score;
    ocr["y_count"] = cond.y_count;
    ocr["n_count"] = cond.n_count;
    scores["ocr"] = ocr;
  }

  scores["notes"] = {
      {"empty_answer_policy",
       "empty outputs never count as agreement, including empty-vs-empty"}};
  return scores;
}

// --- cmd_report -------------------------------------------------------------------------

void cmd_report(const std::vector<ScoresJson>& scores,
                const std::string& out_dir) {
  fs::create_directories(out_dir);
  const ReportTables tables = build_tables(scores);
  write_file_atomic((fs::path(out_dir) / "report.md").string(),
                    tables.markdown);
  write_file_atomic((fs::path(out_dir) / "report.csv").string(), tables.csv);

  std::vector<RadarEntry> entries;
  for (const auto& s : scores) {
    if (!s.contains("strategies") || !s.at("strategies").contains("naive"))
      continue;
    const auto& naive = s.at("strategies").at("naive");
    entries.push_back({s.at("task_id").get<std::string>(),
                       naive.at("text_acc").get<double>(),
                       naive.at("image_acc").get<double>()});
  }
  if (entries.size() >= 3)
    write_file_atomic((fs::path(out_dir) / "radar.svg").string(),
                      radar_svg(entries));
}

}  // namespace xmodal
