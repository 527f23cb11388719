#include "xmodal/generators.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "xmodal/rng.hpp"

using json = nlohmann::json;

namespace xmodal {

// --- table -------------------------------------------------------------------

std::string format_milli(int milli) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%d.%03d", milli / 1000, milli % 1000);
  return buf;
}

std::string table_latex(const TableSpec& spec) {
  std::ostringstream out;
  out << "\\begin{table}[]\n\\centering\n\\resizebox{\\textwidth}{!}{%\n";
  out << "\\begin{tabular}{|";
  for (int c = 0; c < spec.cols; ++c) out << "l|";
  out << "}\n\\hline\n";
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      if (c) out << " & ";
      out << format_milli(spec.cells_milli[r][c]);
    }
    out << " \\\\\n\\hline\n";
  }
  out << "\\end{tabular}}\n\\end{table}";
  return out.str();
}

TableGen gen_table_spec(int rows, int cols, std::uint64_t seed) {
  if (rows < 2 || rows > 10 || cols < 2 || cols > 10)
    throw InvalidDimensions("table dims must be in [2,10]");
  Rng rng(seed);
  TableGen out;
  out.spec.rows = rows;
  out.spec.cols = cols;
  out.spec.cells_milli.assign(rows, std::vector<int>(cols, 0));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out.spec.cells_milli[r][c] = static_cast<int>(rng.next_below(10000));

  const int total = rows * cols;
  const int q1 = static_cast<int>(rng.next_below(total));
  int q2 = static_cast<int>(rng.next_below(total - 1));
  if (q2 >= q1) ++q2;  // distinct
  out.spec.r1 = q1 / cols + 1;
  out.spec.c1 = q1 % cols + 1;
  out.spec.r2 = q2 / cols + 1;
  out.spec.c2 = q2 % cols + 1;

  const int sum = out.spec.cells_milli[out.spec.r1 - 1][out.spec.c1 - 1] +
                  out.spec.cells_milli[out.spec.r2 - 1][out.spec.c2 - 1];
  char gold[16];
  std::snprintf(gold, sizeof(gold), "%d.%03d", sum / 1000, sum % 1000);
  out.gold = {AnswerKind::Numeric, gold};

  std::ostringstream instr;
  instr << "Give me only the result number, NO EXPLANATIONS AT ALL! "
        << "Given the table, x equals the number in position row "
        << out.spec.r1 << " column " << out.spec.c1
        << " plus the number in position row " << out.spec.r2 << " column "
        << out.spec.c2 << ", what is the value of x?";
  out.instruction = instr.str();
  out.text_content = out.instruction + "\n\n" + table_latex(out.spec);
  return out;
}

// --- state machine -------------------------------------------------------------

const std::vector<std::string>& color_palette() {
  static const std::vector<std::string> kColors = {
      "Gray", "Red",    "Green",  "Yellow", "Blue",
      "Pink", "Purple", "Orange", "Brown",  "Black"};
  return kColors;
}

std::string simulate_state_machine(
    const std::map<std::string, std::string>& edges, const std::string& start,
    int steps) {
  std::string cur = start;
  if (!edges.contains(cur)) throw UnknownNode("unknown start node: " + start);
  for (int i = 0; i < steps; ++i) {
    auto it = edges.find(cur);
    if (it == edges.end()) throw UnknownNode("unknown node: " + cur);
    cur = it->second;
  }
  return cur;
}

StateMachineGen gen_state_machine_spec(int num_nodes, int steps,
                                       std::uint64_t seed) {
  if (num_nodes < 3 || num_nodes > 10 || steps < 1 || steps > 20)
    throw InvalidDimensions("state machine params out of range");
  Rng rng(seed);
  StateMachineGen out;
  auto& spec = out.spec;
  spec.steps = steps;

  // Gray always included as start; the rest drawn from the palette.
  std::vector<std::string> pool(color_palette().begin() + 1,
                                color_palette().end());
  rng.shuffle(pool);
  spec.nodes = {"Gray"};
  spec.nodes.insert(spec.nodes.end(), pool.begin(),
                    pool.begin() + (num_nodes - 1));

  for (int i = 0; i < num_nodes; ++i) {
    // exactly one successor, never a self-loop
    int j = static_cast<int>(rng.next_below(num_nodes - 1));
    if (j >= i) ++j;
    spec.edges[spec.nodes[i]] = spec.nodes[j];
  }

  const std::string gold_color =
      simulate_state_machine(spec.edges, spec.start, steps);
  out.gold = {AnswerKind::FreeText,
              normalize_answer(gold_color, AnswerKind::FreeText)};

  // rule order: shuffled, last target must not reveal the answer
  std::vector<std::pair<std::string, std::string>> rules;
  for (const auto& n : spec.nodes) rules.emplace_back(n, spec.edges.at(n));
  for (int attempt = 0; attempt < 16; ++attempt) {
    rng.shuffle(rules);
    if (rules.back().second != gold_color) break;
  }
  if (rules.back().second == gold_color) {
    for (std::size_t i = 0; i + 1 < rules.size(); ++i) {
      if (rules[i].second != gold_color) {
        std::swap(rules[i], rules.back());
        break;
      }
    }
  }
  spec.rule_order = rules;

  spec.options.assign(spec.nodes.begin() + 1, spec.nodes.end());
  rng.shuffle(spec.options);

  std::ostringstream q;
  q << "Starting from the Gray node, what color node will we achieve after "
    << steps << " steps?\n"
    << "Only return the correct one from the options below without "
       "explanations:";
  for (std::size_t i = 0; i < spec.options.size(); ++i)
    q << "\n" << static_cast<char>('A' + i) << ". " << spec.options[i];
  out.instruction = q.str();

  std::ostringstream text;
  text << "Consider a graph with the following directed edges:\n";
  for (std::size_t i = 0; i < rules.size(); ++i) {
    text << rules[i].first << " leads to " << rules[i].second
         << (i + 1 == rules.size() ? "." : ";") << "\n";
  }
  text << out.instruction;
  out.text_content = text.str();
  return out;
}

// --- ingestion -----------------------------------------------------------------

namespace {

std::string source_name(MathDifficulty d) {
  return d == MathDifficulty::Easy ? "mes_easy" : "mes_hard";
}

std::string source_name(QaSchema s) {
  switch (s) {
    case QaSchema::GSM8K: return "gsm8k";
    case QaSchema::LogicQA: return "logicqa";
    case QaSchema::MMLU: return "mmlu";
  }
  return "";
}

TaskInstance make_text_instance(const std::string& task, const std::string& id,
                                const std::string& instruction,
                                const std::string& content, GoldLabel gold) {
  TaskInstance inst;
  inst.instance_id = task + "-" + id + "-text";
  inst.query = {task, instruction, gold.kind};
  inst.element.modality = Modality::Text;
  inst.element.text_content = content;
  inst.element.sha256 = sha256_hex(content);
  inst.gold = std::move(gold);
  inst.provenance.tag = Provenance::Tag::Ingested;
  inst.provenance.source_name = task;
  inst.provenance.source_id = id;
  return inst;
}

std::string record_id(const json& j, int line_no) {
  if (j.contains("id")) {
    if (j.at("id").is_string()) return j.at("id").get<std::string>();
    return std::to_string(j.at("id").get<long long>());
  }
  return std::to_string(line_no);
}

}  // namespace

IngestResult ingest_math(const std::string& file, MathDifficulty difficulty) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read: " + file);
  const std::string task = source_name(difficulty);
  const std::string instruction = "Give only the answer, no steps.";

  IngestResult out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception&) {
      throw IngestError(line_no, "invalid JSON");
    }
    if (!j.contains("latex_problem"))
      throw IngestError(line_no, "missing latex_problem");
    if (!j.contains("answer") || j.at("answer").get<std::string>().empty()) {
      out.warnings.push_back("line " + std::to_string(line_no) +
                             ": missing answer, skipped");
      continue;
    }
    const std::string answer = j.at("answer").get<std::string>();
    // numeric when the whole answer is a number, else free text
    GoldLabel gold;
    const std::string as_num = normalize_answer(answer, AnswerKind::Numeric);
    const std::string as_text = normalize_answer(answer, AnswerKind::FreeText);
    if (!as_num.empty() && as_num == as_text) {
      gold = {AnswerKind::Numeric, as_num};
    } else {
      gold = {AnswerKind::FreeText, as_text};
    }
    const std::string content =
        instruction + " " + j.at("latex_problem").get<std::string>();
    out.instances.push_back(make_text_instance(task, record_id(j, line_no),
                                               instruction, content, gold));
  }
  return out;
}

IngestResult ingest_qa(const std::string& file, QaSchema schema) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read: " + file);
  const std::string task = source_name(schema);

  IngestResult out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception&) {
      throw IngestError(line_no, "invalid JSON");
    }
    try {
      if (schema == QaSchema::GSM8K) {
        const std::string question = j.at("question").get<std::string>();
        const std::string answer = j.at("answer").get<std::string>();
        const auto pos = answer.rfind("####");
        if (pos == std::string::npos) {
          out.warnings.push_back("line " + std::to_string(line_no) +
                                 ": no #### delimiter, skipped");
          continue;
        }
        const std::string gold_raw = answer.substr(pos + 4);
        const std::string gold = normalize_answer(gold_raw, AnswerKind::Numeric);
        if (gold.empty()) {
          out.warnings.push_back("line " + std::to_string(line_no) +
                                 ": unparseable answer, skipped");
          continue;
        }
        const std::string instruction = "Give only the answer, no steps.";
        out.instances.push_back(make_text_instance(
            task, record_id(j, line_no), instruction,
            instruction + " " + question, {AnswerKind::Numeric, gold}));
      } else {
        const bool logic = schema == QaSchema::LogicQA;
        const std::string instruction =
            logic ? "Give me only a single choice, NO EXPLANATIONS AT ALL! "
                    "Choose only one choice from below."
                  : "Give me only a single letter, NO EXPLANATIONS AT ALL! "
                    "Choose one from below.";
        const std::string question = j.at("question").get<std::string>();
        const auto& options = j.at(logic ? "options" : "choices");
        const int answer_idx = j.at("answer").get<int>();
        if (answer_idx < 0 || answer_idx >= static_cast<int>(options.size()) ||
            answer_idx > 4) {
          out.warnings.push_back("line " + std::to_string(line_no) +
                                 ": answer label out of range, skipped");
          continue;
        }
        std::ostringstream content;
        content << instruction << " " << question;
        if (logic && j.contains("context"))
          content << " Given that " << j.at("context").get<std::string>();
        for (std::size_t i = 0; i < options.size(); ++i) {
          content << "\n\n" << static_cast<char>('A' + i) << ". "
                  << options[i].get<std::string>();
        }
        const std::string gold(1, static_cast<char>('A' + answer_idx));
        out.instances.push_back(make_text_instance(
            task, record_id(j, line_no), instruction, content.str(),
            {AnswerKind::MultipleChoice, gold}));
      }
    } catch (const json::exception& e) {
      throw IngestError(line_no, e.what());
    }
  }
  return out;
}

// --- subset sampling --------------------------------------------------------------

Dataset sample_subset(const Dataset& dataset, int k, std::uint64_t seed) {
  const int n = static_cast<int>(dataset.pairs.size());
  if (k < 1 || k > n)
    throw InvalidSampleSize("k must be in [1, " + std::to_string(n) + "]");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.next_below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  Dataset out;
  out.name = dataset.name;
  out.task_id = dataset.task_id;
  out.schema_version = dataset.schema_version;
  for (int i : idx) out.pairs.push_back(dataset.pairs[i]);
  return out;
}

}  // namespace xmodal
