#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "xmodal/core.hpp"

namespace xmodal {

struct InvalidDimensions : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownNode : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidSampleSize : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IngestError : std::runtime_error {
  int line_no;
  IngestError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_no(line) {}
};

// --- table understanding ------------------------------------------------------

struct TableSpec {
  int rows = 0;
  int cols = 0;
  // cell values in thousandths, each in [0, 9999] (i.e. 0.000 .. 9.999)
  std::vector<std::vector<int>> cells_milli;
  // two distinct query cells, 1-based
  int r1 = 0, c1 = 0, r2 = 0, c2 = 0;
};

std::string format_milli(int milli);  // 4722 -> "4.722"

struct TableGen {
  TableSpec spec;
  std::string instruction;   // question without the grid
  std::string text_content;  // instruction + LaTeX grid source
  GoldLabel gold;            // Numeric, sum of the two query cells
};

// Deterministic in (rows, cols, seed). 2 <= rows,cols <= 10.
TableGen gen_table_spec(int rows, int cols, std::uint64_t seed);

// The LaTeX grid source emitted into the text side (also reused by the
// re-parse oracle in tests).
std::string table_latex(const TableSpec& spec);

// --- state machine -----------------------------------------------------------

struct StateMachineSpec {
  std::vector<std::string> nodes;  // distinct colors, start included
  std::map<std::string, std::string> edges;  // exactly one successor per node
  std::string start = "Gray";
  int steps = 0;
  // edge emission order for the text side; last target != gold
  std::vector<std::pair<std::string, std::string>> rule_order;
  std::vector<std::string> options;  // nodes minus start, shuffled
};

struct StateMachineGen {
  StateMachineSpec spec;
  std::string instruction;   // question + lettered options, without edges
  std::string text_content;  // edge rules + instruction
  GoldLabel gold;            // FreeText, normalized color name
};

const std::vector<std::string>& color_palette();  // 10 colors, Gray first

// Deterministic in (num_nodes, steps, seed). 3 <= num_nodes <= 10,
// 1 <= steps <= 20. Self-loops are never generated.
StateMachineGen gen_state_machine_spec(int num_nodes, int steps,
                                       std::uint64_t seed);

// Walks the functional graph for exactly `steps` transitions.
std::string simulate_state_machine(
    const std::map<std::string, std::string>& edges, const std::string& start,
    int steps);

// --- ingestion ----------------------------------------------------------------

enum class MathDifficulty { Easy, Hard };
enum class QaSchema { GSM8K, LogicQA, MMLU };

struct IngestResult {
  std::vector<TaskInstance> instances;  // text sides only
  std::vector<std::string> warnings;    // skipped records
};

// JSONL with fields {id, latex_problem, answer}.
IngestResult ingest_math(const std::string& file, MathDifficulty difficulty);

// GSM8K: {id, question, answer} with the final number after "####".
// LogicQA: {id, context, question, options, answer(index)}.
// MMLU: {id, question, choices, answer(index)}.
IngestResult ingest_qa(const std::string& file, QaSchema schema);

// --- subset sampling ------------------------------------------------------------

// Uniform sample of k pairs without replacement, stable by original index.
Dataset sample_subset(const Dataset& dataset, int k, std::uint64_t seed);

}  // namespace xmodal
