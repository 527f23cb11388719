#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xmodal {

enum class Modality { Text, Image };
enum class AnswerKind { Numeric, MultipleChoice, FreeText };

std::string to_string(Modality m);
std::string to_string(AnswerKind k);
Modality modality_from_string(const std::string& s);
AnswerKind answer_kind_from_string(const std::string& s);

// The seven registered task ids.
bool is_registered_task(const std::string& task_id);
const std::vector<std::string>& registered_tasks();

struct Query {
  std::string task_id;
  std::string instruction;  // natural-language wrapper, carries the
                            // no-reasoning directive
  AnswerKind answer_kind = AnswerKind::FreeText;
};

struct GoldLabel {
  AnswerKind kind = AnswerKind::FreeText;
  std::string value;  // already normalized: normalize(value, kind) == value
};

struct Provenance {
  enum class Tag { Ingested, Synthesized, Converted };
  Tag tag = Tag::Synthesized;
  // Ingested
  std::string source_name;
  std::string source_id;
  // Synthesized
  std::string generator;
  std::uint64_t seed = 0;
  // Converted
  std::string from_instance_id;
  std::string converter_name;
};

struct DataElement {
  Modality modality = Modality::Text;
  std::optional<std::string> text_content;  // present iff modality == Text
  std::optional<std::string> image_path;    // present iff modality == Image
  std::string sha256;                       // hex digest of the content bytes
};

struct TaskInstance {
  std::string instance_id;
  Query query;
  DataElement element;
  GoldLabel gold;
  Provenance provenance;
};

struct PairedInstance {
  std::string pair_id;
  TaskInstance text_side;
  TaskInstance image_side;
  GoldLabel gold;
};

struct Dataset {
  std::string name;
  std::string task_id;
  int schema_version = 1;
  std::vector<PairedInstance> pairs;
};

// --- answer normalization -------------------------------------------------

// Total function: unextractable content maps to "" (the empty marker).
// Trims/collapses whitespace, casefolds, strips one trailing period, then
// extracts per kind (last number token / first standalone A-E letter /
// cleaned string with the color-synonym table applied).
std::string normalize_answer(const std::string& raw, AnswerKind kind);

// All decimal number tokens of `s`, canonicalized the same way Numeric
// normalization does (thousands separators removed, trailing zeros beyond 3
// decimal places dropped).
std::vector<std::string> number_tokens(const std::string& s);

// Both inputs must already be normalized. The empty marker equals nothing,
// including itself.
bool answers_equal(const std::string& a, const std::string& b, AnswerKind kind);

// --- manifest I/O -----------------------------------------------------------

struct Violation {
  std::string code;     // SchemaError, DuplicateId, GoldMismatch,
                        // GoldNotNormalized, MissingImage, Sha256Mismatch,
                        // UnknownTask
  std::string pair_id;  // empty for header-level problems
  std::string detail;
};

// Writes the JSONL manifest (header line, then one pair per line, fixed key
// order). Image paths are stored relative to the manifest's directory.
void write_manifest(const Dataset& ds, const std::string& path);

// Parses a manifest back into a Dataset. Throws std::runtime_error on
// unreadable files or structurally broken content.
Dataset read_manifest(const std::string& path);

// Returns all violations found in the manifest at `path`; empty means valid.
// Throws std::runtime_error if the file cannot be read.
std::vector<Violation> validate_manifest(const std::string& path);

// --- misc -------------------------------------------------------------------

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);

std::string read_file_bytes(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& bytes);

}  // namespace xmodal
