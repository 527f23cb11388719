#include "xmodal/core.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace xmodal {

std::string to_string(Modality m) {
  return m == Modality::Text ? "text" : "image";
}

std::string to_string(AnswerKind k) {
  switch (k) {
    case AnswerKind::Numeric: return "numeric";
    case AnswerKind::MultipleChoice: return "multiple_choice";
    case AnswerKind::FreeText: return "free_text";
  }
  return "free_text";
}

Modality modality_from_string(const std::string& s) {
  if (s == "text") return Modality::Text;
  if (s == "image") return Modality::Image;
  throw std::runtime_error("unknown modality: " + s);
}

AnswerKind answer_kind_from_string(const std::string& s) {
  if (s == "numeric") return AnswerKind::Numeric;
  if (s == "multiple_choice") return AnswerKind::MultipleChoice;
  if (s == "free_text") return AnswerKind::FreeText;
  throw std::runtime_error("unknown answer kind: " + s);
}

const std::vector<std::string>& registered_tasks() {
  static const std::vector<std::string> kTasks = {
      "mes_easy", "mes_hard", "gsm8k",       "logicqa",
      "mmlu",     "table",    "statemachine"};
  return kTasks;
}

bool is_registered_task(const std::string& task_id) {
  const auto& t = registered_tasks();
  return std::find(t.begin(), t.end(), task_id) != t.end();
}

// --- normalization ----------------------------------------------------------

namespace {

std::string clean(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool in_ws = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      in_ws = !out.empty();
      continue;
    }
    if (in_ws) out.push_back(' ');
    in_ws = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  if (!out.empty() && out.back() == '.') out.pop_back();
  // trailing-period strip may expose trailing whitespace again
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

// Scans `s` for decimal number tokens (optional sign, optional 3-digit
// thousands groups, optional fraction), canonicalized: separators removed,
// trailing zeros beyond 3 decimal places dropped.
std::vector<std::string> number_tokens(const std::string& s) {
  std::vector<std::string> out;
  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_digit(s[i]) && !(s[i] == '.' && i + 1 < n && is_digit(s[i + 1]))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    bool negative = false;
    if (start > 0 && (s[start - 1] == '-' || s[start - 1] == '+')) {
      // sign counts only when not glued to a preceding number
      const bool glued = start >= 2 && (is_digit(s[start - 2]) || s[start - 2] == '.');
      if (!glued) negative = s[start - 1] == '-';
    }
    std::string digits;
    while (i < n && is_digit(s[i])) digits.push_back(s[i++]);
    // thousands groups: comma followed by exactly three digits
    while (i + 3 < n && s[i] == ',' && is_digit(s[i + 1]) &&
           is_digit(s[i + 2]) && is_digit(s[i + 3]) &&
           (i + 4 >= n || !is_digit(s[i + 4]))) {
      digits += s.substr(i + 1, 3);
      i += 4;
    }
    std::string frac;
    if (i < n && s[i] == '.' && i + 1 < n && is_digit(s[i + 1])) {
      ++i;
      while (i < n && is_digit(s[i])) frac.push_back(s[i++]);
    }
    if (digits.empty()) digits = "0";
    // trailing zeros beyond 3 decimal places are not canonical
    while (frac.size() > 3 && frac.back() == '0') frac.pop_back();
    std::string tok = (negative ? "-" : "") + digits;
    if (!frac.empty()) tok += "." + frac;
    out.push_back(std::move(tok));
  }
  return out;
}

namespace {

std::string last_number_token(const std::string& s) {
  const auto toks = number_tokens(s);
  return toks.empty() ? "" : toks.back();
}

std::string first_choice_letter(const std::string& s) {
  auto alnum = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c < 'a' || c > 'e') continue;
    const bool left_ok = i == 0 || !alnum(s[i - 1]);
    const bool right_ok = i + 1 == s.size() || !alnum(s[i + 1]);
    if (left_ok && right_ok)
      return std::string(1, static_cast<char>(c - 'a' + 'A'));
  }
  return "";
}

// Color synonyms for the state-machine task; applied to whole cleaned strings.
std::string apply_color_synonyms(const std::string& s) {
  if (s == "grey") return "gray";
  return s;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

std::string normalize_answer(const std::string& raw, AnswerKind kind) {
  const std::string c = clean(raw);
  switch (kind) {
    case AnswerKind::Numeric: return last_number_token(c);
    case AnswerKind::MultipleChoice: return first_choice_letter(c);
    case AnswerKind::FreeText: return apply_color_synonyms(c);
  }
  return "";
}

bool answers_equal(const std::string& a, const std::string& b,
                   AnswerKind kind) {
  if (a.empty() || b.empty()) return false;
  if (kind == AnswerKind::Numeric) {
    double da = 0, db = 0;
    if (parse_double(a, da) && parse_double(b, db))
      return std::abs(da - db) <= 1e-3;
  }
  return a == b;
}

// --- sha256 / file helpers ----------------------------------------------------

std::string sha256_hex(const void* data, std::size_t len) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int dlen = 0;
  EVP_Digest(data, len, digest, &dlen, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(dlen * 2);
  for (unsigned int i = 0; i < dlen; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_hex(const std::string& s) {
  return sha256_hex(s.data(), s.size());
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  fs::rename(tmp, path);
}

// --- manifest ---------------------------------------------------------------

namespace {

ordered_json provenance_to_json(const Provenance& p) {
  ordered_json j;
  switch (p.tag) {
    case Provenance::Tag::Ingested:
      j["type"] = "ingested";
      j["source_name"] = p.source_name;
      j["source_id"] = p.source_id;
      break;
    case Provenance::Tag::Synthesized:
      j["type"] = "synthesized";
      j["generator"] = p.generator;
      j["seed"] = p.seed;
      break;
    case Provenance::Tag::Converted:
      j["type"] = "converted";
      j["from"] = p.from_instance_id;
      j["converter"] = p.converter_name;
      break;
  }
  return j;
}

Provenance provenance_from_json(const ordered_json& j) {
  Provenance p;
  const std::string type = j.at("type").get<std::string>();
  if (type == "ingested") {
    p.tag = Provenance::Tag::Ingested;
    p.source_name = j.at("source_name").get<std::string>();
    p.source_id = j.at("source_id").get<std::string>();
  } else if (type == "synthesized") {
    p.tag = Provenance::Tag::Synthesized;
    p.generator = j.at("generator").get<std::string>();
    p.seed = j.at("seed").get<std::uint64_t>();
  } else if (type == "converted") {
    p.tag = Provenance::Tag::Converted;
    p.from_instance_id = j.at("from").get<std::string>();
    p.converter_name = j.at("converter").get<std::string>();
  } else {
    throw std::runtime_error("unknown provenance type: " + type);
  }
  return p;
}

ordered_json pair_to_json(const PairedInstance& pair) {
  ordered_json j;
  j["pair_id"] = pair.pair_id;
  j["gold"] = {{"kind", to_string(pair.gold.kind)},
               {"value", pair.gold.value}};
  j["text"] = {{"instance_id", pair.text_side.instance_id},
               {"content", pair.text_side.element.text_content.value_or("")}};
  j["image"] = {{"instance_id", pair.image_side.instance_id},
                {"path", pair.image_side.element.image_path.value_or("")},
                {"sha256", pair.image_side.element.sha256}};
  j["query"] = {{"instruction", pair.text_side.query.instruction},
                {"answer_kind", to_string(pair.text_side.query.answer_kind)}};
  j["provenance"] = {{"text", provenance_to_json(pair.text_side.provenance)},
                     {"image", provenance_to_json(pair.image_side.provenance)}};
  return j;
}

PairedInstance pair_from_json(const ordered_json& j,
                              const std::string& task_id) {
  PairedInstance pair;
  pair.pair_id = j.at("pair_id").get<std::string>();
  pair.gold.kind = answer_kind_from_string(
      j.at("gold").at("kind").get<std::string>());
  pair.gold.value = j.at("gold").at("value").get<std::string>();

  Query q;
  q.task_id = task_id;
  q.instruction = j.at("query").at("instruction").get<std::string>();
  q.answer_kind =
      answer_kind_from_string(j.at("query").at("answer_kind").get<std::string>());

  auto& t = pair.text_side;
  t.instance_id = j.at("text").at("instance_id").get<std::string>();
  t.query = q;
  t.element.modality = Modality::Text;
  t.element.text_content = j.at("text").at("content").get<std::string>();
  t.element.sha256 = sha256_hex(*t.element.text_content);
  t.gold = pair.gold;
  t.provenance = provenance_from_json(j.at("provenance").at("text"));

  auto& im = pair.image_side;
  im.instance_id = j.at("image").at("instance_id").get<std::string>();
  im.query = q;
  im.element.modality = Modality::Image;
  im.element.image_path = j.at("image").at("path").get<std::string>();
  im.element.sha256 = j.at("image").at("sha256").get<std::string>();
  im.gold = pair.gold;
  im.provenance = provenance_from_json(j.at("provenance").at("image"));
  return pair;
}

}  // namespace

void write_manifest(const Dataset& ds, const std::string& path) {
  std::string out;
  ordered_json header;
  header["schema_version"] = ds.schema_version;
  header["name"] = ds.name;
  header["task_id"] = ds.task_id;
  out += header.dump();
  out += "\n";
  for (const auto& pair : ds.pairs) {
    out += pair_to_json(pair).dump();
    out += "\n";
  }
  write_file_atomic(path, out);
}

Dataset read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty manifest: " + path);
  const auto header = ordered_json::parse(line);
  Dataset ds;
  ds.schema_version = header.at("schema_version").get<int>();
  ds.name = header.at("name").get<std::string>();
  ds.task_id = header.at("task_id").get<std::string>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ds.pairs.push_back(pair_from_json(ordered_json::parse(line), ds.task_id));
  }
  return ds;
}

std::vector<Violation> validate_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest: " + path);
  std::vector<Violation> out;
  const fs::path base = fs::path(path).parent_path();

  std::string line;
  if (!std::getline(in, line)) {
    out.push_back({"SchemaError", "", "empty manifest"});
    return out;
  }
  std::string task_id;
  try {
    const auto header = ordered_json::parse(line);
    if (header.at("schema_version").get<int>() != 1)
      out.push_back({"SchemaError", "", "unsupported schema_version"});
    task_id = header.at("task_id").get<std::string>();
    if (!is_registered_task(task_id))
      out.push_back({"UnknownTask", "", task_id});
  } catch (const std::exception& e) {
    out.push_back({"SchemaError", "", std::string("header: ") + e.what()});
    return out;
  }

  std::set<std::string> pair_ids;
  std::set<std::string> instance_ids;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception&) {
      out.push_back({"SchemaError", "", "line " + std::to_string(line_no) +
                                            ": invalid JSON"});
      continue;
    }
    std::string pid;
    try {
      pid = j.at("pair_id").get<std::string>();
      const PairedInstance pair = pair_from_json(j, task_id);

      if (!pair_ids.insert(pid).second)
        out.push_back({"DuplicateId", pid, "duplicate pair_id"});
      for (const auto& iid :
           {pair.text_side.instance_id, pair.image_side.instance_id}) {
        if (!instance_ids.insert(iid).second)
          out.push_back({"DuplicateId", pid, "duplicate instance_id " + iid});
      }

      if (normalize_answer(pair.gold.value, pair.gold.kind) != pair.gold.value)
        out.push_back({"GoldNotNormalized", pid, pair.gold.value});

      // A well-formed writer emits one gold per pair; side-level overrides
      // (tolerated on read) must agree with it.
      for (const char* side : {"text", "image"}) {
        if (j.at(side).contains("gold") &&
            j.at(side).at("gold").get<std::string>() != pair.gold.value) {
          out.push_back({"GoldMismatch", pid,
                         std::string(side) + " side gold differs"});
        }
      }

      const fs::path img = base / *pair.image_side.element.image_path;
      if (!fs::exists(img)) {
        out.push_back({"MissingImage", pid, img.string()});
      } else {
        const std::string bytes = read_file_bytes(img.string());
        if (sha256_hex(bytes) != pair.image_side.element.sha256)
          out.push_back({"Sha256Mismatch", pid, img.string()});
      }
    } catch (const std::exception& e) {
      out.push_back({"SchemaError", pid,
                     "line " + std::to_string(line_no) + ": " + e.what()});
    }
  }
  return out;
}

}  // namespace xmodal
