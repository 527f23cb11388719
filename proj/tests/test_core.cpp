#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xmodal/core.hpp"
#include "xmodal/rng.hpp"

using namespace xmodal;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("xmodal_core_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Characters drawn from the classes normalization must cope with.
std::string random_string(Rng& rng) {
  static const std::string alphabet =
      "abcdefghijKLMNOP 0123456789.,-$%() \t\n";
  std::string s;
  const int len = static_cast<int>(rng.next_below(24));
  for (int i = 0; i < len; ++i)
    s += alphabet[rng.next_below(alphabet.size())];
  return s;
}

Dataset tiny_dataset(const fs::path& dir) {
  Dataset ds;
  ds.name = "tiny";
  ds.task_id = "mmlu";
  PairedInstance p;
  p.pair_id = "mmlu-m1";
  p.gold = {AnswerKind::MultipleChoice, "C"};

  p.text_side.instance_id = "mmlu-m1-text";
  p.text_side.query = {"mmlu", "Answer with the letter only.",
                       AnswerKind::MultipleChoice};
  p.text_side.gold = p.gold;
  p.text_side.element.modality = Modality::Text;
  p.text_side.element.text_content = "Which lets light in?\n\nA. Door\nB. "
                                     "Wall\nC. Window\nD. Floor";
  p.text_side.element.sha256 = sha256_hex(*p.text_side.element.text_content);
  p.text_side.provenance.tag = Provenance::Tag::Ingested;
  p.text_side.provenance.source_name = "fixture";
  p.text_side.provenance.source_id = "m1";

  const std::string png = "\x89PNG-not-really";
  fs::create_directories(dir / "imgs");
  std::ofstream(dir / "imgs" / "m1.png", std::ios::binary) << png;
  p.image_side.instance_id = "mmlu-m1-image";
  p.image_side.query = p.text_side.query;
  p.image_side.gold = p.gold;
  p.image_side.element.modality = Modality::Image;
  p.image_side.element.image_path = "imgs/m1.png";
  p.image_side.element.sha256 = sha256_hex(png);
  p.image_side.provenance.tag = Provenance::Tag::Converted;
  p.image_side.provenance.from_instance_id = p.text_side.instance_id;
  p.image_side.provenance.converter_name = "render_text";

  ds.pairs.push_back(p);
  return ds;
}

}  // namespace

TEST_CASE("numeric normalization worked examples") {
  CHECK(normalize_answer("The answer is  5.", AnswerKind::Numeric) == "5");
  CHECK(normalize_answer("x = 12.3320", AnswerKind::Numeric) == "12.332");
  CHECK(normalize_answer("14.330", AnswerKind::Numeric) == "14.330");
  CHECK(normalize_answer("1,250 marbles", AnswerKind::Numeric) == "1250");
  CHECK(normalize_answer("-5", AnswerKind::Numeric) == "-5");
  CHECK(normalize_answer("first 3 then 7", AnswerKind::Numeric) == "7");
  CHECK(normalize_answer("no digits here", AnswerKind::Numeric) == "");
  CHECK(normalize_answer("", AnswerKind::Numeric) == "");
}

TEST_CASE("multiple-choice normalization worked examples") {
  CHECK(normalize_answer("c. window", AnswerKind::MultipleChoice) == "C");
  CHECK(normalize_answer("The answer is (B)", AnswerKind::MultipleChoice) ==
        "B");
  CHECK(normalize_answer("A", AnswerKind::MultipleChoice) == "A");
  CHECK(normalize_answer("cat", AnswerKind::MultipleChoice) == "");
  CHECK(normalize_answer("answer: d", AnswerKind::MultipleChoice) == "D");
}

TEST_CASE("free-text normalization worked examples") {
  CHECK(normalize_answer("  Green.  ", AnswerKind::FreeText) == "green");
  CHECK(normalize_answer("grey", AnswerKind::FreeText) == "gray");
  CHECK(normalize_answer("Grey", AnswerKind::FreeText) == "gray");
  CHECK(normalize_answer("a   b\t c", AnswerKind::FreeText) == "a b c");
}

TEST_CASE("normalization is idempotent and total") {
  Rng rng(2024);
  const AnswerKind kinds[] = {AnswerKind::Numeric, AnswerKind::MultipleChoice,
                              AnswerKind::FreeText};
  for (int i = 0; i < 500; ++i) {
    const std::string s = random_string(rng);
    for (AnswerKind k : kinds) {
      const std::string once = normalize_answer(s, k);
      CHECK(normalize_answer(once, k) == once);
    }
  }
}

TEST_CASE("answers_equal: numeric tolerance and the empty marker") {
  CHECK(answers_equal("12.332", "12.3320", AnswerKind::Numeric));
  CHECK(answers_equal("14.330", "14.33", AnswerKind::Numeric));
  CHECK(answers_equal("5", "5.0005", AnswerKind::Numeric));
  CHECK_FALSE(answers_equal("5", "5.002", AnswerKind::Numeric));
  CHECK_FALSE(answers_equal("", "", AnswerKind::Numeric));
  CHECK_FALSE(answers_equal("", "", AnswerKind::FreeText));
  CHECK_FALSE(answers_equal("", "5", AnswerKind::Numeric));
  CHECK(answers_equal("C", "C", AnswerKind::MultipleChoice));
  CHECK_FALSE(answers_equal("C", "B", AnswerKind::MultipleChoice));
}

TEST_CASE("answers_equal is symmetric on random normalized inputs") {
  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    const std::string a = normalize_answer(random_string(rng), AnswerKind::Numeric);
    const std::string b = normalize_answer(random_string(rng), AnswerKind::Numeric);
    CHECK(answers_equal(a, b, AnswerKind::Numeric) ==
          answers_equal(b, a, AnswerKind::Numeric));
  }
}

TEST_CASE("number_tokens canonicalizes every token") {
  const auto toks = number_tokens("cells 1,024 and 3.1400 sum to 1027.14");
  REQUIRE(toks.size() == 3);
  CHECK(toks[0] == "1024");
  CHECK(toks[1] == "3.140");
  CHECK(toks[2] == "1027.14");
}

TEST_CASE("manifest round-trip preserves every field") {
  const fs::path dir = temp_dir("roundtrip");
  const Dataset ds = tiny_dataset(dir);
  const std::string path = (dir / "m.jsonl").string();
  write_manifest(ds, path);
  const Dataset back = read_manifest(path);
  REQUIRE(back.pairs.size() == 1);
  const PairedInstance& a = ds.pairs[0];
  const PairedInstance& b = back.pairs[0];
  CHECK(back.name == ds.name);
  CHECK(back.task_id == ds.task_id);
  CHECK(b.pair_id == a.pair_id);
  CHECK(b.gold.value == a.gold.value);
  CHECK(b.gold.kind == a.gold.kind);
  CHECK(b.text_side.element.text_content == a.text_side.element.text_content);
  CHECK(b.image_side.element.image_path == a.image_side.element.image_path);
  CHECK(b.image_side.element.sha256 == a.image_side.element.sha256);
  CHECK(b.text_side.query.instruction == a.text_side.query.instruction);
  CHECK(b.image_side.provenance.from_instance_id ==
        a.image_side.provenance.from_instance_id);
  // rewriting what we read is byte-identical (serialization is canonical)
  const std::string path2 = (dir / "m2.jsonl").string();
  write_manifest(back, path2);
  CHECK(read_file_bytes(path) == read_file_bytes(path2));
}

TEST_CASE("validate_manifest accepts the round-tripped dataset") {
  const fs::path dir = temp_dir("valid");
  const std::string path = (dir / "m.jsonl").string();
  write_manifest(tiny_dataset(dir), path);
  CHECK(validate_manifest(path).empty());
}

TEST_CASE("validate_manifest flags each violation class") {
  const fs::path dir = temp_dir("violations");
  const std::string path = (dir / "m.jsonl").string();
  write_manifest(tiny_dataset(dir), path);

  auto lines = [&] {
    std::vector<std::string> out;
    std::ifstream in(path);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
  }();
  REQUIRE(lines.size() == 2);

  auto write_lines = [&](const std::vector<std::string>& ls,
                         const std::string& p) {
    std::string body;
    for (const auto& l : ls) body += l + "\n";
    write_file_atomic(p, body);
  };
  auto has_code = [](const std::vector<Violation>& vs, const std::string& c) {
    for (const auto& v : vs)
      if (v.code == c) return true;
    return false;
  };

  SUBCASE("DuplicateId") {
    write_lines({lines[0], lines[1], lines[1]}, path);
    CHECK(has_code(validate_manifest(path), "DuplicateId"));
  }
  SUBCASE("MissingImage") {
    fs::remove(dir / "imgs" / "m1.png");
    CHECK(has_code(validate_manifest(path), "MissingImage"));
  }
  SUBCASE("Sha256Mismatch") {
    std::ofstream(dir / "imgs" / "m1.png", std::ios::binary) << "tampered";
    CHECK(has_code(validate_manifest(path), "Sha256Mismatch"));
  }
  SUBCASE("UnknownTask") {
    auto j = nlohmann::ordered_json::parse(lines[0]);
    j["task_id"] = "sudoku";
    write_lines({j.dump(), lines[1]}, path);
    CHECK(has_code(validate_manifest(path), "UnknownTask"));
  }
  SUBCASE("GoldNotNormalized") {
    auto j = nlohmann::ordered_json::parse(lines[1]);
    j["gold"]["value"] = "c. window";
    write_lines({lines[0], j.dump()}, path);
    CHECK(has_code(validate_manifest(path), "GoldNotNormalized"));
  }
  SUBCASE("GoldMismatch between the two sides") {
    auto j = nlohmann::ordered_json::parse(lines[1]);
    j["text"]["gold"] = "B";  // side-level override used by fixtures
    write_lines({lines[0], j.dump()}, path);
    CHECK(has_code(validate_manifest(path), "GoldMismatch"));
  }
  SUBCASE("SchemaError on a missing key") {
    auto j = nlohmann::ordered_json::parse(lines[1]);
    j.erase("query");
    write_lines({lines[0], j.dump()}, path);
    CHECK(has_code(validate_manifest(path), "SchemaError"));
  }
  SUBCASE("SchemaError on a bad header") {
    write_lines({"{\"schema_version\":2}", lines[1]}, path);
    CHECK(has_code(validate_manifest(path), "SchemaError"));
  }
}

TEST_CASE("seven task ids are registered") {
  const auto& tasks = registered_tasks();
  CHECK(tasks.size() == 7);
  for (const char* t : {"mes_easy", "mes_hard", "gsm8k", "logicqa", "mmlu",
                        "table", "statemachine"})
    CHECK(is_registered_task(t));
  CHECK_FALSE(is_registered_task("sudoku"));
}

TEST_CASE("sha256 matches a known vector") {
  CHECK(sha256_hex(std::string("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("rng is deterministic and shuffle is a permutation") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
  Rng c(99);
  c.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
}
