#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xmodal/core.hpp"

namespace xmodal {

struct EmptyInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingOcrFlag : std::runtime_error {
  std::string pair_id;
  explicit MissingOcrFlag(std::string pid)
      : std::runtime_error("missing ocr_ok flag for pair " + pid),
        pair_id(std::move(pid)) {}
};

enum class Strategy { NaiveText, NaiveImage, VDP };
std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct RunRecord {
  std::string pair_id;
  Modality modality = Modality::Text;
  Strategy strategy = Strategy::NaiveText;
  AnswerKind kind = AnswerKind::FreeText;
  std::string raw_answer;
  std::string norm_answer;
  bool correct = false;
  std::optional<bool> ocr_ok;  // image records probed by cmd_ocr_probe only
  std::string request_digest;
  std::string timestamp;  // ISO-8601 UTC
  std::string error;      // non-empty marks an error-record
};

struct PairResult {
  std::string pair_id;
  RunRecord text_record;
  RunRecord image_record;
  bool agree = false;  // normalized-answer equality; empty-vs-empty disagrees
};

PairResult make_pair_result(const RunRecord& text_record,
                            const RunRecord& image_record);

// Fraction correct; error-records count as incorrect.
double accuracy(const std::vector<RunRecord>& records);

// Mean of agreement indicators (the per-task consistency score).
double consistency(const std::vector<PairResult>& pairs);

struct ConditionalConsistency {
  std::optional<double> y_score;  // consistency where ocr_ok = true
  std::optional<double> n_score;  // consistency where ocr_ok = false
  int y_count = 0;
  int n_count = 0;
};

// Partitions by the image record's ocr_ok flag. Throws MissingOcrFlag if any
// image record was never probed.
ConditionalConsistency conditional_consistency(
    const std::vector<PairResult>& pairs);

enum class GapFlag { Drop, Rise, Flat };
std::string to_string(GapFlag f);

// Drop when text beats image by more than 10 points, Rise for the reverse.
// The same rule applied to (VDP acc, naive image acc) yields the
// improvement flag.
GapFlag gap_flag(double text_acc, double image_acc);

}  // namespace xmodal
