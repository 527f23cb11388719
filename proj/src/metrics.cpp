#include "xmodal/metrics.hpp"

namespace xmodal {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::NaiveText: return "naive_text";
    case Strategy::NaiveImage: return "naive_image";
    case Strategy::VDP: return "vdp";
  }
  return "naive_text";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "naive_text") return Strategy::NaiveText;
  if (s == "naive_image") return Strategy::NaiveImage;
  if (s == "vdp") return Strategy::VDP;
  throw std::runtime_error("unknown strategy: " + s);
}

PairResult make_pair_result(const RunRecord& text_record,
                            const RunRecord& image_record) {
  PairResult pr;
  pr.pair_id = text_record.pair_id;
  pr.text_record = text_record;
  pr.image_record = image_record;
  // answers_equal already treats the empty marker as equal to nothing, which
  // covers the empty-vs-empty-disagrees policy; error-records carry empty
  // normalized answers and therefore also disagree.
  pr.agree = answers_equal(text_record.norm_answer, image_record.norm_answer,
                           text_record.kind);
  return pr;
}

double accuracy(const std::vector<RunRecord>& records) {
  if (records.empty()) throw EmptyInput("accuracy of zero records");
  long correct = 0;
  for (const auto& r : records) correct += (r.error.empty() && r.correct) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double consistency(const std::vector<PairResult>& pairs) {
  if (pairs.empty()) throw EmptyInput("consistency of zero pairs");
  long agree = 0;
  for (const auto& p : pairs) agree += p.agree ? 1 : 0;
  return static_cast<double>(agree) / static_cast<double>(pairs.size());
}

ConditionalConsistency conditional_consistency(
    const std::vector<PairResult>& pairs) {
  std::vector<PairResult> yes, no;
  for (const auto& p : pairs) {
    if (!p.image_record.ocr_ok.has_value()) throw MissingOcrFlag(p.pair_id);
    (*p.image_record.ocr_ok ? yes : no).push_back(p);
  }
  ConditionalConsistency out;
  out.y_count = static_cast<int>(yes.size());
  out.n_count = static_cast<int>(no.size());
  if (!yes.empty()) out.y_score = consistency(yes);
  if (!no.empty()) out.n_score = consistency(no);
  return out;
}

std::string to_string(GapFlag f) {
  switch (f) {
    case GapFlag::Drop: return "drop";
    case GapFlag::Rise: return "rise";
    case GapFlag::Flat: return "flat";
  }
  return "flat";
}

GapFlag gap_flag(double text_acc, double image_acc) {
  constexpr double kThreshold = 0.10;
  constexpr double kEps = 1e-9;  // keep exact-0.10 gaps Flat under fp noise
  if (text_acc - image_acc > kThreshold + kEps) return GapFlag::Drop;
  if (image_acc - text_acc > kThreshold + kEps) return GapFlag::Rise;
  return GapFlag::Flat;
}

}  // namespace xmodal
