#include "xmodal/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace xmodal {

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_full(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string flag_mark(const std::string& flag) {
  if (flag == "drop") return " ⇓";
  if (flag == "rise") return " ⇑";
  return "";
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

bool has(const ScoresJson& j, const char* a, const char* b = nullptr,
         const char* c = nullptr) {
  const ScoresJson* cur = &j;
  for (const char* key : {a, b, c}) {
    if (!key) break;
    if (!cur->contains(key)) return false;
    cur = &cur->at(key);
  }
  return true;
}

}  // namespace

ReportTables build_tables(const std::vector<ScoresJson>& per_task_scores) {
  if (per_task_scores.empty()) throw EmptyInput("no scores to report");

  std::ostringstream md;
  std::ostringstream csv;

  // main table (text acc / image acc with drop flag / consistency)
  md << "## Accuracy and consistency\n\n";
  md << "| Task | Text Acc | Image Acc | Consistency |\n";
  md << "| --- | --- | --- | --- |\n";
  csv << "table,task,text_acc,image_acc,image_flag,consistency\n";
  for (const auto& s : per_task_scores) {
    const auto& naive = s.at("strategies").at("naive");
    const std::string task = s.at("task_id").get<std::string>();
    const double ta = naive.at("text_acc").get<double>();
    const double ia = naive.at("image_acc").get<double>();
    const double ct = naive.at("consistency").get<double>();
    const std::string flag = to_string(gap_flag(ta, ia));
    md << "| " << task << " | " << fmt2(ta) << " | " << fmt2(ia)
       << flag_mark(flag) << " | " << fmt2(ct) << " |\n";
    csv << "main," << csv_quote(task) << "," << fmt_full(ta) << ","
        << fmt_full(ia) << "," << flag << "," << fmt_full(ct) << "\n";
  }

  // OCR accuracy table
  bool any_ocr = false;
  for (const auto& s : per_task_scores)
    if (has(s, "ocr", "accuracy")) any_ocr = true;
  if (any_ocr) {
    md << "\n## OCR probe accuracy\n\n";
    md << "| Task | OCR Accuracy |\n| --- | --- |\n";
    for (const auto& s : per_task_scores) {
      if (!has(s, "ocr", "accuracy")) continue;
      const std::string task = s.at("task_id").get<std::string>();
      const double acc = s.at("ocr").at("accuracy").get<double>();
      md << "| " << task << " | " << fmt2(acc) << " |\n";
      csv << "ocr," << csv_quote(task) << "," << fmt_full(acc) << ",,\n";
    }

    md << "\n## Conditional consistency given OCR result\n\n";
    md << "| Task | YConsistency | NConsistency |\n| --- | --- | --- |\n";
    for (const auto& s : per_task_scores) {
      if (!has(s, "ocr", "accuracy")) continue;
      const std::string task = s.at("task_id").get<std::string>();
      const auto& ocr = s.at("ocr");
      const std::string y = ocr.contains("y_consistency")
                                ? fmt2(ocr.at("y_consistency").get<double>())
                                : "-";
      const std::string n = ocr.contains("n_consistency")
                                ? fmt2(ocr.at("n_consistency").get<double>())
                                : "-";
      md << "| " << task << " | " << y << " | " << n << " |\n";
      csv << "conditional," << csv_quote(task) << ","
          << (ocr.contains("y_consistency")
                  ? fmt_full(ocr.at("y_consistency").get<double>())
                  : "")
          << ","
          << (ocr.contains("n_consistency")
                  ? fmt_full(ocr.at("n_consistency").get<double>())
                  : "")
          << ",\n";
    }
  }

  // VDP table
  bool any_vdp = false;
  for (const auto& s : per_task_scores)
    if (has(s, "strategies", "vdp")) any_vdp = true;
  if (any_vdp) {
    md << "\n## VDP vs naive image prompting\n\n";
    md << "| Task | Text Acc | Naive Image Acc | VDP Acc | Naive Consistency "
          "| VDP Consistency |\n";
    md << "| --- | --- | --- | --- | --- | --- |\n";
    for (const auto& s : per_task_scores) {
      if (!has(s, "strategies", "vdp")) continue;
      const auto& naive = s.at("strategies").at("naive");
      const auto& vdp = s.at("strategies").at("vdp");
      const std::string task = s.at("task_id").get<std::string>();
      const double ta = naive.at("text_acc").get<double>();
      const double nia = naive.at("image_acc").get<double>();
      const double nc = naive.at("consistency").get<double>();
      const double va = vdp.at("image_acc").get<double>();
      const double vc = vdp.at("consistency").get<double>();
      const std::string acc_flag = to_string(gap_flag(nia, va));
      const std::string con_flag = to_string(gap_flag(nc, vc));
      md << "| " << task << " | " << fmt2(ta) << " | " << fmt2(nia) << " | "
         << fmt2(va) << flag_mark(acc_flag) << " | " << fmt2(nc) << " | "
         << fmt2(vc) << flag_mark(con_flag) << " |\n";
      csv << "vdp," << csv_quote(task) << "," << fmt_full(va) << ","
          << acc_flag << "," << fmt_full(vc) << "," << con_flag << "\n";
    }
  }

  // traceability footer
  md << "\nNotes:\n";
  md << "- Two empty model outputs count as a disagreement, never as "
        "consistency.\n";
  for (const auto& s : per_task_scores) {
    if (s.contains("run_id")) {
      md << "- " << s.at("task_id").get<std::string>() << ": run "
         << s.at("run_id").get<std::string>();
      if (s.contains("config_digest"))
        md << ", config " << s.at("config_digest").get<std::string>();
      md << "\n";
    }
  }

  return {md.str(), csv.str()};
}

std::string radar_svg(const std::vector<RadarEntry>& per_task) {
  const int n = static_cast<int>(per_task.size());
  if (n < 3) throw TooFewAxes("radar chart needs at least 3 axes");
  if (n > 12) throw TooFewAxes("radar chart supports at most 12 axes");

  auto vertex = [&](int i, double acc) {
    const double angle = -M_PI / 2 + 2.0 * M_PI * i / n;
    const double r =
        kRadarInnerRadius + acc * (kRadarOuterRadius - kRadarInnerRadius);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f",
                  kRadarCenter + r * std::cos(angle),
                  kRadarCenter + r * std::sin(angle));
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" "
         "height=\"640\" viewBox=\"0 0 600 640\">\n";
  svg << "<rect width=\"600\" height=\"640\" fill=\"#ffffff\"/>\n";

  // reference rings at 0, 0.5 and 1
  for (double level : {0.0, 0.5, 1.0}) {
    svg << "<polygon points=\"";
    for (int i = 0; i < n; ++i) svg << vertex(i, level) << " ";
    svg << "\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
  }
  // axes + labels
  for (int i = 0; i < n; ++i) {
    const double angle = -M_PI / 2 + 2.0 * M_PI * i / n;
    const double lx = kRadarCenter + (kRadarOuterRadius + 18) * std::cos(angle);
    const double ly = kRadarCenter + (kRadarOuterRadius + 18) * std::sin(angle);
    svg << "<line x1=\"" << fmt2(kRadarCenter) << "\" y1=\""
        << fmt2(kRadarCenter) << "\" x2=\""
        << fmt2(kRadarCenter + kRadarOuterRadius * std::cos(angle))
        << "\" y2=\""
        << fmt2(kRadarCenter + kRadarOuterRadius * std::sin(angle))
        << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt2(lx) << "\" y=\"" << fmt2(ly)
        << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#333333\">"
        << per_task[i].task << "</text>\n";
  }

  svg << "<polygon class=\"text-acc\" points=\"";
  for (int i = 0; i < n; ++i) svg << vertex(i, per_task[i].text_acc) << " ";
  svg << "\" fill=\"#1f77b422\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";

  svg << "<polygon class=\"image-acc\" points=\"";
  for (int i = 0; i < n; ++i) svg << vertex(i, per_task[i].image_acc) << " ";
  svg << "\" fill=\"#d6272822\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";

  svg << "<rect x=\"20\" y=\"600\" width=\"14\" height=\"14\" "
         "fill=\"#1f77b4\"/><text x=\"40\" y=\"612\" font-size=\"13\" "
         "fill=\"#333333\">text accuracy</text>\n";
  svg << "<rect x=\"160\" y=\"600\" width=\"14\" height=\"14\" "
         "fill=\"#d62728\"/><text x=\"180\" y=\"612\" font-size=\"13\" "
         "fill=\"#333333\">image accuracy</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace xmodal
