#include "xmodal/ocr.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <vector>

namespace xmodal {

std::string ocr_extract(const TaskInstance& instance, ModelClient& client,
                        const PromptConfig& config) {
  if (instance.element.modality != Modality::Image)
    throw ModalityMismatch("ocr_extract expects an image instance");
  ModelRequest probe = prompt_image(instance, config);
  probe.messages[0].parts.push_back(TextPart{kOcrProbeInstruction});
  return client.complete(probe).text;
}

std::string ocr_normalize(const std::string& s) {
  // map typographic quotes/dashes to ASCII before collapsing
  std::string ascii;
  ascii.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const unsigned char c = s[i];
    if (c == 0xe2 && i + 2 < s.size()) {
      const unsigned char b1 = s[i + 1], b2 = s[i + 2];
      if (b1 == 0x80) {
        if (b2 == 0x98 || b2 == 0x99) { ascii += '\''; i += 3; continue; }
        if (b2 == 0x9c || b2 == 0x9d) { ascii += '"'; i += 3; continue; }
        if (b2 == 0x93 || b2 == 0x94) { ascii += '-'; i += 3; continue; }
      }
    }
    ascii += static_cast<char>(c);
    ++i;
  }
  std::string out;
  bool in_ws = false;
  for (unsigned char c : ascii) {
    if (std::isspace(c)) {
      in_ws = !out.empty();
      continue;
    }
    if (in_ws) out.push_back(' ');
    in_ws = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool ocr_match(const std::string& extracted, const std::string& original,
               AnswerKind /*kind*/) {
  const std::string e = ocr_normalize(extracted);
  const std::string o = ocr_normalize(original);
  if (e == o) return true;

  const std::size_t dist = edit_distance(e, o);
  if (static_cast<double>(dist) > 0.05 * static_cast<double>(o.size()))
    return false;

  // every numeric token of the original must survive, with multiplicity
  auto etoks = number_tokens(e);
  for (const auto& tok : number_tokens(o)) {
    auto it = std::find(etoks.begin(), etoks.end(), tok);
    if (it == etoks.end()) return false;
    etoks.erase(it);
  }
  return true;
}

}  // namespace xmodal
