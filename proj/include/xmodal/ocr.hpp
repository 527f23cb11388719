#pragma once

#include <string>

#include "xmodal/core.hpp"
#include "xmodal/modelclient.hpp"
#include "xmodal/prompting.hpp"

namespace xmodal {

inline constexpr const char* kOcrProbeInstruction =
    "extract the exact content in the image";

// Asks the model itself to transcribe the image (one-step OCR probe).
std::string ocr_extract(const TaskInstance& instance, ModelClient& client,
                        const PromptConfig& config);

// Lenient on typography, strict on task-relevant tokens: both sides are
// whitespace-collapsed, casefolded and quote/dash-normalized, then the match
// requires normalized edit distance <= 5% of the original's length AND every
// numeric token of the original to appear in the extraction.
bool ocr_match(const std::string& extracted, const std::string& original,
               AnswerKind kind);

// Exposed for tests: the normalization applied by ocr_match and the plain
// Levenshtein distance it uses.
std::string ocr_normalize(const std::string& s);
std::size_t edit_distance(const std::string& a, const std::string& b);

}  // namespace xmodal
