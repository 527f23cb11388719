#include "xmodal/prompting.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace xmodal {

namespace {

constexpr const char* kBuiltinVersion = "1";
constexpr const char* kBuiltinDescribe =
    "Extract and articulate a complete textual description of the task shown "
    "in this image. Preserve every number, symbol, and option exactly. Do not "
    "answer the task.";
constexpr const char* kBuiltinAnswer = "{instruction}";

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

PromptTemplates builtin_templates() {
  return {kBuiltinVersion, kBuiltinDescribe, kBuiltinAnswer};
}

// Format: `version = "..."` at top level; `[describe]` / `[answer]` section
// headers followed by the template body up to the next header.
PromptTemplates load_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) return builtin_templates();
  PromptTemplates t = builtin_templates();
  std::string line, section, body;
  auto flush = [&] {
    const std::string value = trim(body);
    if (section == "describe") t.describe = value;
    if (section == "answer") t.answer_directive = value;
    body.clear();
  };
  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (stripped.rfind("version", 0) == 0 && section.empty()) {
      const auto q1 = stripped.find('"');
      const auto q2 = stripped.rfind('"');
      if (q1 != std::string::npos && q2 > q1)
        t.version = stripped.substr(q1 + 1, q2 - q1 - 1);
      continue;
    }
    if (!stripped.empty() && stripped.front() == '[' && stripped.back() == ']') {
      flush();
      section = stripped.substr(1, stripped.size() - 2);
      continue;
    }
    if (!section.empty()) body += line + "\n";
  }
  flush();
  return t;
}

std::string expand_answer_directive(const PromptTemplates& t,
                                    const std::string& instruction) {
  std::string out = t.answer_directive;
  const std::string ph = "{instruction}";
  const auto pos = out.find(ph);
  if (pos != std::string::npos) out.replace(pos, ph.size(), instruction);
  return out;
}

namespace {

ModelRequest base_request(const PromptConfig& config) {
  ModelRequest r;
  r.model_id = config.model_id;
  r.temperature = config.temperature;
  r.max_tokens = config.max_tokens;
  return r;
}

std::string load_verified_image(const TaskInstance& instance,
                                const PromptConfig& config) {
  const std::string path =
      (fs::path(config.manifest_dir) / *instance.element.image_path).string();
  const std::string bytes = read_file_bytes(path);
  if (sha256_hex(bytes) != instance.element.sha256)
    throw std::runtime_error("image bytes do not match manifest sha256: " +
                             path);
  return bytes;
}

}  // namespace

ModelRequest prompt_text(const TaskInstance& instance,
                         const PromptConfig& config) {
  if (instance.element.modality != Modality::Text)
    throw ModalityMismatch("prompt_text expects a text instance");
  const std::string& content = *instance.element.text_content;
  if (content.empty()) throw EmptyContent("text instance has empty content");
  ModelRequest r = base_request(config);
  r.messages.push_back({"user", {TextPart{content}}});
  return r;
}

ModelRequest prompt_image(const TaskInstance& instance,
                          const PromptConfig& config) {
  if (instance.element.modality != Modality::Image)
    throw ModalityMismatch("prompt_image expects an image instance");
  ModelRequest r = base_request(config);
  r.messages.push_back(
      {"user", {ImagePart{load_verified_image(instance, config)}}});
  return r;
}

std::pair<std::string, VdpTranscript> run_vdp(const TaskInstance& instance,
                                              ModelClient& client,
                                              const PromptConfig& config) {
  if (instance.element.modality != Modality::Image)
    throw ModalityMismatch("run_vdp expects an image instance");
  const std::string image = load_verified_image(instance, config);

  VdpTranscript transcript;

  ModelRequest step1 = base_request(config);
  step1.messages.push_back(
      {"user", {ImagePart{image}, TextPart{config.templates.describe}}});
  const ModelResponse r1 = client.complete(step1);
  transcript.steps.push_back({step1, r1});
  if (trim(r1.text).empty())
    throw VdpDescriptionEmpty("VDP step 1 returned an empty description");

  ModelRequest step2 = base_request(config);
  step2.messages.push_back(
      {"user",
       {TextPart{r1.text}, ImagePart{image},
        TextPart{expand_answer_directive(config.templates,
                                         instance.query.instruction)}}});
  const ModelResponse r2 = client.complete(step2);
  transcript.steps.push_back({step2, r2});
  return {r2.text, transcript};
}

}  // namespace xmodal
