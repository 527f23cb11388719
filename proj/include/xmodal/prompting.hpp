#pragma once

#include <string>
#include <utility>
#include <vector>

#include "xmodal/core.hpp"
#include "xmodal/modelclient.hpp"

namespace xmodal {

struct ModalityMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyContent : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct VdpDescriptionEmpty : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Named templates with {description} / {instruction} placeholders, loaded
// from templates/vdp.toml (falls back to the built-in copies of the same
// strings when the file is absent).
struct PromptTemplates {
  std::string version;
  std::string describe;          // VDP step 1 text part
  std::string answer_directive;  // VDP step 2 trailing text part
};

PromptTemplates builtin_templates();
PromptTemplates load_templates(const std::string& path);

// Fills {instruction} in the answer directive.
std::string expand_answer_directive(const PromptTemplates& t,
                                    const std::string& instruction);

struct PromptConfig {
  std::string model_id = "default";
  double temperature = 0.0;
  int max_tokens = 1024;
  std::string manifest_dir;  // resolves relative image paths
  PromptTemplates templates = builtin_templates();
};

// Single user message, one TextPart (instruction is already part of the
// content), no ImageParts.
ModelRequest prompt_text(const TaskInstance& instance,
                         const PromptConfig& config);

// Single user message, exactly one ImagePart and zero TextParts; the query
// lives inside the image. Verifies the file's sha256 against the manifest
// before building the request.
ModelRequest prompt_image(const TaskInstance& instance,
                          const PromptConfig& config);

struct VdpStep {
  ModelRequest request;
  ModelResponse response;
};
struct VdpTranscript {
  std::vector<VdpStep> steps;  // always length 2 on success
};

// Two-step strategy: describe the image task in text, then answer given
// description + original image + answer directive. Exactly two client calls.
std::pair<std::string, VdpTranscript> run_vdp(const TaskInstance& instance,
                                              ModelClient& client,
                                              const PromptConfig& config);

}  // namespace xmodal
