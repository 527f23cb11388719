#pragma once

#include <string>
#include <vector>

#include "xmodal/core.hpp"
#include "xmodal/generators.hpp"
#include "xmodal/png.hpp"

namespace xmodal {

inline constexpr const char* kRendererVersion = "1";

struct UnsupportedGlyph : std::runtime_error {
  char32_t codepoint;
  explicit UnsupportedGlyph(char32_t cp)
      : std::runtime_error("unsupported glyph: codepoint " +
                           std::to_string(static_cast<unsigned>(cp))),
        codepoint(cp) {}
};

struct RenderStyle {
  int font_size_px = 14;    // >= 14; glyphs scale from the 5x7 cell
  int max_width_px = 1024;
  int margin_px = 16;
  double line_spacing = 1.25;
};

// RGB used to fill a palette color's node disk.
Rgb palette_rgb(const std::string& name);

struct Rendered {
  Image image;
  std::vector<std::string> strings;  // drawn/transcribed source text
};

// Word-wrapped monospaced text on white. Pure in (content, style, version).
Rendered render_text(const std::string& content, const RenderStyle& style);

// Bordered grid with the question composited above it. `transcript` is the
// full text-side content, recorded in the sidecar as the image's exact
// textual equivalent.
Rendered render_table(const TableSpec& spec, const RenderStyle& style,
                      const std::string& question,
                      const std::string& transcript);

// Colored nodes on a circle (node i at angle 2*pi*i/N), color names printed
// beside each node, directed arrows, question + options composited below.
Rendered render_graph(const StateMachineSpec& spec, const RenderStyle& style,
                      const std::string& question,
                      const std::string& transcript);

// Writes `<path>` (PNG) and `<path>.meta.json` (sidecar with keys
// {strings, version, style}); both via temp-then-rename. Returns the PNG
// bytes' sha256.
std::string write_rendered(const Rendered& r, const RenderStyle& style,
                           const std::string& path);

// Reads the sidecar next to an image and returns the recorded strings joined
// by newlines. Throws MockOcrUnavailable if the sidecar is missing/broken.
struct MockOcrUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
std::string mock_ocr(const std::string& image_path);

// Text instance -> paired instance; renders the full text content (the query
// is embedded in the image) and writes the PNG + sidecar under out_dir.
// `rel_dir` is the path prefix recorded in the manifest.
PairedInstance convert_pair(const TaskInstance& text_instance,
                            const RenderStyle& style,
                            const std::string& out_dir,
                            const std::string& rel_dir);

// Full generator entry points: synthesize, render the structured image side,
// and assemble the pair. Images land in out_dir, recorded as rel_dir paths.
PairedInstance gen_table(int rows, int cols, std::uint64_t seed,
                         const RenderStyle& style, const std::string& out_dir,
                         const std::string& rel_dir);
PairedInstance gen_state_machine(int num_nodes, int steps, std::uint64_t seed,
                                 const RenderStyle& style,
                                 const std::string& out_dir,
                                 const std::string& rel_dir);

}  // namespace xmodal
