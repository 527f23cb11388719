#include "xmodal/render.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "xmodal/font5x7.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace xmodal {

namespace {

constexpr Rgb kBlack{0, 0, 0};
constexpr Rgb kLabelGray{90, 90, 90};

int glyph_scale(const RenderStyle& s) {
  return std::max(2, s.font_size_px / kGlyphHeight);
}
int char_w(const RenderStyle& s) { return (kGlyphWidth + 1) * glyph_scale(s); }
int char_h(const RenderStyle& s) { return kGlyphHeight * glyph_scale(s); }
int line_h(const RenderStyle& s) {
  return static_cast<int>(std::lround(char_h(s) * s.line_spacing));
}

void draw_char(Image& img, int x, int y, char32_t cp, int scale, Rgb color) {
  std::array<std::uint8_t, 7> rows;
  if (!glyph_rows(cp, rows)) throw UnsupportedGlyph(cp);
  for (int r = 0; r < kGlyphHeight; ++r)
    for (int c = 0; c < kGlyphWidth; ++c)
      if (rows[r] & (1 << (kGlyphWidth - 1 - c)))
        img.fill_rect(x + c * scale, y + r * scale, scale, scale, color);
}

void draw_string(Image& img, int x, int y, const std::string& s,
                 const RenderStyle& st, Rgb color) {
  const int scale = glyph_scale(st);
  for (unsigned char c : s) {
    draw_char(img, x, y, c, scale, color);
    x += char_w(st);
  }
}

// Greedy word wrap; explicit newlines respected; overlong words hard-split.
std::vector<std::string> wrap_lines(const std::string& content, int max_cols) {
  std::vector<std::string> out;
  std::istringstream in(content);
  std::string raw;
  while (std::getline(in, raw)) {
    if (raw.empty()) {
      out.emplace_back();
      continue;
    }
    std::string line;
    std::istringstream words(raw);
    std::string word;
    while (words >> word) {
      while (static_cast<int>(word.size()) > max_cols) {
        if (!line.empty()) {
          out.push_back(line);
          line.clear();
        }
        out.push_back(word.substr(0, max_cols));
        word = word.substr(max_cols);
      }
      const int need = static_cast<int>(word.size()) +
                       (line.empty() ? 0 : 1);
      if (static_cast<int>(line.size()) + need > max_cols && !line.empty()) {
        out.push_back(line);
        line.clear();
      }
      if (!line.empty()) line += ' ';
      line += word;
    }
    out.push_back(line);
  }
  if (out.empty()) out.emplace_back();
  return out;
}

// Validates every character up front so glyph errors surface before drawing.
void check_glyphs(const std::string& content) {
  std::array<std::uint8_t, 7> rows;
  for (unsigned char c : content) {
    if (c == '\n') continue;
    if (!glyph_rows(c, rows)) throw UnsupportedGlyph(c);
  }
}

int draw_text_block(Image& img, const std::string& content, int x, int y,
                    const RenderStyle& style, int max_cols) {
  const auto lines = wrap_lines(content, max_cols);
  for (const auto& line : lines) {
    draw_string(img, x, y, line, style, kBlack);
    y += line_h(style);
  }
  return y;
}

}  // namespace

Rgb palette_rgb(const std::string& name) {
  if (name == "Gray") return {128, 128, 128};
  if (name == "Red") return {220, 40, 40};
  if (name == "Green") return {40, 160, 40};
  if (name == "Yellow") return {230, 200, 40};
  if (name == "Blue") return {50, 90, 220};
  if (name == "Pink") return {255, 105, 180};
  if (name == "Purple") return {150, 60, 200};
  if (name == "Orange") return {255, 140, 0};
  if (name == "Brown") return {139, 69, 19};
  if (name == "Black") return {20, 20, 20};
  throw std::runtime_error("unknown palette color: " + name);
}

Rendered render_text(const std::string& content, const RenderStyle& style) {
  if (content.empty()) throw std::runtime_error("render_text: empty content");
  check_glyphs(content);
  const int max_cols =
      std::max(1, (style.max_width_px - 2 * style.margin_px) / char_w(style));
  const auto lines = wrap_lines(content, max_cols);
  const int height =
      2 * style.margin_px + static_cast<int>(lines.size()) * line_h(style);
  Rendered r{Image(style.max_width_px, height), {content}};
  int y = style.margin_px;
  for (const auto& line : lines) {
    draw_string(r.image, style.margin_px, y, line, style, kBlack);
    y += line_h(style);
  }
  return r;
}

Rendered render_table(const TableSpec& spec, const RenderStyle& style,
                      const std::string& question,
                      const std::string& transcript) {
  if (spec.rows < 2 || spec.cols < 2)
    throw InvalidDimensions("render_table: need at least a 2x2 grid");
  check_glyphs(question);

  const int cw = char_w(style);
  const int cell_w = 7 * cw;  // "9.999" plus padding
  const int cell_h = 2 * char_h(style);
  const int max_cols =
      std::max(1, (style.max_width_px - 2 * style.margin_px) / cw);

  const auto qlines = wrap_lines(question, max_cols);
  const int q_height = static_cast<int>(qlines.size()) * line_h(style);
  const int grid_w = spec.cols * cell_w;
  const int grid_h = spec.rows * cell_h;
  const int grid_x = style.margin_px;
  const int grid_y = style.margin_px + q_height + line_h(style);

  const int width = std::max(style.max_width_px, grid_w + 2 * style.margin_px);
  const int height = grid_y + grid_h + style.margin_px;
  Rendered r{Image(width, height), {transcript}};

  int y = style.margin_px;
  for (const auto& line : qlines) {
    draw_string(r.image, style.margin_px, y, line, style, kBlack);
    y += line_h(style);
  }

  for (int i = 0; i <= spec.rows; ++i)
    r.image.draw_hline(grid_x, grid_x + grid_w, grid_y + i * cell_h, kBlack);
  for (int j = 0; j <= spec.cols; ++j)
    r.image.draw_vline(grid_x + j * cell_w, grid_y, grid_y + grid_h, kBlack);

  for (int i = 0; i < spec.rows; ++i)
    for (int j = 0; j < spec.cols; ++j) {
      const std::string text = format_milli(spec.cells_milli[i][j]);
      const int tx = grid_x + j * cell_w + cw;
      const int ty = grid_y + i * cell_h + (cell_h - char_h(style)) / 2;
      draw_string(r.image, tx, ty, text, style, kBlack);
    }
  return r;
}

Rendered render_graph(const StateMachineSpec& spec, const RenderStyle& style,
                      const std::string& question,
                      const std::string& transcript) {
  const int n = static_cast<int>(spec.nodes.size());
  if (n < 3 || n > 10)
    throw InvalidDimensions("render_graph: node count out of range");
  check_glyphs(question);

  const int width = style.max_width_px;
  const int area = std::min(width - 2 * style.margin_px, 560);
  const int cx = width / 2;
  const int cy = style.margin_px + area / 2;
  const double ring = area / 2.0 - 70.0;
  const int node_r = 24;

  const int max_cols =
      std::max(1, (width - 2 * style.margin_px) / char_w(style));
  const auto qlines = wrap_lines(question, max_cols);
  const int text_top = style.margin_px + area + line_h(style);
  const int height = text_top +
                     static_cast<int>(qlines.size()) * line_h(style) +
                     style.margin_px;
  Rendered r{Image(width, height), {transcript}};

  auto node_pos = [&](int i) {
    const double angle = -M_PI / 2 + 2.0 * M_PI * i / n;
    return std::pair<int, int>{
        cx + static_cast<int>(std::lround(ring * std::cos(angle))),
        cy + static_cast<int>(std::lround(ring * std::sin(angle)))};
  };
  auto index_of = [&](const std::string& name) {
    return static_cast<int>(std::find(spec.nodes.begin(), spec.nodes.end(),
                                      name) -
                            spec.nodes.begin());
  };

  // edges first so node disks cover the line ends cleanly
  for (const auto& [from, to] : spec.edges) {
    const auto [x0, y0] = node_pos(index_of(from));
    const auto [x1, y1] = node_pos(index_of(to));
    const double dx = x1 - x0, dy = y1 - y0;
    const double len = std::max(1.0, std::hypot(dx, dy));
    const double ux = dx / len, uy = dy / len;
    const int sx = x0 + static_cast<int>(std::lround(ux * (node_r + 2)));
    const int sy = y0 + static_cast<int>(std::lround(uy * (node_r + 2)));
    const int ex = x1 - static_cast<int>(std::lround(ux * (node_r + 4)));
    const int ey = y1 - static_cast<int>(std::lround(uy * (node_r + 4)));
    r.image.draw_line(sx, sy, ex, ey, kBlack);
    // arrowhead
    const double hx = ex - ux * 10, hy = ey - uy * 10;
    const double px = -uy, py = ux;
    r.image.fill_triangle(ex, ey,
                          static_cast<int>(std::lround(hx + px * 5)),
                          static_cast<int>(std::lround(hy + py * 5)),
                          static_cast<int>(std::lround(hx - px * 5)),
                          static_cast<int>(std::lround(hy - py * 5)), kBlack);
  }

  for (int i = 0; i < n; ++i) {
    const auto [x, y] = node_pos(i);
    r.image.fill_circle(x, y, node_r, palette_rgb(spec.nodes[i]));
    // name beside the node so the task never depends on color perception
    const std::string& name = spec.nodes[i];
    const int lx = x - static_cast<int>(name.size()) * char_w(style) / 2;
    draw_string(r.image, lx, y + node_r + 6, name, style, kLabelGray);
  }

  int y = text_top;
  for (const auto& line : qlines) {
    draw_string(r.image, style.margin_px, y, line, style, kBlack);
    y += line_h(style);
  }
  return r;
}

std::string write_rendered(const Rendered& r, const RenderStyle& style,
                           const std::string& path) {
  const std::string png = r.image.encode_png();
  write_file_atomic(path, png);

  ordered_json meta;
  meta["strings"] = r.strings;
  meta["version"] = kRendererVersion;
  meta["style"] = {{"font_size_px", style.font_size_px},
                   {"max_width_px", style.max_width_px},
                   {"margin_px", style.margin_px},
                   {"line_spacing", style.line_spacing}};
  write_file_atomic(path + ".meta.json", meta.dump() + "\n");
  return sha256_hex(png);
}

std::string mock_ocr(const std::string& image_path) {
  const std::string meta_path = image_path + ".meta.json";
  std::string raw;
  try {
    raw = read_file_bytes(meta_path);
  } catch (const std::exception&) {
    throw MockOcrUnavailable("missing sidecar: " + meta_path);
  }
  try {
    const auto meta = ordered_json::parse(raw);
    std::string out;
    for (const auto& s : meta.at("strings")) {
      if (!out.empty()) out += "\n";
      out += s.get<std::string>();
    }
    return out;
  } catch (const std::exception&) {
    throw MockOcrUnavailable("corrupt sidecar: " + meta_path);
  }
}

namespace {

std::string strip_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() >= suffix.size() &&
      s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
    return s.substr(0, s.size() - suffix.size());
  return s;
}

PairedInstance assemble_pair(const TaskInstance& text_side,
                             const Rendered& rendered,
                             const RenderStyle& style,
                             const std::string& out_dir,
                             const std::string& rel_dir,
                             const std::string& converter) {
  const std::string pair_id = strip_suffix(text_side.instance_id, "-text");
  const std::string file_name = pair_id + ".png";
  fs::create_directories(out_dir);
  const std::string abs_path = (fs::path(out_dir) / file_name).string();
  const std::string sha = write_rendered(rendered, style, abs_path);

  PairedInstance pair;
  pair.pair_id = pair_id;
  pair.gold = text_side.gold;
  pair.text_side = text_side;

  auto& im = pair.image_side;
  im.instance_id = pair_id + "-image";
  im.query = text_side.query;
  im.element.modality = Modality::Image;
  im.element.image_path =
      rel_dir.empty() ? file_name : rel_dir + "/" + file_name;
  im.element.sha256 = sha;
  im.gold = text_side.gold;
  im.provenance.tag = Provenance::Tag::Converted;
  im.provenance.from_instance_id = text_side.instance_id;
  im.provenance.converter_name = converter;
  return pair;
}

TaskInstance synthesized_text_instance(const std::string& task,
                                       const std::string& id,
                                       const std::string& generator,
                                       std::uint64_t seed,
                                       const std::string& instruction,
                                       const std::string& content,
                                       const GoldLabel& gold) {
  TaskInstance inst;
  inst.instance_id = id + "-text";
  inst.query = {task, instruction, gold.kind};
  inst.element.modality = Modality::Text;
  inst.element.text_content = content;
  inst.element.sha256 = sha256_hex(content);
  inst.gold = gold;
  inst.provenance.tag = Provenance::Tag::Synthesized;
  inst.provenance.generator = generator;
  inst.provenance.seed = seed;
  return inst;
}

}  // namespace

PairedInstance convert_pair(const TaskInstance& text_instance,
                            const RenderStyle& style,
                            const std::string& out_dir,
                            const std::string& rel_dir) {
  if (text_instance.element.modality != Modality::Text)
    throw std::runtime_error("convert_pair: instance is not text-modality");
  const Rendered r = render_text(*text_instance.element.text_content, style);
  return assemble_pair(text_instance, r, style, out_dir, rel_dir,
                       "render_text");
}

PairedInstance gen_table(int rows, int cols, std::uint64_t seed,
                         const RenderStyle& style, const std::string& out_dir,
                         const std::string& rel_dir) {
  const TableGen gen = gen_table_spec(rows, cols, seed);
  const std::string id = "table-" + std::to_string(seed);
  const TaskInstance text = synthesized_text_instance(
      "table", id, "gen_table", seed, gen.instruction, gen.text_content,
      gen.gold);
  const Rendered r =
      render_table(gen.spec, style, gen.instruction, gen.text_content);
  return assemble_pair(text, r, style, out_dir, rel_dir, "render_table");
}

PairedInstance gen_state_machine(int num_nodes, int steps, std::uint64_t seed,
                                 const RenderStyle& style,
                                 const std::string& out_dir,
                                 const std::string& rel_dir) {
  const StateMachineGen gen = gen_state_machine_spec(num_nodes, steps, seed);
  const std::string id = "statemachine-" + std::to_string(seed);
  const TaskInstance text = synthesized_text_instance(
      "statemachine", id, "gen_state_machine", seed, gen.instruction,
      gen.text_content, gen.gold);
  const Rendered r =
      render_graph(gen.spec, style, gen.instruction, gen.text_content);
  return assemble_pair(text, r, style, out_dir, rel_dir, "render_graph");
}

}  // namespace xmodal
