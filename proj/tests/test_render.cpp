#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <deque>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "xmodal/render.hpp"

using namespace xmodal;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("xmodal_render_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

bool is_black(const Image& img, int x, int y) {
  return img.get(x, y) == Rgb{0, 0, 0};
}

// Number of pixel rows containing a horizontal black run of at least
// `min_len` (grid rules are 1px thick and span the whole grid; glyph strokes
// never get close).
int horizontal_rule_count(const Image& img, int min_len) {
  int count = 0;
  for (int y = 0; y < img.height(); ++y) {
    int run = 0, best = 0;
    for (int x = 0; x < img.width(); ++x) {
      run = is_black(img, x, y) ? run + 1 : 0;
      best = std::max(best, run);
    }
    if (best >= min_len) ++count;
  }
  return count;
}

int vertical_rule_count(const Image& img, int min_len) {
  int count = 0;
  for (int x = 0; x < img.width(); ++x) {
    int run = 0, best = 0;
    for (int y = 0; y < img.height(); ++y) {
      run = is_black(img, x, y) ? run + 1 : 0;
      best = std::max(best, run);
    }
    if (best >= min_len) ++count;
  }
  return count;
}

// 4-connected components of pixels with exactly the given color.
int component_count(const Image& img, Rgb color) {
  std::vector<char> seen(static_cast<std::size_t>(img.width()) * img.height(),
                         0);
  auto idx = [&](int x, int y) {
    return static_cast<std::size_t>(y) * img.width() + x;
  };
  int components = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (seen[idx(x, y)] || !(img.get(x, y) == color)) continue;
      ++components;
      std::deque<std::pair<int, int>> queue{{x, y}};
      seen[idx(x, y)] = 1;
      while (!queue.empty()) {
        auto [px, py] = queue.front();
        queue.pop_front();
        const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
          const int nx = px + dx[d], ny = py + dy[d];
          if (nx < 0 || ny < 0 || nx >= img.width() || ny >= img.height())
            continue;
          if (seen[idx(nx, ny)] || !(img.get(nx, ny) == color)) continue;
          seen[idx(nx, ny)] = 1;
          queue.emplace_back(nx, ny);
        }
      }
    }
  return components;
}

bool black_near(const Image& img, int x, int y, int radius) {
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const int px = x + dx, py = y + dy;
      if (px >= 0 && py >= 0 && px < img.width() && py < img.height() &&
          is_black(img, px, py))
        return true;
    }
  return false;
}

}  // namespace

TEST_CASE("render_text is deterministic and byte-identical across calls") {
  const RenderStyle style;
  const std::string content =
      "Give only the answer, no steps. Solve for x: $2x + 4 = |{-17 + 3}|$";
  const Rendered a = render_text(content, style);
  const Rendered b = render_text(content, style);
  CHECK(a.image.encode_png() == b.image.encode_png());
  CHECK(a.strings == std::vector<std::string>{content});
  // some ink, white background
  CHECK(component_count(a.image, Rgb{0, 0, 0}) > 10);
  CHECK(a.image.get(0, 0) == Rgb{255, 255, 255});
}

TEST_CASE("render_text rejects unsupported glyphs") {
  CHECK_THROWS_AS(render_text("caf\xc3\xa9", RenderStyle{}), UnsupportedGlyph);
  try {
    render_text("ok \x01", RenderStyle{});
    FAIL("expected UnsupportedGlyph");
  } catch (const UnsupportedGlyph& e) {
    CHECK(e.codepoint == 1);
  }
}

TEST_CASE("sidecar transcription round-trips exactly") {
  const fs::path dir = temp_dir("sidecar");
  const RenderStyle style;
  const std::string content = "Pick one:\n\nA. alpha\nB. beta\nC. gamma";
  const Rendered r = render_text(content, style);
  const std::string path = (dir / "x.png").string();
  const std::string sha = write_rendered(r, style, path);
  CHECK(sha == sha256_hex(read_file_bytes(path)));
  CHECK(mock_ocr(path) == content);
  CHECK_THROWS_AS(mock_ocr((dir / "nope.png").string()), MockOcrUnavailable);
  write_file_atomic(path + ".meta.json", "{broken");
  CHECK_THROWS_AS(mock_ocr(path), MockOcrUnavailable);
}

TEST_CASE("table rendering: rule counts and inked cells") {
  const TableGen g = gen_table_spec(3, 3, 42);
  const RenderStyle style;
  const Rendered r = render_table(g.spec, style, g.instruction,
                                  g.text_content);
  const Image& img = r.image;

  // glyphs are 2px-scaled strokes; only grid rules make 100+px runs
  const int scale = 2;
  const int cw = (5 + 1) * scale * 7;  // cell width in px
  const int ch = 7 * scale * 2;        // cell height in px
  const int grid_w = 3 * cw, grid_h = 3 * ch;
  CHECK(horizontal_rule_count(img, grid_w) == 4);
  CHECK(vertical_rule_count(img, grid_h) == 4);

  // locate the grid: topmost full-width rule
  int grid_y = -1;
  for (int y = 0; y < img.height() && grid_y < 0; ++y) {
    int run = 0;
    for (int x = 0; x < img.width(); ++x) {
      run = is_black(img, x, y) ? run + 1 : 0;
      if (run >= grid_w) {
        grid_y = y;
        break;
      }
    }
  }
  REQUIRE(grid_y >= 0);
  const int grid_x = 16;  // margin
  int inked_cells = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      bool inked = false;
      for (int y = grid_y + i * ch + 2; y < grid_y + (i + 1) * ch - 2 && !inked;
           ++y)
        for (int x = grid_x + j * cw + 2; x < grid_x + (j + 1) * cw - 2; ++x)
          if (is_black(img, x, y)) {
            inked = true;
            break;
          }
      if (inked) ++inked_cells;
    }
  CHECK(inked_cells == 9);

  CHECK(r.strings == std::vector<std::string>{g.text_content});
  CHECK(render_table(g.spec, style, g.instruction, g.text_content)
            .image.encode_png() == img.encode_png());
}

TEST_CASE("graph rendering: one disk per node, edges drawn, labels gray") {
  StateMachineSpec spec;
  spec.nodes = {"Gray", "Blue", "Red", "Yellow", "Green", "Pink"};
  spec.edges = {{"Gray", "Blue"},   {"Blue", "Red"},  {"Red", "Yellow"},
                {"Yellow", "Green"}, {"Green", "Pink"}, {"Pink", "Blue"}};
  spec.start = "Gray";
  spec.steps = 4;
  const RenderStyle style;
  const Rendered r = render_graph(spec, style, "Where do you end up?",
                                  "transcript");
  const Image& img = r.image;

  // exactly one component of each node's fill color
  for (const auto& name : spec.nodes)
    CHECK(component_count(img, palette_rgb(name)) == 1);
  // labels use the dedicated gray, distinct from any fill
  CHECK(component_count(img, Rgb{90, 90, 90}) > 4);

  // replicate the circle layout to probe each edge's path for ink
  const int n = 6, width = style.max_width_px;
  const int area = std::min(width - 2 * style.margin_px, 560);
  const int cx = width / 2, cy = style.margin_px + area / 2;
  const double ring = area / 2.0 - 70.0;
  const int node_r = 24;
  auto pos = [&](const std::string& name) {
    const int i = static_cast<int>(
        std::find(spec.nodes.begin(), spec.nodes.end(), name) -
        spec.nodes.begin());
    const double angle = -M_PI / 2 + 2.0 * M_PI * i / n;
    return std::pair<double, double>{cx + ring * std::cos(angle),
                                     cy + ring * std::sin(angle)};
  };
  for (const auto& [from, to] : spec.edges) {
    const auto [x0, y0] = pos(from);
    const auto [x1, y1] = pos(to);
    bool found = false;
    for (double t = 0.15; t <= 0.86 && !found; t += 0.05) {
      const double x = x0 + (x1 - x0) * t, y = y0 + (y1 - y0) * t;
      bool clear = true;  // skip probes hidden under a node disk
      for (const auto& name : spec.nodes) {
        const auto [nx, ny] = pos(name);
        if (std::hypot(x - nx, y - ny) < node_r + 8) clear = false;
      }
      if (clear && black_near(img, static_cast<int>(std::lround(x)),
                              static_cast<int>(std::lround(y)), 3))
        found = true;
    }
    CHECK(found);
  }

  CHECK(render_graph(spec, style, "Where do you end up?", "transcript")
            .image.encode_png() == img.encode_png());
}

TEST_CASE("convert_pair embeds the query and transcribes exactly") {
  const fs::path dir = temp_dir("convert");
  TaskInstance t;
  t.instance_id = "mmlu-m1-text";
  t.query = {"mmlu", "Answer with the letter only.",
             AnswerKind::MultipleChoice};
  t.gold = {AnswerKind::MultipleChoice, "C"};
  t.element.modality = Modality::Text;
  t.element.text_content =
      "Answer with the letter only. Which of the following lets light into a "
      "room?\n\nA. Door\nB. Wall\nC. Window\nD. Floor";
  t.element.sha256 = sha256_hex(*t.element.text_content);
  t.provenance.tag = Provenance::Tag::Ingested;

  const RenderStyle style;
  const PairedInstance p =
      convert_pair(t, style, (dir / "imgs").string(), "imgs");
  CHECK(p.pair_id == "mmlu-m1");
  CHECK(p.image_side.instance_id == "mmlu-m1-image");
  CHECK(p.image_side.element.image_path == "imgs/mmlu-m1.png");
  const std::string abs = (dir / "imgs" / "mmlu-m1.png").string();
  CHECK(p.image_side.element.sha256 == sha256_hex(read_file_bytes(abs)));
  CHECK(mock_ocr(abs) == *t.element.text_content);
  CHECK(p.image_side.provenance.tag == Provenance::Tag::Converted);
  CHECK(p.image_side.provenance.from_instance_id == t.instance_id);
}

TEST_CASE("generator entry points render reproducibly") {
  const fs::path dir1 = temp_dir("gen1"), dir2 = temp_dir("gen2");
  const RenderStyle style;
  const PairedInstance a =
      gen_table(4, 4, 5, style, dir1.string(), "imgs");
  const PairedInstance b =
      gen_table(4, 4, 5, style, dir2.string(), "imgs");
  CHECK(a.image_side.element.sha256 == b.image_side.element.sha256);
  CHECK(a.pair_id == "table-5");
  CHECK(mock_ocr((dir1 / "table-5.png").string()) ==
        *a.text_side.element.text_content);

  const PairedInstance s =
      gen_state_machine(6, 4, 5, style, dir1.string(), "imgs");
  CHECK(s.pair_id == "statemachine-5");
  CHECK(mock_ocr((dir1 / "statemachine-5.png").string()) ==
        *s.text_side.element.text_content);
  CHECK(s.gold.kind == AnswerKind::FreeText);
}
