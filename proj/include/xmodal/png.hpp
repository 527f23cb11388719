#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace xmodal {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// 8-bit RGB raster with deterministic PNG encoding.
class Image {
 public:
  Image(int width, int height, Rgb fill = {255, 255, 255})
      : width_(width), height_(height),
        pixels_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }

  Rgb get(int x, int y) const {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }
  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
    pixels_[static_cast<std::size_t>(y) * width_ + x] = c;
  }

  void fill_rect(int x, int y, int w, int h, Rgb c);
  void draw_hline(int x0, int x1, int y, Rgb c);
  void draw_vline(int x, int y0, int y1, Rgb c);
  void draw_line(int x0, int y0, int x1, int y1, Rgb c);
  void fill_circle(int cx, int cy, int radius, Rgb c);
  void draw_circle(int cx, int cy, int radius, Rgb c);
  void fill_triangle(int x0, int y0, int x1, int y1, int x2, int y2, Rgb c);

  // Deterministic encoding: fixed filter (none), fixed zlib level.
  std::string encode_png() const;

 private:
  int width_;
  int height_;
  std::vector<Rgb> pixels_;
};

}  // namespace xmodal
