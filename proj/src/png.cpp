#include "xmodal/png.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace xmodal {

void Image::fill_rect(int x, int y, int w, int h, Rgb c) {
  for (int j = y; j < y + h; ++j)
    for (int i = x; i < x + w; ++i) set(i, j, c);
}

void Image::draw_hline(int x0, int x1, int y, Rgb c) {
  if (x0 > x1) std::swap(x0, x1);
  for (int x = x0; x <= x1; ++x) set(x, y, c);
}

void Image::draw_vline(int x, int y0, int y1, Rgb c) {
  if (y0 > y1) std::swap(y0, y1);
  for (int y = y0; y <= y1; ++y) set(x, y, c);
}

void Image::draw_line(int x0, int y0, int x1, int y1, Rgb c) {
  // Bresenham
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    set(x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) { err += dy; x0 += sx; }
    if (e2 <= dx) { err += dx; y0 += sy; }
  }
}

void Image::fill_circle(int cx, int cy, int radius, Rgb c) {
  for (int y = -radius; y <= radius; ++y)
    for (int x = -radius; x <= radius; ++x)
      if (x * x + y * y <= radius * radius) set(cx + x, cy + y, c);
}

void Image::draw_circle(int cx, int cy, int radius, Rgb c) {
  const int r2lo = (radius - 1) * (radius - 1);
  const int r2hi = (radius + 1) * (radius + 1);
  for (int y = -radius - 1; y <= radius + 1; ++y)
    for (int x = -radius - 1; x <= radius + 1; ++x) {
      const int d = x * x + y * y;
      if (d >= r2lo && d <= r2hi) set(cx + x, cy + y, c);
    }
}

void Image::fill_triangle(int x0, int y0, int x1, int y1, int x2, int y2,
                          Rgb c) {
  const int minx = std::min({x0, x1, x2}), maxx = std::max({x0, x1, x2});
  const int miny = std::min({y0, y1, y2}), maxy = std::max({y0, y1, y2});
  auto edge = [](int ax, int ay, int bx, int by, int px, int py) {
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
  };
  const int area = edge(x0, y0, x1, y1, x2, y2);
  if (area == 0) return;
  for (int y = miny; y <= maxy; ++y)
    for (int x = minx; x <= maxx; ++x) {
      const int w0 = edge(x1, y1, x2, y2, x, y);
      const int w1 = edge(x2, y2, x0, y0, x, y);
      const int w2 = edge(x0, y0, x1, y1, x, y);
      const bool all_pos = w0 >= 0 && w1 >= 0 && w2 >= 0;
      const bool all_neg = w0 <= 0 && w1 <= 0 && w2 <= 0;
      if (all_pos || all_neg) set(x, y, c);
    }
}

namespace {

void put_u32_be(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

void put_chunk(std::string& out, const char type[4], const std::string& data) {
  put_u32_be(out, static_cast<std::uint32_t>(data.size()));
  std::string body(type, 4);
  body += data;
  out += body;
  const auto crc =
      crc32(0, reinterpret_cast<const Bytef*>(body.data()),
            static_cast<uInt>(body.size()));
  put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::string Image::encode_png() const {
  // raw scanlines, filter byte 0 per row
  std::string raw;
  raw.reserve(static_cast<std::size_t>(height_) * (1 + 3 * width_));
  for (int y = 0; y < height_; ++y) {
    raw.push_back('\0');
    for (int x = 0; x < width_; ++x) {
      const Rgb p = get(x, y);
      raw.push_back(static_cast<char>(p.r));
      raw.push_back(static_cast<char>(p.g));
      raw.push_back(static_cast<char>(p.b));
    }
  }

  uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
  std::string comp(comp_len, '\0');
  if (compress2(reinterpret_cast<Bytef*>(comp.data()), &comp_len,
                reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw std::runtime_error("png: zlib compression failed");
  comp.resize(comp_len);

  std::string out("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  put_u32_be(ihdr, static_cast<std::uint32_t>(width_));
  put_u32_be(ihdr, static_cast<std::uint32_t>(height_));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type: truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", comp);
  put_chunk(out, "IEND", "");
  return out;
}

}  // namespace xmodal
