#include "xmodal/font5x7.hpp"

namespace xmodal {

namespace {

using Glyph = std::array<std::uint8_t, 7>;

constexpr Glyph kDigits[10] = {
    {0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110},  // 0
    {0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110},  // 1
    {0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111},  // 2
    {0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110},  // 3
    {0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010},  // 4
    {0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110},  // 5
    {0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110},  // 6
    {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000},  // 7
    {0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110},  // 8
    {0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100},  // 9
};

constexpr Glyph kUpper[26] = {
    {0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001},  // A
    {0b11110, 0b10001, 0b10001, 0b11110, 0b10001, 0b10001, 0b11110},  // B
    {0b01110, 0b10001, 0b10000, 0b10000, 0b10000, 0b10001, 0b01110},  // C
    {0b11100, 0b10010, 0b10001, 0b10001, 0b10001, 0b10010, 0b11100},  // D
    {0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111},  // E
    {0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000},  // F
    {0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111},  // G
    {0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001},  // H
    {0b01110, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110},  // I
    {0b00111, 0b00010, 0b00010, 0b00010, 0b00010, 0b10010, 0b01100},  // J
    {0b10001, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010, 0b10001},  // K
    {0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111},  // L
    {0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001},  // M
    {0b10001, 0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001},  // N
    {0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110},  // O
    {0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000},  // P
    {0b01110, 0b10001, 0b10001, 0b10001, 0b10101, 0b10010, 0b01101},  // Q
    {0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001},  // R
    {0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110},  // S
    {0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100},  // T
    {0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110},  // U
    {0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100},  // V
    {0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b10101, 0b01010},  // W
    {0b10001, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001, 0b10001},  // X
    {0b10001, 0b10001, 0b10001, 0b01010, 0b00100, 0b00100, 0b00100},  // Y
    {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b11111},  // Z
};

bool punct_glyph(char c, Glyph& g) {
  switch (c) {
    case ' ': g = {0, 0, 0, 0, 0, 0, 0}; return true;
    case '!': g = {0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0, 0b00100}; return true;
    case '"': g = {0b01010, 0b01010, 0b01010, 0, 0, 0, 0}; return true;
    case '#': g = {0b01010, 0b01010, 0b11111, 0b01010, 0b11111, 0b01010, 0b01010}; return true;
    case '$': g = {0b00100, 0b01111, 0b10100, 0b01110, 0b00101, 0b11110, 0b00100}; return true;
    case '%': g = {0b11000, 0b11001, 0b00010, 0b00100, 0b01000, 0b10011, 0b00011}; return true;
    case '&': g = {0b01100, 0b10010, 0b10100, 0b01000, 0b10101, 0b10010, 0b01101}; return true;
    case '\'': g = {0b00100, 0b00100, 0b01000, 0, 0, 0, 0}; return true;
    case '(': g = {0b00010, 0b00100, 0b01000, 0b01000, 0b01000, 0b00100, 0b00010}; return true;
    case ')': g = {0b01000, 0b00100, 0b00010, 0b00010, 0b00010, 0b00100, 0b01000}; return true;
    case '*': g = {0, 0b00100, 0b10101, 0b01110, 0b10101, 0b00100, 0}; return true;
    case '+': g = {0, 0b00100, 0b00100, 0b11111, 0b00100, 0b00100, 0}; return true;
    case ',': g = {0, 0, 0, 0, 0b00110, 0b00100, 0b01000}; return true;
    case '-': g = {0, 0, 0, 0b11111, 0, 0, 0}; return true;
    case '.': g = {0, 0, 0, 0, 0, 0b01100, 0b01100}; return true;
    case '/': g = {0b00001, 0b00010, 0b00100, 0b00100, 0b00100, 0b01000, 0b10000}; return true;
    case ':': g = {0, 0b01100, 0b01100, 0, 0b01100, 0b01100, 0}; return true;
    case ';': g = {0, 0b01100, 0b01100, 0, 0b01100, 0b00100, 0b01000}; return true;
    case '<': g = {0b00010, 0b00100, 0b01000, 0b10000, 0b01000, 0b00100, 0b00010}; return true;
    case '=': g = {0, 0, 0b11111, 0, 0b11111, 0, 0}; return true;
    case '>': g = {0b01000, 0b00100, 0b00010, 0b00001, 0b00010, 0b00100, 0b01000}; return true;
    case '?': g = {0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0, 0b00100}; return true;
    case '@': g = {0b01110, 0b10001, 0b00001, 0b01101, 0b10101, 0b10101, 0b01110}; return true;
    case '[': g = {0b01110, 0b01000, 0b01000, 0b01000, 0b01000, 0b01000, 0b01110}; return true;
    case '\\': g = {0b10000, 0b01000, 0b00100, 0b00100, 0b00100, 0b00010, 0b00001}; return true;
    case ']': g = {0b01110, 0b00010, 0b00010, 0b00010, 0b00010, 0b00010, 0b01110}; return true;
    case '^': g = {0b00100, 0b01010, 0b10001, 0, 0, 0, 0}; return true;
    case '_': g = {0, 0, 0, 0, 0, 0, 0b11111}; return true;
    case '`': g = {0b01000, 0b00100, 0b00010, 0, 0, 0, 0}; return true;
    case '{': g = {0b00010, 0b00100, 0b00100, 0b01000, 0b00100, 0b00100, 0b00010}; return true;
    case '|': g = {0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100}; return true;
    case '}': g = {0b01000, 0b00100, 0b00100, 0b00010, 0b00100, 0b00100, 0b01000}; return true;
    case '~': g = {0, 0, 0b01000, 0b10101, 0b00010, 0, 0}; return true;
    default: return false;
  }
}

}  // namespace

bool glyph_rows(char32_t cp, std::array<std::uint8_t, 7>& rows) {
  if (cp >= '0' && cp <= '9') {
    rows = kDigits[cp - '0'];
    return true;
  }
  if (cp >= 'A' && cp <= 'Z') {
    rows = kUpper[cp - 'A'];
    return true;
  }
  if (cp >= 'a' && cp <= 'z') {
    rows = kUpper[cp - 'a'];
    return true;
  }
  if (cp < 0x80) {
    Glyph g;
    if (punct_glyph(static_cast<char>(cp), g)) {
      rows = g;
      return true;
    }
  }
  return false;
}

}  // namespace xmodal
