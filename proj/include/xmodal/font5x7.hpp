#pragma once

#include <array>
#include <cstdint>

namespace xmodal {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;

// Returns the 7 row bitmasks (bit 4 = leftmost column) for a printable ASCII
// codepoint. Lowercase letters share the uppercase shapes. Returns false for
// anything outside the supported set.
bool glyph_rows(char32_t codepoint, std::array<std::uint8_t, 7>& rows);

}  // namespace xmodal
