#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace pgtk {

// One glyph: binary coverage bitmap of size height*width (row-major, 0 or 1)
// plus the pen advance in base-height pixels.
struct Glyph {
    int width = 0;
    int advance = 0;
    std::vector<std::uint8_t> coverage;
};

struct GlyphFont {
    int height = 0;
    std::unordered_map<std::uint32_t, Glyph> glyphs;

    bool has(std::uint32_t codepoint) const { return glyphs.count(codepoint) != 0; }
    const Glyph& glyph(std::uint32_t codepoint) const { return glyphs.at(codepoint); }

    // Throws ConfigError unless height >= 1, every printable ASCII codepoint
    // (0x20..0x7E) is present, and every bitmap is binary with consistent size.
    void validate() const;
};

// Built-in 8x8 monospace font covering printable ASCII. Public-domain bitmaps.
const GlyphFont& default_font();

// PGTF container, all integers little-endian u32:
//   "PGTF" | version=1 | glyph_height | glyph_count
//   per glyph: codepoint | width | advance | ceil(width/8)*height bytes,
//   rows packed MSB-first.
GlyphFont load_font(const std::string& path);
void save_font(const GlyphFont& font, const std::string& path);

}  // namespace pgtk
