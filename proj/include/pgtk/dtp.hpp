#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pgtk/font.hpp"
#include "pgtk/image.hpp"

namespace pgtk {

struct DtpConfig {
    std::vector<std::string> texts;
    std::array<double, 3> color{0.0, 0.0, 0.0};
    int size = 16;
    int quantity = 6;
    std::optional<std::array<double, 3>> outline;
    std::uint64_t placement_seed = 0;
    const GlyphFont* font = nullptr;  // null selects default_font()

    void validate() const;
};

struct TextPlacement {
    std::size_t text_index = 0;
    int x = 0;  // top-left anchor
    int y = 0;
    std::array<double, 3> color{0.0, 0.0, 0.0};
    int size = 16;
};

// Advance-sum width of `text` rendered at `size`, unsupported codepoints
// measured as '?'.
int measure_string(const GlyphFont& font, const std::string& text, int size);

// Bullet-chat rows: placement k (1-based) sits at y = k*height/(quantity+1),
// horizontal offsets come from an mt19937_64 stream seeded with placement_seed,
// texts are assigned round-robin.
std::vector<TextPlacement> plan_placements(int height, int width, const DtpConfig& cfg);

// Renders one string. Glyph bitmaps are scaled to `size` pixels tall by
// nearest-neighbor; coverage pixels take the fill color opaquely; when an
// outline color is set, a one-scaled-pixel Chebyshev dilation ring is drawn
// beneath the fill. Unsupported codepoints render as '?' and append a warning.
ImageBuffer draw_string(const ImageBuffer& img, const TextPlacement& placement, const GlyphFont& font,
                        const std::string& text, const std::optional<std::array<double, 3>>& outline,
                        std::vector<std::string>* warnings = nullptr);

ImageBuffer dtp_attack(const ImageBuffer& img, const DtpConfig& cfg,
                       std::vector<std::string>* warnings = nullptr);

}  // namespace pgtk
