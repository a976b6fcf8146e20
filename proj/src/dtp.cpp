#include "pgtk/dtp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pgtk/errors.hpp"
#include "pgtk/rng.hpp"

namespace pgtk {

namespace {

constexpr std::uint32_t kFallbackGlyph = '?';

void check_rgb(const std::array<double, 3>& rgb, const char* what) {
    for (double v : rgb)
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("dtp: ") + what + " component outside [0,1]");
}

int scaled_len(int base_len, int size, int font_height) {
    // Number of destination pixels whose floor-mapped source lies inside base_len.
    return (base_len * size + font_height - 1) / font_height;
}

int scaled_advance(const Glyph& g, int size, int font_height) {
    const double s = static_cast<double>(size) / font_height;
    return std::max(1, static_cast<int>(std::lround(g.advance * s)));
}

const Glyph& resolve_glyph(const GlyphFont& font, std::uint32_t cp, std::vector<std::string>* warnings) {
    if (font.has(cp)) return font.glyph(cp);
    if (warnings)
        warnings->push_back("unsupported codepoint " + std::to_string(cp) + ", substituting '?'");
    if (!font.has(kFallbackGlyph)) throw ConfigError("dtp: font lacks the '?' fallback glyph");
    return font.glyph(kFallbackGlyph);
}

}  // namespace

void DtpConfig::validate() const {
    if (quantity < 0) throw ConfigError("dtp: quantity must be >= 0");
    if (size < 4) throw ConfigError("dtp: glyph size must be >= 4");
    if (quantity > 0 && texts.empty()) throw ConfigError("dtp: texts must be non-empty when quantity > 0");
    check_rgb(color, "fill color");
    if (outline) check_rgb(*outline, "outline color");
}

int measure_string(const GlyphFont& font, const std::string& text, int size) {
    if (font.height < 1) throw ConfigError("dtp: font has no height");
    int w = 0;
    for (unsigned char c : text) w += scaled_advance(resolve_glyph(font, c, nullptr), size, font.height);
    return w;
}

std::vector<TextPlacement> plan_placements(int height, int width, const DtpConfig& cfg) {
    cfg.validate();
    if (height < 1 || width < 1) throw DimensionError("plan_placements: empty image");

    const GlyphFont& font = cfg.font ? *cfg.font : default_font();
    std::mt19937_64 gen(cfg.placement_seed);
    std::vector<TextPlacement> out;
    out.reserve(static_cast<std::size_t>(cfg.quantity));
    for (int k = 1; k <= cfg.quantity; ++k) {
        TextPlacement p;
        p.text_index = static_cast<std::size_t>(k - 1) % cfg.texts.size();
        p.y = static_cast<int>(static_cast<std::int64_t>(k) * height / (cfg.quantity + 1));
        const int text_w = measure_string(font, cfg.texts[p.text_index], cfg.size);
        const int span = std::clamp(width - text_w + 1, 1, width);
        p.x = std::min(span - 1, static_cast<int>(uniform01(gen) * span));
        p.color = cfg.color;
        p.size = cfg.size;
        out.push_back(p);
    }
    return out;
}

ImageBuffer draw_string(const ImageBuffer& img, const TextPlacement& placement, const GlyphFont& font,
                        const std::string& text, const std::optional<std::array<double, 3>>& outline,
                        std::vector<std::string>* warnings) {
    if (font.height < 1) throw ConfigError("draw_string: font has no height");
    if (placement.size < 1) throw ConfigError("draw_string: size must be >= 1");
    if (placement.x < 0 || placement.x >= img.width || placement.y < 0 || placement.y >= img.height)
        throw ConfigError("draw_string: anchor outside image");
    if (text.empty()) return img;

    const int size = placement.size;
    struct Cell {
        int x;
        const Glyph* glyph;
    };
    std::vector<Cell> cells;
    cells.reserve(text.size());
    int pen = placement.x;
    int x_end = placement.x;
    for (unsigned char c : text) {
        const Glyph& g = resolve_glyph(font, c, warnings);
        cells.push_back({pen, &g});
        x_end = std::max(x_end, pen + scaled_len(g.width, size, font.height));
        pen += scaled_advance(g, size, font.height);
    }

    // Fill coverage over the local extent, padded for the outline ring.
    const int dil = outline ? std::max(1, static_cast<int>(std::lround(static_cast<double>(size) / font.height))) : 0;
    const int lw = (x_end - placement.x) + 2 * dil;
    const int lh = size + 2 * dil;
    std::vector<std::uint8_t> fill(static_cast<std::size_t>(lh) * lw, 0);
    for (const Cell& cell : cells) {
        const Glyph& g = *cell.glyph;
        const int gw = scaled_len(g.width, size, font.height);
        for (int dy = 0; dy < size; ++dy) {
            const int sy = dy * font.height / size;
            for (int dx = 0; dx < gw; ++dx) {
                const int sx = dx * font.height / size;
                if (g.coverage[static_cast<std::size_t>(sy) * g.width + sx])
                    fill[static_cast<std::size_t>(dy + dil) * lw + (cell.x - placement.x + dil + dx)] = 1;
            }
        }
    }

    std::vector<std::uint8_t> ring;
    if (outline) {
        ring.assign(fill.size(), 0);
        for (int ly = 0; ly < lh; ++ly)
            for (int lx = 0; lx < lw; ++lx) {
                if (!fill[static_cast<std::size_t>(ly) * lw + lx]) continue;
                for (int oy = std::max(0, ly - dil); oy <= std::min(lh - 1, ly + dil); ++oy)
                    for (int ox = std::max(0, lx - dil); ox <= std::min(lw - 1, lx + dil); ++ox)
                        ring[static_cast<std::size_t>(oy) * lw + ox] = 1;
            }
    }

    ImageBuffer out = img;
    const int y0 = placement.y - dil;
    const int x0 = placement.x - dil;
    for (int ly = 0; ly < lh; ++ly) {
        const int iy = y0 + ly;
        if (iy < 0 || iy >= img.height) continue;
        for (int lx = 0; lx < lw; ++lx) {
            const int ix = x0 + lx;
            if (ix < 0 || ix >= img.width) continue;
            const std::size_t li = static_cast<std::size_t>(ly) * lw + lx;
            if (fill[li]) {
                for (int c = 0; c < 3; ++c) out.at(iy, ix, c) = placement.color[c];
            } else if (outline && ring[li]) {
                for (int c = 0; c < 3; ++c) out.at(iy, ix, c) = (*outline)[c];
            }
        }
    }
    return out;
}

ImageBuffer dtp_attack(const ImageBuffer& img, const DtpConfig& cfg, std::vector<std::string>* warnings) {
    cfg.validate();
    const GlyphFont& font = cfg.font ? *cfg.font : default_font();
    ImageBuffer out = img;
    for (const TextPlacement& p : plan_placements(img.height, img.width, cfg))
        out = draw_string(out, p, font, cfg.texts[p.text_index], cfg.outline, warnings);
    return out;
}

}  // namespace pgtk
