#include "pgtk/font.hpp"

#include <algorithm>
#include <cstdio>
#include <string_view>

#include "pgtk/errors.hpp"

namespace pgtk {

namespace {

constexpr std::uint32_t kFontVersion = 1;

struct FileGuard {
    std::FILE* fp;
    ~FileGuard() {
        if (fp) std::fclose(fp);
    }
};

void put_u32(std::FILE* fp, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    if (std::fwrite(b, 1, 4, fp) != 4) throw IoError("font: short write");
}

std::uint32_t get_u32(std::FILE* fp) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, fp) != 4) throw DecodeError("font: truncated file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void GlyphFont::validate() const {
    if (height < 1) throw ConfigError("font: glyph height must be >= 1");
    for (std::uint32_t cp = 0x20; cp <= 0x7e; ++cp)
        if (!has(cp)) throw ConfigError("font: missing printable ASCII glyph " + std::to_string(cp));
    for (const auto& [cp, g] : glyphs) {
        if (g.width < 0 || g.advance < 1)
            throw ConfigError("font: bad metrics for glyph " + std::to_string(cp));
        if (g.coverage.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(g.width))
            throw ConfigError("font: coverage size mismatch for glyph " + std::to_string(cp));
        for (std::uint8_t v : g.coverage)
            if (v > 1) throw ConfigError("font: coverage must be binary for glyph " + std::to_string(cp));
    }
}

GlyphFont load_font(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw IoError("font: cannot open " + path);
    FileGuard guard{fp};

    char magic[4];
    if (std::fread(magic, 1, 4, fp) != 4 || std::string_view(magic, 4) != "PGTF")
        throw DecodeError("font: bad magic in " + path);
    if (get_u32(fp) != kFontVersion) throw DecodeError("font: unsupported version in " + path);

    GlyphFont font;
    font.height = static_cast<int>(get_u32(fp));
    const std::uint32_t count = get_u32(fp);
    if (font.height < 1 || font.height > 1024 || count > 1u << 20)
        throw DecodeError("font: implausible header in " + path);

    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t cp = get_u32(fp);
        Glyph g;
        g.width = static_cast<int>(get_u32(fp));
        g.advance = static_cast<int>(get_u32(fp));
        if (g.width < 0 || g.width > 1024) throw DecodeError("font: implausible glyph width in " + path);
        const int stride = (g.width + 7) / 8;
        std::vector<std::uint8_t> packed(static_cast<std::size_t>(stride) * font.height);
        if (!packed.empty() && std::fread(packed.data(), 1, packed.size(), fp) != packed.size())
            throw DecodeError("font: truncated glyph data in " + path);
        g.coverage.assign(static_cast<std::size_t>(font.height) * g.width, 0);
        for (int y = 0; y < font.height; ++y)
            for (int x = 0; x < g.width; ++x) {
                const std::uint8_t byte = packed[static_cast<std::size_t>(y) * stride + x / 8];
                g.coverage[static_cast<std::size_t>(y) * g.width + x] = (byte >> (7 - x % 8)) & 1;
            }
        if (!font.glyphs.emplace(cp, std::move(g)).second)
            throw DecodeError("font: duplicate glyph " + std::to_string(cp) + " in " + path);
    }
    font.validate();
    return font;
}

void save_font(const GlyphFont& font, const std::string& path) {
    font.validate();
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("font: cannot create " + path);
    FileGuard guard{fp};

    if (std::fwrite("PGTF", 1, 4, fp) != 4) throw IoError("font: short write");
    put_u32(fp, kFontVersion);
    put_u32(fp, static_cast<std::uint32_t>(font.height));
    put_u32(fp, static_cast<std::uint32_t>(font.glyphs.size()));

    // Deterministic glyph order regardless of map iteration.
    std::vector<std::uint32_t> codepoints;
    codepoints.reserve(font.glyphs.size());
    for (const auto& [cp, g] : font.glyphs) codepoints.push_back(cp);
    std::sort(codepoints.begin(), codepoints.end());

    for (std::uint32_t cp : codepoints) {
        const Glyph& g = font.glyph(cp);
        put_u32(fp, cp);
        put_u32(fp, static_cast<std::uint32_t>(g.width));
        put_u32(fp, static_cast<std::uint32_t>(g.advance));
        const int stride = (g.width + 7) / 8;
        std::vector<std::uint8_t> packed(static_cast<std::size_t>(stride) * font.height, 0);
        for (int y = 0; y < font.height; ++y)
            for (int x = 0; x < g.width; ++x)
                if (g.coverage[static_cast<std::size_t>(y) * g.width + x])
                    packed[static_cast<std::size_t>(y) * stride + x / 8] |= 1u << (7 - x % 8);
        if (!packed.empty() && std::fwrite(packed.data(), 1, packed.size(), fp) != packed.size())
            throw IoError("font: short write");
    }
}

}  // namespace pgtk
