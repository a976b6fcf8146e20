#include "pgtk/png_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <vector>

namespace pgtk {

namespace {

struct FileCloser {
    std::FILE* fp = nullptr;
    ~FileCloser() {
        if (fp)
            std::fclose(fp);
    }
};

} // namespace

ImageBuffer load_png(const std::string& path) {
    FileCloser file;
    file.fp = std::fopen(path.c_str(), "rb");
    if (!file.fp)
        throw IoError("cannot open PNG file: " + path);

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file.fp) != 8 || png_sig_cmp(sig, 0, 8))
        throw DecodeError("not a PNG file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("libpng initialization failed");
    }

    // Declared ahead of setjmp so they unwind normally after the throw below.
    // The flag must be volatile: it is written between setjmp and longjmp and
    // read after the jump back.
    std::vector<unsigned char> raw;
    std::vector<png_bytep> row_ptrs;
    volatile bool unsupported = false;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        if (unsupported)
            throw UnsupportedFormatError("unsupported PNG color type or bit depth: " + path);
        throw DecodeError("malformed PNG: " + path);
    }

    png_init_io(png, file.fp);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);

    if ((depth != 8 && depth != 16)
        || (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_GRAY_ALPHA
            && color != PNG_COLOR_TYPE_RGB && color != PNG_COLOR_TYPE_RGB_ALPHA)) {
        unsupported = true;
        png_longjmp(png, 1);
    }

    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    if (color & PNG_COLOR_MASK_ALPHA)
        png_set_strip_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const std::size_t row_bytes = png_get_rowbytes(png, info);
    raw.resize(row_bytes * height);
    row_ptrs.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        row_ptrs[y] = raw.data() + y * row_bytes;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    ImageBuffer img(static_cast<int>(height), static_cast<int>(width));
    const double max_sample = depth == 16 ? 65535.0 : 255.0;
    for (png_uint_32 y = 0; y < height; ++y) {
        const unsigned char* row = raw.data() + y * row_bytes;
        for (png_uint_32 x = 0; x < width; ++x) {
            for (int c = 0; c < 3; ++c) {
                unsigned v;
                if (depth == 16) {
                    // PNG samples are big-endian.
                    const unsigned char* p = row + (x * 3 + c) * 2;
                    v = (static_cast<unsigned>(p[0]) << 8) | p[1];
                } else {
                    v = row[x * 3 + c];
                }
                img.at(static_cast<int>(y), static_cast<int>(x), c) = v / max_sample;
            }
        }
    }
    return img;
}

void save_png(const ImageBuffer& img, const std::string& path) {
    if (img.height <= 0 || img.width <= 0)
        throw DimensionError("save_png: empty image");

    FileCloser file;
    file.fp = std::fopen(path.c_str(), "wb");
    if (!file.fp)
        throw IoError("cannot open PNG file for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialization failed");
    }

    std::vector<unsigned char> raw;
    std::vector<png_bytep> row_ptrs;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG write failed: " + path);
    }

    png_init_io(png, file.fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
                 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);

    raw.resize(static_cast<std::size_t>(img.height) * img.width * 3);
    row_ptrs.resize(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) {
        row_ptrs[y] = raw.data() + static_cast<std::size_t>(y) * img.width * 3;
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                long q = std::lround(img.at(y, x, c) * 255.0);
                row_ptrs[y][x * 3 + c] = static_cast<unsigned char>(std::clamp(q, 0L, 255L));
            }
        }
    }

    png_set_rows(png, info, row_ptrs.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
}

MaskImage load_mask(const std::string& path, double threshold) {
    ImageBuffer img = load_png(path);
    MaskImage mask(img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double lum = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
            mask.at(y, x) = lum >= threshold ? 1 : 0;
        }
    }
    return mask;
}

} // namespace pgtk
