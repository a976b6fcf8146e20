#pragma once

#include <string>

#include "pgtk/image.hpp"

namespace pgtk {

// Decode an 8- or 16-bit gray/gray+alpha/RGB/RGBA PNG to [0,1] components.
// Gray is replicated across channels, alpha is discarded. Components are
// sample / (2^depth - 1).
// Throws IoError (missing file), DecodeError (malformed stream),
// UnsupportedFormatError (palette or sub-8-bit files).
ImageBuffer load_png(const std::string& path);

// Encode as 8-bit RGB; component c is written as round(c * 255).
void save_png(const ImageBuffer& img, const std::string& path);

// Decode like load_png, then threshold per-pixel luminance
// (0.299 R + 0.587 G + 0.114 B) at `threshold`: >= threshold maps to 1.
MaskImage load_mask(const std::string& path, double threshold = 0.5);

} // namespace pgtk
