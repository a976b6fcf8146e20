#pragma once

#include <cstdint>
#include <vector>

#include "pgtk/errors.hpp"

namespace pgtk {

// RGB pixel buffer, row-major, components in [0,1].
// Index of component c of pixel (y, x) is (y*width + x)*3 + c.
struct ImageBuffer {
    int height = 0;
    int width = 0;
    std::vector<double> data; // height * width * 3

    ImageBuffer() = default;
    ImageBuffer(int h, int w, double fill = 0.0)
        : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {}

    std::size_t size() const { return data.size(); }
    double& at(int y, int x, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    double at(int y, int x, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

    bool same_dims(const ImageBuffer& o) const { return height == o.height && width == o.width; }
};

// Binary mask, one value per pixel. 1 = preserved region, 0 = attackable region.
struct MaskImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data; // height * width, each 0 or 1

    MaskImage() = default;
    MaskImage(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

    std::uint8_t& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

// Per-pixel-component gradient, same layout as ImageBuffer but unconstrained.
struct GradientField {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    GradientField() = default;
    GradientField(int h, int w, double fill = 0.0)
        : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {}

    std::size_t size() const { return data.size(); }
    bool same_dims(const GradientField& o) const { return height == o.height && width == o.width; }
};

struct ScalePyramid {
    std::vector<double> factors;      // each in (0, 1]
    std::vector<ImageBuffer> levels;  // one per factor, same order
};

// Output dimension for a scale factor. Never collapses to zero.
int scaled_dim(int dim, double factor);

// Bilinear resampling to arbitrary target dims with half-pixel-center
// alignment and edge clamping. Identity when dims match.
ImageBuffer resize_bilinear_dims(const ImageBuffer& img, int out_h, int out_w);

// Bilinear downscale by a factor in (0,1]. Factor 1 returns the image as is.
ImageBuffer resize_bilinear(const ImageBuffer& img, double factor);

// Exact linear transpose of resize_bilinear_dims for the (grad dims -> target
// dims) pair: <resize(a), b> == <a, adjoint(b)> for all a, b.
GradientField resize_adjoint(const GradientField& grad, int target_h, int target_w);

// Clamp each component of adv to [orig-eps, orig+eps] intersected with [0,1].
ImageBuffer clip_linf(const ImageBuffer& adv, const ImageBuffer& orig, double eps);

// Per-pixel select: orig where mask = 1, adv where mask = 0, all 3 channels.
ImageBuffer masked_compose(const ImageBuffer& orig, const ImageBuffer& adv, const MaskImage& mask);

ScalePyramid build_pyramid(const ImageBuffer& img, const std::vector<double>& factors);

// L1 norm of a gradient field. Row partial sums are combined in row order,
// so the result does not depend on the thread count.
double l1_norm(const GradientField& g);

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b);

bool all_finite(const GradientField& g);

} // namespace pgtk
