#include "pgtk/image.hpp"

#include <algorithm>
#include <cmath>

namespace pgtk {

namespace {

// One-dimensional bilinear tap: source indices and weights for output index o.
// Half-pixel-center mapping with edge clamp; weights always sum to 1.
struct Tap {
    int i0, i1;
    double w0, w1;
};

Tap tap_1d(int o, int n_in, int n_out) {
    double pos = (o + 0.5) * (static_cast<double>(n_in) / n_out) - 0.5;
    double base = std::floor(pos);
    double frac = pos - base;
    int b = static_cast<int>(base);
    Tap t;
    t.i0 = std::clamp(b, 0, n_in - 1);
    t.i1 = std::clamp(b + 1, 0, n_in - 1);
    t.w0 = 1.0 - frac;
    t.w1 = frac;
    return t;
}

void check_same_dims(int h1, int w1, int h2, int w2, const char* what) {
    if (h1 != h2 || w1 != w2)
        throw DimensionError(std::string(what) + ": dimensions disagree");
}

} // namespace

int scaled_dim(int dim, double factor) {
    return std::max(1, static_cast<int>(std::lround(factor * dim)));
}

ImageBuffer resize_bilinear_dims(const ImageBuffer& img, int out_h, int out_w) {
    if (img.height <= 0 || img.width <= 0)
        throw DimensionError("resize_bilinear: empty source image");
    if (out_h <= 0 || out_w <= 0)
        throw DimensionError("resize_bilinear: empty target dims");
    if (out_h == img.height && out_w == img.width)
        return img;

    ImageBuffer out(out_h, out_w);
    const int in_h = img.height, in_w = img.width;

    std::vector<Tap> col_taps(out_w);
    for (int x = 0; x < out_w; ++x)
        col_taps[x] = tap_1d(x, in_w, out_w);

#pragma omp parallel for schedule(static)
    for (int y = 0; y < out_h; ++y) {
        const Tap ty = tap_1d(y, in_h, out_h);
        for (int x = 0; x < out_w; ++x) {
            const Tap& tx = col_taps[x];
            for (int c = 0; c < 3; ++c) {
                double v = img.at(ty.i0, tx.i0, c) * (ty.w0 * tx.w0)
                         + img.at(ty.i0, tx.i1, c) * (ty.w0 * tx.w1)
                         + img.at(ty.i1, tx.i0, c) * (ty.w1 * tx.w0)
                         + img.at(ty.i1, tx.i1, c) * (ty.w1 * tx.w1);
                out.at(y, x, c) = v;
            }
        }
    }
    return out;
}

ImageBuffer resize_bilinear(const ImageBuffer& img, double factor) {
    if (!(factor > 0.0) || factor > 1.0)
        throw ConfigError("resize_bilinear: factor must be in (0, 1]");
    return resize_bilinear_dims(img, scaled_dim(img.height, factor), scaled_dim(img.width, factor));
}

GradientField resize_adjoint(const GradientField& grad, int target_h, int target_w) {
    if (grad.height <= 0 || grad.width <= 0)
        throw DimensionError("resize_adjoint: empty gradient");
    if (target_h <= 0 || target_w <= 0)
        throw DimensionError("resize_adjoint: empty target dims");
    if (grad.height == target_h && grad.width == target_w)
        return grad;

    // Gather form of the transpose: for each target index, the list of scaled
    // indices whose forward taps touch it. Contributions are accumulated in
    // scaled-index order, so the sum is thread-count independent.
    struct Contrib {
        int o;
        double w;
    };
    auto invert_axis = [](int n_out, int n_in) {
        std::vector<std::vector<Contrib>> lists(static_cast<std::size_t>(n_in));
        for (int o = 0; o < n_out; ++o) {
            Tap t = tap_1d(o, n_in, n_out);
            lists[t.i0].push_back({o, t.w0});
            lists[t.i1].push_back({o, t.w1});
        }
        return lists;
    };
    const auto rows = invert_axis(grad.height, target_h);
    const auto cols = invert_axis(grad.width, target_w);

    GradientField out(target_h, target_w);
#pragma omp parallel for schedule(static)
    for (int ty = 0; ty < target_h; ++ty) {
        for (int tx = 0; tx < target_w; ++tx) {
            double acc[3] = {0.0, 0.0, 0.0};
            for (const Contrib& ry : rows[ty]) {
                for (const Contrib& cx : cols[tx]) {
                    const double w = ry.w * cx.w;
                    const std::size_t base = (static_cast<std::size_t>(ry.o) * grad.width + cx.o) * 3;
                    acc[0] += w * grad.data[base + 0];
                    acc[1] += w * grad.data[base + 1];
                    acc[2] += w * grad.data[base + 2];
                }
            }
            const std::size_t base = (static_cast<std::size_t>(ty) * target_w + tx) * 3;
            out.data[base + 0] = acc[0];
            out.data[base + 1] = acc[1];
            out.data[base + 2] = acc[2];
        }
    }
    return out;
}

ImageBuffer clip_linf(const ImageBuffer& adv, const ImageBuffer& orig, double eps) {
    check_same_dims(adv.height, adv.width, orig.height, orig.width, "clip_linf");
    if (eps < 0.0)
        throw ConfigError("clip_linf: eps must be >= 0");

    ImageBuffer out(adv.height, adv.width);
    const std::int64_t n = static_cast<std::int64_t>(adv.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const double lo = std::max(0.0, orig.data[i] - eps);
        const double hi = std::min(1.0, orig.data[i] + eps);
        out.data[i] = std::clamp(adv.data[i], lo, hi);
    }
    return out;
}

ImageBuffer masked_compose(const ImageBuffer& orig, const ImageBuffer& adv, const MaskImage& mask) {
    check_same_dims(orig.height, orig.width, adv.height, adv.width, "masked_compose");
    check_same_dims(orig.height, orig.width, mask.height, mask.width, "masked_compose");

    ImageBuffer out(orig.height, orig.width);
    const std::int64_t npix = static_cast<std::int64_t>(orig.height) * orig.width;
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < npix; ++p) {
        const ImageBuffer& src = mask.data[p] ? orig : adv;
        out.data[p * 3 + 0] = src.data[p * 3 + 0];
        out.data[p * 3 + 1] = src.data[p * 3 + 1];
        out.data[p * 3 + 2] = src.data[p * 3 + 2];
    }
    return out;
}

ScalePyramid build_pyramid(const ImageBuffer& img, const std::vector<double>& factors) {
    if (factors.empty())
        throw ConfigError("build_pyramid: factor list is empty");
    ScalePyramid pyr;
    pyr.factors = factors;
    pyr.levels.reserve(factors.size());
    for (double f : factors)
        pyr.levels.push_back(resize_bilinear(img, f));
    return pyr;
}

double l1_norm(const GradientField& g) {
    const int h = g.height;
    const std::size_t row_len = static_cast<std::size_t>(g.width) * 3;
    std::vector<double> row_sums(static_cast<std::size_t>(std::max(h, 1)), 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        double s = 0.0;
        const double* row = g.data.data() + static_cast<std::size_t>(y) * row_len;
        for (std::size_t i = 0; i < row_len; ++i)
            s += std::abs(row[i]);
        row_sums[y] = s;
    }
    double total = 0.0;
    for (int y = 0; y < h; ++y)
        total += row_sums[y];
    return total;
}

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
    check_same_dims(a.height, a.width, b.height, b.width, "max_abs_diff");
    double m = 0.0;
    const std::int64_t n = static_cast<std::int64_t>(a.size());
#pragma omp parallel for schedule(static) reduction(max : m)
    for (std::int64_t i = 0; i < n; ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

bool all_finite(const GradientField& g) {
    for (double v : g.data)
        if (!std::isfinite(v))
            return false;
    return true;
}

} // namespace pgtk
