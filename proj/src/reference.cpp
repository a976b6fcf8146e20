#include "pgtk/reference.hpp"

#include <algorithm>
#include <cmath>

namespace pgtk::reference {

namespace {

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

} // namespace

ImageBuffer resize_bilinear_dims(const ImageBuffer& img, int out_h, int out_w) {
    if (out_h == img.height && out_w == img.width)
        return img;
    ImageBuffer out(out_h, out_w);
    for (int y = 0; y < out_h; ++y) {
        Tap ty = tap_1d(y, img.height, out_h);
        for (int x = 0; x < out_w; ++x) {
            Tap tx = tap_1d(x, img.width, out_w);
            for (int c = 0; c < 3; ++c) {
                out.at(y, x, c) = img.at(ty.i0, tx.i0, c) * (ty.w0 * tx.w0)
                                + img.at(ty.i0, tx.i1, c) * (ty.w0 * tx.w1)
                                + img.at(ty.i1, tx.i0, c) * (ty.w1 * tx.w0)
                                + img.at(ty.i1, tx.i1, c) * (ty.w1 * tx.w1);
            }
        }
    }
    return out;
}

GradientField resize_adjoint(const GradientField& grad, int target_h, int target_w) {
    if (grad.height == target_h && grad.width == target_w)
        return grad;
    GradientField out(target_h, target_w);
    for (int y = 0; y < grad.height; ++y) {
        Tap ty = tap_1d(y, target_h, grad.height);
        for (int x = 0; x < grad.width; ++x) {
            Tap tx = tap_1d(x, target_w, grad.width);
            for (int c = 0; c < 3; ++c) {
                const double v = grad.data[(static_cast<std::size_t>(y) * grad.width + x) * 3 + c];
                auto add = [&](int yy, int xx, double w) {
                    out.data[(static_cast<std::size_t>(yy) * target_w + xx) * 3 + c] += w * v;
                };
                add(ty.i0, tx.i0, ty.w0 * tx.w0);
                add(ty.i0, tx.i1, ty.w0 * tx.w1);
                add(ty.i1, tx.i0, ty.w1 * tx.w0);
                add(ty.i1, tx.i1, ty.w1 * tx.w1);
            }
        }
    }
    return out;
}

ImageBuffer clip_linf(const ImageBuffer& adv, const ImageBuffer& orig, double eps) {
    ImageBuffer out(adv.height, adv.width);
    for (std::size_t i = 0; i < adv.size(); ++i) {
        double lo = std::max(0.0, orig.data[i] - eps);
        double hi = std::min(1.0, orig.data[i] + eps);
        out.data[i] = std::clamp(adv.data[i], lo, hi);
    }
    return out;
}

ImageBuffer masked_compose(const ImageBuffer& orig, const ImageBuffer& adv, const MaskImage& mask) {
    ImageBuffer out(orig.height, orig.width);
    for (int y = 0; y < orig.height; ++y)
        for (int x = 0; x < orig.width; ++x)
            for (int c = 0; c < 3; ++c)
                out.at(y, x, c) = mask.at(y, x) ? orig.at(y, x, c) : adv.at(y, x, c);
    return out;
}

double l1_norm(const GradientField& g) {
    double s = 0.0;
    for (double v : g.data)
        s += std::abs(v);
    return s;
}

double ssim(const ImageBuffer& x, const ImageBuffer& y, const SsimParams& params) {
    const int h = x.height, w = x.width;
    const int win = params.window_size;
    const int half = win / 2;

    std::vector<double> kernel = params.gaussian_window();
    std::vector<double> lx(static_cast<std::size_t>(h) * w), ly(lx.size());
    for (int p = 0; p < h * w; ++p) {
        lx[p] = 0.299 * x.data[p * 3] + 0.587 * x.data[p * 3 + 1] + 0.114 * x.data[p * 3 + 2];
        ly[p] = 0.299 * y.data[p * 3] + 0.587 * y.data[p * 3 + 1] + 0.114 * y.data[p * 3 + 2];
    }

    const double c1 = params.c1(), c2 = params.c2();
    double total = 0.0;
    long count = 0;
    for (int cy = half; cy < h - half; ++cy) {
        for (int cx = half; cx < w - half; ++cx) {
            double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
            for (int ky = 0; ky < win; ++ky) {
                for (int kx = 0; kx < win; ++kx) {
                    double wgt = kernel[ky * win + kx];
                    double a = lx[(cy - half + ky) * w + (cx - half + kx)];
                    double b = ly[(cy - half + ky) * w + (cx - half + kx)];
                    mx += wgt * a;
                    my += wgt * b;
                    mxx += wgt * a * a;
                    myy += wgt * b * b;
                    mxy += wgt * a * b;
                }
            }
            double vx = mxx - mx * mx;
            double vy = myy - my * my;
            double cov = mxy - mx * my;
            double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
            double den = (mx * mx + my * my + c1) * (vx + vy + c2);
            total += num / den;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

} // namespace pgtk::reference
