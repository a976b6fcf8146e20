#pragma once

#include "pgtk/image.hpp"
#include "pgtk/metrics.hpp"

// Plain serial implementations of the hot kernels. These are the reference
// the parallel kernels are tested against and the baseline the benchmark
// tool compares with. Not used on any production path.
namespace pgtk::reference {

ImageBuffer resize_bilinear_dims(const ImageBuffer& img, int out_h, int out_w);

// Scatter-form transpose (walks the forward taps and accumulates), unlike
// the gather-form production kernel.
GradientField resize_adjoint(const GradientField& grad, int target_h, int target_w);

ImageBuffer clip_linf(const ImageBuffer& adv, const ImageBuffer& orig, double eps);

ImageBuffer masked_compose(const ImageBuffer& orig, const ImageBuffer& adv, const MaskImage& mask);

double l1_norm(const GradientField& g);

// Direct windowed SSIM: one explicit 11x11 loop per map position.
double ssim(const ImageBuffer& x, const ImageBuffer& y, const SsimParams& params);

} // namespace pgtk::reference
