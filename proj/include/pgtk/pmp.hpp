#pragma once

#include <functional>
#include <vector>

#include "pgtk/encoder.hpp"
#include "pgtk/image.hpp"

namespace pgtk {

struct PmpConfig {
    double step_alpha = 2.0 / 255.0;
    int steps_t = 60;      // multi-scale loop iterations
    int steps_n = 5;       // interactive warm-up iterations
    double momentum_lambda = 1.0;
    double eps = 16.0 / 255.0;
    std::vector<double> scale_factors = {1.0, 1.0 / 2.0, 1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0};
    int caption_replication = 3;

    void validate() const;
};

struct MomentumState {
    GradientField g;
};

struct AttackTrace {
    std::vector<double> interactive_loss; // one entry per warm-up iteration
    std::vector<double> multiscale_loss;  // one entry per multi-scale iteration
    double final_linf = 0.0;
};

// Called after every iterate update. phase is 0 for the warm-up loop and 1
// for the multi-scale loop; iter counts from 1 within each phase.
using IterateObserver = std::function<void(const ImageBuffer& iterate, int phase, int iter)>;

// Per-pair pixel gradient, L1-normalized (epsilon-floored), mapped to
// full resolution through the resize transpose when the image is a scaled
// level, then summed. Captions cycle when the counts differ; a caption with
// replication r counts as r identical entries.
GradientField normalized_grad_sum(const ToyDualEncoder& model, const std::vector<ImageBuffer>& images,
                                  const std::vector<Caption>& captions, int full_h, int full_w);

// g' = lambda * g + grad_sum, element-wise.
MomentumState momentum_update(const MomentumState& state, const GradientField& grad_sum, double lambda);

struct InteractiveResult {
    ImageBuffer adv;
    MomentumState momentum;
    std::vector<double> loss_trace;
};

// Warm-up loop: N steps of 10*alpha*sign(g) applied to the attackable region
// only, every iterate composed against the original image and clipped to the
// eps-ball and [0,1]. Gradients are taken at the current iterate.
InteractiveResult interactive_phase(const ToyDualEncoder& model, const ImageBuffer& img,
                                    const std::vector<Caption>& captions, const MaskImage& mask,
                                    const PmpConfig& cfg, const IterateObserver& observer = {});

struct MultiscaleResult {
    ImageBuffer adv;
    std::vector<double> loss_trace;
};

// Multi-scale loop: restarts from the clean image with inherited momentum,
// then T steps of alpha*sign(g) where each step's gradient sums the pyramid
// levels of the current iterate paired with the caption set.
MultiscaleResult multiscale_phase(const ToyDualEncoder& model, const ImageBuffer& img,
                                  const std::vector<Caption>& captions, const MaskImage& mask,
                                  const PmpConfig& cfg, const MomentumState& warm_momentum,
                                  const IterateObserver& observer = {});

struct PmpResult {
    ImageBuffer adv;
    AttackTrace trace;
};

// Full precision-mask perturbation attack: replicate the caption, warm up
// momentum, then run the multi-scale loop.
PmpResult pmp_attack(const ToyDualEncoder& model, const ImageBuffer& img, const Caption& caption,
                     const MaskImage& mask, const PmpConfig& cfg, const IterateObserver& observer = {});

} // namespace pgtk
