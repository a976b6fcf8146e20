#include "pgtk/pmp.hpp"

#include <cmath>

namespace pgtk {

namespace {

constexpr double kL1Floor = 1e-12;

double sign_of(double v) {
    if (v > 0.0)
        return 1.0;
    if (v < 0.0)
        return -1.0;
    return 0.0; // zero-gradient pixels stay put
}

std::vector<Caption> expand_replication(const std::vector<Caption>& captions) {
    std::vector<Caption> flat;
    for (const Caption& c : captions) {
        if (c.replication < 1)
            throw ConfigError("caption replication must be >= 1");
        for (int r = 0; r < c.replication; ++r)
            flat.push_back({c.text, 1});
    }
    return flat;
}

ImageBuffer sign_step(const ImageBuffer& adv, const GradientField& g, double step) {
    ImageBuffer out(adv.height, adv.width);
    const std::int64_t n = static_cast<std::int64_t>(adv.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        out.data[i] = adv.data[i] + step * sign_of(g.data[i]);
    return out;
}

// Mean text embedding of a caption set; identical copies collapse to the
// same mean, so replication does not move it.
Embedding mean_text_embedding(const ToyDualEncoder& model, const std::vector<Caption>& captions) {
    Embedding mean;
    for (const Caption& c : captions) {
        const Embedding t = embed_text(model, c);
        for (int k = 0; k < kEmbedDim; ++k)
            mean.v[k] += t.v[k];
    }
    for (int k = 0; k < kEmbedDim; ++k)
        mean.v[k] /= static_cast<double>(captions.size());
    return mean;
}

double mean_loss(const ToyDualEncoder& model, const ImageBuffer& img, const Embedding& mean_txt) {
    return 1.0 - embed_image(model, img).dot(mean_txt);
}

} // namespace

void PmpConfig::validate() const {
    if (!(step_alpha > 0.0))
        throw ConfigError("pmp: step_alpha must be > 0");
    if (steps_t < 1)
        throw ConfigError("pmp: steps_t must be >= 1");
    if (steps_n < 0)
        throw ConfigError("pmp: steps_n must be >= 0");
    if (eps < 0.0)
        throw ConfigError("pmp: eps must be >= 0");
    if (scale_factors.empty())
        throw ConfigError("pmp: scale_factors must be non-empty");
    for (double f : scale_factors)
        if (!(f > 0.0) || f > 1.0)
            throw ConfigError("pmp: scale factors must be in (0, 1]");
    if (caption_replication < 1)
        throw ConfigError("pmp: caption_replication must be >= 1");
}

GradientField normalized_grad_sum(const ToyDualEncoder& model, const std::vector<ImageBuffer>& images,
                                  const std::vector<Caption>& captions, int full_h, int full_w) {
    if (images.empty() || captions.empty())
        throw ConfigError("normalized_grad_sum: empty inputs");
    const std::vector<Caption> flat = expand_replication(captions);

    GradientField sum(full_h, full_w);
    for (std::size_t j = 0; j < images.size(); ++j) {
        const Caption& cap = flat[j % flat.size()];
        GradientField g = grad_wrt_pixels(model, images[j], {cap});
        const double norm = std::max(l1_norm(g), kL1Floor);
        for (double& v : g.data)
            v /= norm;
        if (g.height != full_h || g.width != full_w)
            g = resize_adjoint(g, full_h, full_w);
        for (std::size_t i = 0; i < sum.data.size(); ++i)
            sum.data[i] += g.data[i];
    }
    return sum;
}

MomentumState momentum_update(const MomentumState& state, const GradientField& grad_sum, double lambda) {
    if (!state.g.same_dims(grad_sum))
        throw DimensionError("momentum_update: dimensions disagree");
    MomentumState next;
    next.g = GradientField(grad_sum.height, grad_sum.width);
    const std::int64_t n = static_cast<std::int64_t>(grad_sum.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        next.g.data[i] = lambda * state.g.data[i] + grad_sum.data[i];
    return next;
}

InteractiveResult interactive_phase(const ToyDualEncoder& model, const ImageBuffer& img,
                                    const std::vector<Caption>& captions, const MaskImage& mask,
                                    const PmpConfig& cfg, const IterateObserver& observer) {
    cfg.validate();
    if (img.height != mask.height || img.width != mask.width)
        throw DimensionError("interactive_phase: image and mask dimensions disagree");

    const std::vector<Caption> flat = expand_replication(captions);
    const Embedding mean_txt = mean_text_embedding(model, flat);

    InteractiveResult res;
    res.adv = img;
    res.momentum.g = GradientField(img.height, img.width);
    for (int k = 1; k <= cfg.steps_n; ++k) {
        // Replicated captions against the unscaled current iterate.
        const std::vector<ImageBuffer> copies(flat.size(), res.adv);
        const GradientField gs = normalized_grad_sum(model, copies, flat, img.height, img.width);
        res.momentum = momentum_update(res.momentum, gs, cfg.momentum_lambda);
        const ImageBuffer stepped = sign_step(res.adv, res.momentum.g, 10.0 * cfg.step_alpha);
        res.adv = clip_linf(masked_compose(img, stepped, mask), img, cfg.eps);
        res.loss_trace.push_back(mean_loss(model, res.adv, mean_txt));
        if (observer)
            observer(res.adv, 0, k);
    }
    return res;
}

MultiscaleResult multiscale_phase(const ToyDualEncoder& model, const ImageBuffer& img,
                                  const std::vector<Caption>& captions, const MaskImage& mask,
                                  const PmpConfig& cfg, const MomentumState& warm_momentum,
                                  const IterateObserver& observer) {
    cfg.validate();
    if (img.height != mask.height || img.width != mask.width)
        throw DimensionError("multiscale_phase: image and mask dimensions disagree");
    if (warm_momentum.g.height != img.height || warm_momentum.g.width != img.width)
        throw DimensionError("multiscale_phase: momentum dimensions disagree");

    const std::vector<Caption> flat = expand_replication(captions);
    const Embedding mean_txt = mean_text_embedding(model, flat);

    MultiscaleResult res;
    res.adv = img; // restart from the clean image; momentum is inherited
    MomentumState momentum = warm_momentum;
    for (int k = 1; k <= cfg.steps_t; ++k) {
        const ScalePyramid pyr = build_pyramid(res.adv, cfg.scale_factors);
        const GradientField gs = normalized_grad_sum(model, pyr.levels, flat, img.height, img.width);
        momentum = momentum_update(momentum, gs, cfg.momentum_lambda);
        const ImageBuffer stepped = sign_step(res.adv, momentum.g, cfg.step_alpha);
        res.adv = clip_linf(masked_compose(img, stepped, mask), img, cfg.eps);
        res.loss_trace.push_back(mean_loss(model, res.adv, mean_txt));
        if (observer)
            observer(res.adv, 1, k);
    }
    return res;
}

PmpResult pmp_attack(const ToyDualEncoder& model, const ImageBuffer& img, const Caption& caption,
                     const MaskImage& mask, const PmpConfig& cfg, const IterateObserver& observer) {
    cfg.validate();
    std::vector<Caption> replicated(static_cast<std::size_t>(cfg.caption_replication),
                                    Caption{caption.text, 1});

    InteractiveResult warm = interactive_phase(model, img, replicated, mask, cfg, observer);
    MultiscaleResult ms = multiscale_phase(model, img, replicated, mask, cfg, warm.momentum, observer);

    PmpResult res;
    res.adv = std::move(ms.adv);
    res.trace.interactive_loss = std::move(warm.loss_trace);
    res.trace.multiscale_loss = std::move(ms.loss_trace);
    res.trace.final_linf = max_abs_diff(res.adv, img);
    return res;
}

} // namespace pgtk
