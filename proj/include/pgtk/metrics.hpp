#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pgtk/encoder.hpp"
#include "pgtk/image.hpp"

namespace pgtk {

// Canonical SSIM parameterization: 11x11 Gaussian window (sigma 1.5),
// C1 = (K1*L)^2, C2 = (K2*L)^2, unit dynamic range.
struct SsimParams {
    int window_size = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;

    double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }

    // window_size^2 weights, normalized to sum to 1.
    std::vector<double> gaussian_window() const;
};

// Mean windowed SSIM over the luminance plane (0.299 R + 0.587 G + 0.114 B).
// The map covers positions where the window fits entirely inside the image.
double ssim(const ImageBuffer& x, const ImageBuffer& y, const SsimParams& params = {});

struct ScoreEntry {
    int asr = 0;       // 0 or 1
    double ssim = 0.0; // in [-1, 1]
};

// (1/n) * sum asr_i * (alpha + (1-alpha) * ssim_i).
double final_score(const std::vector<ScoreEntry>& entries, double alpha = 0.5);

struct PerImageScore {
    std::string id;
    int asr = 0;
    std::optional<double> ssim_pre_text;  // after perturbation, before text
    double ssim_post_text = 0.0;          // final image vs original
    double contribution = 0.0;            // asr * (alpha + (1-alpha) * ssim_post_text)
};

struct ScoreReport {
    std::vector<PerImageScore> images;
    double alpha = 0.5;
    std::optional<double> score; // absent when no image was scored
    SsimParams ssim_params;

    std::string to_json() const;
};

// Decides whether an adversarial image counts as a successful attack.
class AnswerOracle {
public:
    virtual ~AnswerOracle() = default;
    virtual int evaluate(const ImageBuffer& adv) const = 0;
};

// Retrieval flip on the surrogate encoder: success when the true caption's
// cosine falls strictly below the best decoy's. Ties count as failure.
class SurrogateRetrievalOracle : public AnswerOracle {
public:
    SurrogateRetrievalOracle(const ToyDualEncoder& model, Caption true_caption,
                             std::vector<Caption> decoys);

    int evaluate(const ImageBuffer& adv) const override;

private:
    const ToyDualEncoder* model_;
    Embedding true_emb_;
    std::vector<Embedding> decoy_embs_;
};

} // namespace pgtk
