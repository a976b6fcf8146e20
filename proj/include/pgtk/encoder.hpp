#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pgtk/image.hpp"

namespace pgtk {

inline constexpr int kEmbedDim = 64;
inline constexpr int kPatchSize = 32;  // encoder input resolution, P x P
inline constexpr int kVocabSize = 4096;
inline constexpr double kNormFloor = 1e-12;

// Unit-norm (up to the kNormFloor guard on degenerate inputs) feature vector.
struct Embedding {
    std::array<double, kEmbedDim> v{};

    double dot(const Embedding& o) const {
        double s = 0.0;
        for (int i = 0; i < kEmbedDim; ++i)
            s += v[i] * o.v[i];
        return s;
    }
    double norm() const;
};

struct Caption {
    std::string text;
    int replication = 1;
};

// Linear+tanh dual encoder with analytic pixel gradients. Weights are
// immutable after initialization; every operation below is read-only.
struct ToyDualEncoder {
    std::vector<double> image_projection; // (P*P*3) x dim, row-major [input][out]
    std::vector<double> token_table;      // vocab x dim
    std::vector<double> text_projection;  // dim x dim
    std::uint64_t seed = 0;
};

// Deterministic weights from one mt19937_64 stream: uniform(-1,1) scaled by
// 1/sqrt(fan_in), matrices filled in declaration order.
ToyDualEncoder init_model(std::uint64_t seed);

// Resize to P x P, flatten, project, tanh, L2-normalize.
Embedding embed_image(const ToyDualEncoder& model, const ImageBuffer& img);

// Lowercase, split on whitespace, hash tokens (FNV-1a 64 mod vocab), average
// the token rows, project, tanh, L2-normalize. Replication never changes the
// embedding; it only multiplies the caption's weight during gradient sums.
Embedding embed_text(const ToyDualEncoder& model, const Caption& caption);

// Semantic distance 1 - cosine; in [0,2], the attack drives it up.
double loss(const Embedding& img_emb, const Embedding& txt_emb);

// Analytic d(mean-over-captions loss)/d(pixel), chained through the
// normalization, tanh, projection, and the resize transpose. Same dims as img.
GradientField grad_wrt_pixels(const ToyDualEncoder& model, const ImageBuffer& img,
                              const std::vector<Caption>& captions);

// Token bucket used by embed_text; fixed so text embeddings are portable.
std::uint32_t hash_token(const std::string& token);

// Weight snapshot: "PGTK" magic, then little-endian u32 {version, P, dim,
// vocab}, then the three matrices as little-endian f32 in declaration order.
void save_weights(const ToyDualEncoder& model, const std::string& path);
ToyDualEncoder load_weights(const std::string& path);

} // namespace pgtk
