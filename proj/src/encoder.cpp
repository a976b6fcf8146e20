#include "pgtk/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <string_view>

#include "pgtk/rng.hpp"

namespace pgtk {

namespace {

constexpr int kImageInputDim = kPatchSize * kPatchSize * 3;

void fill_scaled(std::vector<double>& w, std::size_t count, int fan_in, std::mt19937_64& gen) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    w.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        w[i] = uniform(gen, -1.0, 1.0) * scale;
}

Embedding normalize_tanh(const std::array<double, kEmbedDim>& z) {
    Embedding e;
    double sq = 0.0;
    for (int k = 0; k < kEmbedDim; ++k) {
        e.v[k] = std::tanh(z[k]);
        sq += e.v[k] * e.v[k];
    }
    const double denom = std::max(std::sqrt(sq), kNormFloor);
    for (int k = 0; k < kEmbedDim; ++k)
        e.v[k] /= denom;
    return e;
}

std::vector<std::uint32_t> tokenize(const std::string& text) {
    std::vector<std::uint32_t> ids;
    std::string token;
    auto flush = [&] {
        if (!token.empty()) {
            ids.push_back(hash_token(token));
            token.clear();
        }
    };
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch)))
            flush();
        else
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    flush();
    return ids;
}

} // namespace

double Embedding::norm() const {
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

ToyDualEncoder init_model(std::uint64_t seed) {
    ToyDualEncoder m;
    m.seed = seed;
    std::mt19937_64 gen(seed);
    fill_scaled(m.image_projection, static_cast<std::size_t>(kImageInputDim) * kEmbedDim, kImageInputDim, gen);
    fill_scaled(m.token_table, static_cast<std::size_t>(kVocabSize) * kEmbedDim, kEmbedDim, gen);
    fill_scaled(m.text_projection, static_cast<std::size_t>(kEmbedDim) * kEmbedDim, kEmbedDim, gen);
    return m;
}

std::uint32_t hash_token(const std::string& token) {
    return static_cast<std::uint32_t>(fnv1a64(token) % kVocabSize);
}

Embedding embed_image(const ToyDualEncoder& model, const ImageBuffer& img) {
    const ImageBuffer patch = resize_bilinear_dims(img, kPatchSize, kPatchSize);
    std::array<double, kEmbedDim> z{};
#pragma omp parallel for schedule(static)
    for (int k = 0; k < kEmbedDim; ++k) {
        double s = 0.0;
        for (int i = 0; i < kImageInputDim; ++i)
            s += patch.data[i] * model.image_projection[static_cast<std::size_t>(i) * kEmbedDim + k];
        z[k] = s;
    }
    return normalize_tanh(z);
}

Embedding embed_text(const ToyDualEncoder& model, const Caption& caption) {
    const std::vector<std::uint32_t> ids = tokenize(caption.text);
    if (ids.empty())
        throw ConfigError("embed_text: caption is empty");

    std::array<double, kEmbedDim> mean{};
    for (std::uint32_t id : ids)
        for (int k = 0; k < kEmbedDim; ++k)
            mean[k] += model.token_table[static_cast<std::size_t>(id) * kEmbedDim + k];
    for (int k = 0; k < kEmbedDim; ++k)
        mean[k] /= static_cast<double>(ids.size());

    std::array<double, kEmbedDim> z{};
    for (int k = 0; k < kEmbedDim; ++k) {
        double s = 0.0;
        for (int j = 0; j < kEmbedDim; ++j)
            s += mean[j] * model.text_projection[static_cast<std::size_t>(j) * kEmbedDim + k];
        z[k] = s;
    }
    return normalize_tanh(z);
}

double loss(const Embedding& img_emb, const Embedding& txt_emb) {
    return 1.0 - img_emb.dot(txt_emb);
}

GradientField grad_wrt_pixels(const ToyDualEncoder& model, const ImageBuffer& img,
                              const std::vector<Caption>& captions) {
    if (captions.empty())
        throw ConfigError("grad_wrt_pixels: need at least one caption");

    // Mean text embedding: d(mean loss)/d(image embedding) = -mean_t.
    std::array<double, kEmbedDim> mean_t{};
    for (const Caption& c : captions) {
        const Embedding t = embed_text(model, c);
        for (int k = 0; k < kEmbedDim; ++k)
            mean_t[k] += t.v[k];
    }
    for (int k = 0; k < kEmbedDim; ++k)
        mean_t[k] /= static_cast<double>(captions.size());

    // Forward pieces at the encoder resolution.
    const ImageBuffer patch = resize_bilinear_dims(img, kPatchSize, kPatchSize);
    std::array<double, kEmbedDim> z{};
#pragma omp parallel for schedule(static)
    for (int k = 0; k < kEmbedDim; ++k) {
        double s = 0.0;
        for (int i = 0; i < kImageInputDim; ++i)
            s += patch.data[i] * model.image_projection[static_cast<std::size_t>(i) * kEmbedDim + k];
        z[k] = s;
    }
    std::array<double, kEmbedDim> u{};
    double sq = 0.0;
    for (int k = 0; k < kEmbedDim; ++k) {
        u[k] = std::tanh(z[k]);
        sq += u[k] * u[k];
    }
    const double un = std::sqrt(sq);
    const double denom = std::max(un, kNormFloor);

    std::array<double, kEmbedDim> dl_de{};
    for (int k = 0; k < kEmbedDim; ++k)
        dl_de[k] = -mean_t[k];

    // Through the normalization e = u / max(|u|, floor).
    std::array<double, kEmbedDim> dl_du{};
    if (un >= kNormFloor) {
        double e_dot = 0.0;
        for (int k = 0; k < kEmbedDim; ++k)
            e_dot += (u[k] / denom) * dl_de[k];
        for (int k = 0; k < kEmbedDim; ++k)
            dl_du[k] = (dl_de[k] - (u[k] / denom) * e_dot) / denom;
    } else {
        for (int k = 0; k < kEmbedDim; ++k)
            dl_du[k] = dl_de[k] / denom;
    }

    // Through tanh.
    std::array<double, kEmbedDim> dl_dz{};
    for (int k = 0; k < kEmbedDim; ++k)
        dl_dz[k] = dl_du[k] * (1.0 - u[k] * u[k]);

    // Through the projection, back to P x P pixels.
    GradientField patch_grad(kPatchSize, kPatchSize);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < kImageInputDim; ++i) {
        double s = 0.0;
        for (int k = 0; k < kEmbedDim; ++k)
            s += model.image_projection[static_cast<std::size_t>(i) * kEmbedDim + k] * dl_dz[k];
        patch_grad.data[i] = s;
    }

    return resize_adjoint(patch_grad, img.height, img.width);
}

namespace {

void put_u32(std::FILE* fp, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>((v >> 24) & 0xff)};
    std::fwrite(b, 1, 4, fp);
}

bool get_u32(std::FILE* fp, std::uint32_t& v) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, fp) != 4)
        return false;
    v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8)
        | (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    return true;
}

void put_matrix(std::FILE* fp, const std::vector<double>& w) {
    for (double d : w)
        put_u32(fp, std::bit_cast<std::uint32_t>(static_cast<float>(d)));
}

bool get_matrix(std::FILE* fp, std::vector<double>& w, std::size_t count) {
    w.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t bits;
        if (!get_u32(fp, bits))
            return false;
        w[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    return true;
}

constexpr std::uint32_t kSnapshotVersion = 1;

struct FileGuard {
    std::FILE* fp;
    ~FileGuard() {
        if (fp)
            std::fclose(fp);
    }
};

} // namespace

void save_weights(const ToyDualEncoder& model, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp)
        throw IoError("cannot open weight snapshot for writing: " + path);
    {
        FileGuard guard{fp};
        std::fwrite("PGTK", 1, 4, fp);
        put_u32(fp, kSnapshotVersion);
        put_u32(fp, kPatchSize);
        put_u32(fp, kEmbedDim);
        put_u32(fp, kVocabSize);
        put_matrix(fp, model.image_projection);
        put_matrix(fp, model.token_table);
        put_matrix(fp, model.text_projection);
        if (std::ferror(fp))
            throw IoError("short write on weight snapshot: " + path);
    }
}

ToyDualEncoder load_weights(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp)
        throw IoError("cannot open weight snapshot: " + path);
    FileGuard guard{fp};

    char magic[4];
    if (std::fread(magic, 1, 4, fp) != 4 || std::string_view(magic, 4) != "PGTK")
        throw DecodeError("bad weight snapshot magic: " + path);
    std::uint32_t version, p, dim, vocab;
    if (!get_u32(fp, version) || !get_u32(fp, p) || !get_u32(fp, dim) || !get_u32(fp, vocab))
        throw DecodeError("truncated weight snapshot header: " + path);
    if (version != kSnapshotVersion)
        throw UnsupportedFormatError("unsupported weight snapshot version: " + path);
    if (p != kPatchSize || dim != kEmbedDim || vocab != kVocabSize)
        throw UnsupportedFormatError("weight snapshot dims do not match this build: " + path);

    ToyDualEncoder m;
    if (!get_matrix(fp, m.image_projection, static_cast<std::size_t>(kImageInputDim) * kEmbedDim)
        || !get_matrix(fp, m.token_table, static_cast<std::size_t>(kVocabSize) * kEmbedDim)
        || !get_matrix(fp, m.text_projection, static_cast<std::size_t>(kEmbedDim) * kEmbedDim))
        throw DecodeError("truncated weight snapshot: " + path);
    return m;
}

} // namespace pgtk
