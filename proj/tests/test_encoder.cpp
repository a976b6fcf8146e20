#include "pgtk/encoder.hpp"
#include "pgtk/errors.hpp"
#include "pgtk/image.hpp"
#include "pgtk/rng.hpp"
#include "support.hpp"

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

using namespace pgtk;
using testsupport::random_image;

namespace {

constexpr std::uint64_t kSeed = 7;

const ToyDualEncoder& model() {
    static const ToyDualEncoder m = init_model(kSeed);
    return m;
}

// Mean-over-captions loss, the scalar grad_wrt_pixels differentiates.
double mean_loss(const ToyDualEncoder& m, const ImageBuffer& img, const std::vector<Caption>& caps) {
    const Embedding e = embed_image(m, img);
    double s = 0.0;
    for (const Caption& c : caps)
        s += loss(e, embed_text(m, c));
    return s / static_cast<double>(caps.size());
}

double max_component_diff(const Embedding& a, const Embedding& b) {
    double m = 0.0;
    for (int k = 0; k < kEmbedDim; ++k)
        m = std::max(m, std::abs(a.v[k] - b.v[k]));
    return m;
}

} // namespace

TEST_CASE("weights are a pure function of the seed") {
    const ToyDualEncoder a = init_model(123);
    const ToyDualEncoder b = init_model(123);
    CHECK(a.image_projection == b.image_projection);
    CHECK(a.token_table == b.token_table);
    CHECK(a.text_projection == b.text_projection);

    const ToyDualEncoder c = init_model(124);
    CHECK(a.image_projection != c.image_projection);
}

TEST_CASE("seed zero weights are finite and bounded") {
    const ToyDualEncoder m = init_model(0);
    int nonzero = 0;
    for (const std::vector<double>* w : {&m.image_projection, &m.token_table, &m.text_projection})
        for (double v : *w) {
            CHECK(std::isfinite(v));
            CHECK(std::abs(v) < 1.0);
            nonzero += v != 0.0;
        }
    CHECK(nonzero > 0);
}

TEST_CASE("token hashing is FNV-1a folded into the vocabulary") {
    // Reference value for the standard 64-bit FNV-1a of "a".
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(hash_token("a") == 0xaf63dc4c8601ec8cull % kVocabSize);
    for (const char* tok : {"car", "red", "bicycle", "zero"}) {
        std::uint64_t h = 14695981039346656037ull;
        for (const char* p = tok; *p; ++p) {
            h ^= static_cast<unsigned char>(*p);
            h *= 1099511628211ull;
        }
        CHECK(hash_token(tok) == h % kVocabSize);
    }
}

TEST_CASE("image embeddings are unit length and deterministic") {
    const ImageBuffer img = random_image(24, 24, 42);
    const Embedding e1 = embed_image(model(), img);
    const Embedding e2 = embed_image(model(), img);
    CHECK(std::abs(e1.norm() - 1.0) <= 1e-12);
    CHECK(max_component_diff(e1, e2) == 0.0);
}

TEST_CASE("the zero image hits the normalization floor") {
    const ImageBuffer zero(16, 16, 0.0);
    const Embedding e = embed_image(model(), zero);
    for (double v : e.v)
        CHECK(v == 0.0);
}

TEST_CASE("a patch-resolution image matches an explicit trace") {
    const ImageBuffer img = random_image(kPatchSize, kPatchSize, 77);
    const Embedding got = embed_image(model(), img);

    const int in_dim = kPatchSize * kPatchSize * 3;
    std::array<double, kEmbedDim> z{};
    for (int k = 0; k < kEmbedDim; ++k) {
        double s = 0.0;
        for (int i = 0; i < in_dim; ++i)
            s += img.data[static_cast<std::size_t>(i)]
                 * model().image_projection[static_cast<std::size_t>(i) * kEmbedDim + k];
        z[static_cast<std::size_t>(k)] = s;
    }
    double sq = 0.0;
    std::array<double, kEmbedDim> u{};
    for (int k = 0; k < kEmbedDim; ++k) {
        u[static_cast<std::size_t>(k)] = std::tanh(z[static_cast<std::size_t>(k)]);
        sq += u[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(k)];
    }
    const double denom = std::max(std::sqrt(sq), kNormFloor);
    for (int k = 0; k < kEmbedDim; ++k)
        CHECK(got.v[static_cast<std::size_t>(k)] == u[static_cast<std::size_t>(k)] / denom);
}

TEST_CASE("text embeddings ignore case and token order") {
    const Embedding base = embed_text(model(), {"a red car"});
    CHECK(std::abs(base.norm() - 1.0) <= 1e-12);

    const Embedding upper = embed_text(model(), {"A Red CAR"});
    CHECK(max_component_diff(base, upper) == 0.0);

    const Embedding shuffled = embed_text(model(), {"car red a"});
    CHECK(max_component_diff(base, shuffled) <= 1e-12);

    const Embedding spaced = embed_text(model(), {"  a   red car "});
    CHECK(max_component_diff(base, spaced) == 0.0);

    CHECK_THROWS_AS(embed_text(model(), {""}), ConfigError);
    CHECK_THROWS_AS(embed_text(model(), {"   "}), ConfigError);
}

TEST_CASE("a single token matches an explicit trace") {
    const Embedding got = embed_text(model(), {"car"});
    const std::uint32_t id = hash_token("car");
    std::array<double, kEmbedDim> z{};
    for (int k = 0; k < kEmbedDim; ++k) {
        double s = 0.0;
        for (int j = 0; j < kEmbedDim; ++j)
            s += model().token_table[static_cast<std::size_t>(id) * kEmbedDim + j]
                 * model().text_projection[static_cast<std::size_t>(j) * kEmbedDim + k];
        z[static_cast<std::size_t>(k)] = s;
    }
    double sq = 0.0;
    std::array<double, kEmbedDim> u{};
    for (int k = 0; k < kEmbedDim; ++k) {
        u[static_cast<std::size_t>(k)] = std::tanh(z[static_cast<std::size_t>(k)]);
        sq += u[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(k)];
    }
    const double denom = std::max(std::sqrt(sq), kNormFloor);
    for (int k = 0; k < kEmbedDim; ++k)
        CHECK(got.v[static_cast<std::size_t>(k)] == u[static_cast<std::size_t>(k)] / denom);
}

TEST_CASE("the loss hits its three landmark values") {
    Embedding same, anti, ortho;
    same.v[0] = 1.0;
    anti.v[0] = -1.0;
    ortho.v[1] = 1.0;
    CHECK(loss(same, same) == 0.0);
    CHECK(loss(same, anti) == 2.0);
    CHECK(loss(same, ortho) == 1.0);
    // Symmetric in its arguments.
    const Embedding a = embed_image(model(), random_image(8, 8, 5));
    const Embedding b = embed_text(model(), {"a bus"});
    CHECK(loss(a, b) == loss(b, a));
}

TEST_CASE("analytic gradients match central differences") {
    const std::vector<Caption> caps = {{"a red car"}, {"two dogs"}};
    const double h = 1e-4;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        ImageBuffer img = random_image(8, 8, 300 + seed);
        const GradientField g = grad_wrt_pixels(model(), img, caps);
        REQUIRE(g.height == 8);
        REQUIRE(g.width == 8);
        double worst = 0.0;
        for (std::size_t i = 0; i < img.size(); ++i) {
            if (std::abs(g.data[i]) <= 1e-8)
                continue;
            const double keep = img.data[i];
            img.data[i] = keep + h;
            const double up = mean_loss(model(), img, caps);
            img.data[i] = keep - h;
            const double dn = mean_loss(model(), img, caps);
            img.data[i] = keep;
            const double fd = (up - dn) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - g.data[i]) / std::abs(g.data[i]));
        }
        CHECK(worst <= 1e-3);
    }
}

TEST_CASE("replicated captions leave the gradient unchanged") {
    const ImageBuffer img = random_image(8, 8, 400);
    const GradientField once = grad_wrt_pixels(model(), img, {{"a red car", 1}});
    const GradientField tagged = grad_wrt_pixels(model(), img, {{"a red car", 3}});
    // The replication count is pmp bookkeeping; the gradient reads the list.
    for (std::size_t i = 0; i < once.size(); ++i)
        CHECK(tagged.data[i] == once.data[i]);

    const GradientField expanded =
        grad_wrt_pixels(model(), img, {{"a red car"}, {"a red car"}, {"a red car"}});
    for (std::size_t i = 0; i < once.size(); ++i)
        CHECK(std::abs(expanded.data[i] - once.data[i]) <= 1e-12);
}

TEST_CASE("two captions average the single-caption gradients") {
    const ImageBuffer img = random_image(8, 8, 401);
    const GradientField ga = grad_wrt_pixels(model(), img, {{"a red car"}});
    const GradientField gb = grad_wrt_pixels(model(), img, {{"two dogs"}});
    const GradientField gab = grad_wrt_pixels(model(), img, {{"a red car"}, {"two dogs"}});
    for (std::size_t i = 0; i < gab.size(); ++i)
        CHECK(std::abs(gab.data[i] - 0.5 * (ga.data[i] + gb.data[i])) <= 1e-9);
}

TEST_CASE("gradients need at least one caption") {
    CHECK_THROWS_AS(grad_wrt_pixels(model(), random_image(8, 8, 402), {}), ConfigError);
}

TEST_CASE("weight snapshots round-trip through f32") {
    testsupport::TmpDir tmp("encoder_snapshot");
    const std::string path = (tmp.path / "w.pgtk").string();
    save_weights(model(), path);
    const ToyDualEncoder back = load_weights(path);

    REQUIRE(back.image_projection.size() == model().image_projection.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < back.token_table.size(); ++i)
        worst = std::max(worst, std::abs(back.token_table[i] - model().token_table[i]));
    CHECK(worst <= 6e-8);  // one f32 ulp at this magnitude

    // Quantization is idempotent: a resave emits identical bytes.
    const std::string again = (tmp.path / "w2.pgtk").string();
    save_weights(back, again);
    CHECK(testsupport::read_file(path) == testsupport::read_file(again));

    // Embeddings barely move.
    const ImageBuffer img = random_image(16, 16, 500);
    CHECK(embed_image(model(), img).dot(embed_image(back, img)) > 0.999999);
}

TEST_CASE("snapshot loading rejects damaged files") {
    testsupport::TmpDir tmp("encoder_snapshot_bad");
    const std::string path = (tmp.path / "w.pgtk").string();
    save_weights(model(), path);
    std::string bytes = testsupport::read_file(path);

    CHECK_THROWS_AS(load_weights((tmp.path / "missing.pgtk").string()), IoError);

    const std::string magic = (tmp.path / "magic.pgtk").string();
    {
        std::string b = bytes;
        b[0] = 'X';
        std::ofstream(magic, std::ios::binary).write(b.data(), static_cast<std::streamsize>(b.size()));
    }
    CHECK_THROWS_AS(load_weights(magic), DecodeError);

    const std::string version = (tmp.path / "version.pgtk").string();
    {
        std::string b = bytes;
        b[4] = 2;
        std::ofstream(version, std::ios::binary).write(b.data(), static_cast<std::streamsize>(b.size()));
    }
    CHECK_THROWS_AS(load_weights(version), UnsupportedFormatError);

    const std::string dims = (tmp.path / "dims.pgtk").string();
    {
        std::string b = bytes;
        b[8] = 16;  // claims P = 16
        std::ofstream(dims, std::ios::binary).write(b.data(), static_cast<std::streamsize>(b.size()));
    }
    CHECK_THROWS_AS(load_weights(dims), UnsupportedFormatError);

    const std::string cut = (tmp.path / "cut.pgtk").string();
    std::ofstream(cut, std::ios::binary).write(bytes.data(), 4096);
    CHECK_THROWS_AS(load_weights(cut), DecodeError);
}
