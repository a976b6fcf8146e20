#include "pgtk/errors.hpp"
#include "pgtk/metrics.hpp"
#include "pgtk/reference.hpp"
#include "ssim_oracle.hpp"
#include "support.hpp"

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

using namespace pgtk;
using testsupport::natural_image;
using testsupport::random_image;
using testsupport::ssim_pair;

TEST_CASE("the gaussian window is normalized and symmetric") {
    const SsimParams params;
    const std::vector<double> w = params.gaussian_window();
    REQUIRE(w.size() == 121);
    double sum = 0.0;
    for (double v : w)
        sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 11; ++x) {
            CHECK(w[static_cast<std::size_t>(y) * 11 + x] == w[static_cast<std::size_t>(x) * 11 + y]);
            CHECK(w[static_cast<std::size_t>(y) * 11 + x]
                  == w[static_cast<std::size_t>(10 - y) * 11 + (10 - x)]);
        }
    CHECK(w[5 * 11 + 5] > w[0]);
}

TEST_CASE("an image compared with itself scores one") {
    CHECK(ssim(natural_image(), natural_image()) == 1.0);
    const ImageBuffer noise = random_image(32, 32, 3);
    CHECK(ssim(noise, noise) == 1.0);
}

TEST_CASE("twenty seeded pairs match the frozen reference values") {
    for (int k = 0; k < 20; ++k) {
        const auto [x, y] = ssim_pair(k);
        const double got = ssim(x, y);
        CHECK(std::abs(got - testsupport::kSsimOracle[k]) <= 1e-9);
    }
}

TEST_CASE("inverting a natural image destroys similarity") {
    const ImageBuffer img = natural_image();
    ImageBuffer inv = img;
    for (double& v : inv.data)
        v = 1.0 - v;
    const double s = ssim(img, inv);
    CHECK(std::abs(s - testsupport::kSsimNaturalInverted) <= 1e-9);
    CHECK(s < 0.3);
}

TEST_CASE("the measure is symmetric") {
    for (int k : {0, 1, 7}) {
        const auto [x, y] = ssim_pair(k);
        CHECK(ssim(x, y) == ssim(y, x));
    }
}

TEST_CASE("scores never exceed one") {
    for (int k = 0; k < 20; ++k) {
        const auto [x, y] = ssim_pair(k);
        CHECK(ssim(x, y) <= 1.0 + 1e-12);
    }
    // Near-duplicate pairs stay close to one.
    for (int k = 1; k < 20; k += 2)
        CHECK(ssim(ssim_pair(k).first, ssim_pair(k).second) > 0.9);
}

TEST_CASE("the serial reference implementation agrees") {
    const SsimParams params;
    for (int k : {0, 3, 11}) {
        const auto [x, y] = ssim_pair(k);
        CHECK(std::abs(ssim(x, y, params) - reference::ssim(x, y, params)) <= 1e-12);
    }
}

TEST_CASE("dimension checks reject unusable inputs") {
    CHECK_THROWS_AS(ssim(random_image(32, 32, 1), random_image(32, 31, 2)), DimensionError);
    CHECK_THROWS_AS(ssim(random_image(8, 8, 1), random_image(8, 8, 2)), DimensionError);
    // A smaller window fits where the default cannot.
    SsimParams small;
    small.window_size = 5;
    CHECK_NOTHROW(ssim(random_image(8, 8, 1), random_image(8, 8, 2), small));
}

TEST_CASE("the final score weights success by similarity") {
    CHECK(final_score({{1, 0.8}}) == 0.9);
    CHECK(final_score({{0, 0.8}}) == 0.0);
    CHECK(final_score({{1, 1.0}, {0, 0.5}}) == 0.5);
    CHECK(final_score({{1, -1.0}}) == 0.0);

    // Alpha 1 collapses to the mean success rate.
    const std::vector<ScoreEntry> entries = {{1, 0.3}, {0, 0.9}, {1, 0.7}, {1, 0.1}};
    CHECK(final_score(entries, 1.0) == 3.0 / 4.0);

    // Alpha 0 is the mean of asr * ssim.
    double want = 0.0;
    for (const ScoreEntry& e : entries)
        want += e.asr * e.ssim;
    want /= static_cast<double>(entries.size());
    CHECK(std::abs(final_score(entries, 0.0) - want) <= 1e-15);
}

TEST_CASE("score validation rejects malformed entries") {
    CHECK_THROWS_AS(final_score({}), ConfigError);
    CHECK_THROWS_AS(final_score({{1, 0.5}}, 1.5), ConfigError);
    CHECK_THROWS_AS(final_score({{1, 0.5}}, -0.1), ConfigError);
    CHECK_THROWS_AS(final_score({{2, 0.5}}), ConfigError);
    CHECK_THROWS_AS(final_score({{1, 1.5}}), ConfigError);
    CHECK_THROWS_AS(final_score({{1, -1.5}}), ConfigError);
}

TEST_CASE("raising any entry never lowers the score") {
    std::vector<ScoreEntry> entries = {{1, 0.2}, {0, 0.6}, {1, 0.9}};
    const double base = final_score(entries);
    entries[1].asr = 1;
    const double flipped = final_score(entries);
    CHECK(flipped >= base);
    entries[0].ssim = 0.8;
    CHECK(final_score(entries) >= flipped);
}

TEST_CASE("the retrieval oracle needs honest decoys") {
    const ToyDualEncoder m = init_model(7);
    CHECK_THROWS_AS(SurrogateRetrievalOracle(m, {"a red car"}, {}), ConfigError);
    CHECK_THROWS_AS(SurrogateRetrievalOracle(m, {"a red car"}, {{"a red car"}}), ConfigError);
    CHECK_THROWS_AS(SurrogateRetrievalOracle(m, {"a red car"}, {{" a red car "}}), ConfigError);
}

TEST_CASE("a clean image keeps its best-matching caption") {
    const ToyDualEncoder m = init_model(7);
    const ImageBuffer img = natural_image();
    const Embedding e = embed_image(m, img);

    const std::vector<Caption> pool = {
        {"a red car"}, {"two dogs"}, {"a green bus"}, {"an empty road"}, {"three bicycles"}};
    std::size_t best = 0;
    double best_cos = -2.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const double c = e.dot(embed_text(m, pool[i]));
        if (c > best_cos) {
            best_cos = c;
            best = i;
        }
    }
    std::vector<Caption> decoys;
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (i != best)
            decoys.push_back(pool[i]);

    const SurrogateRetrievalOracle oracle(m, pool[best], decoys);
    CHECK(oracle.evaluate(img) == 0);
}

TEST_CASE("an image matching a decoy counts as a flip") {
    const ToyDualEncoder m = init_model(7);
    const ImageBuffer img = natural_image();
    const Embedding e = embed_image(m, img);

    const std::vector<Caption> pool = {
        {"a red car"}, {"two dogs"}, {"a green bus"}, {"an empty road"}, {"three bicycles"}};
    std::size_t worst = 0;
    double worst_cos = 2.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const double c = e.dot(embed_text(m, pool[i]));
        if (c < worst_cos) {
            worst_cos = c;
            worst = i;
        }
    }
    std::vector<Caption> decoys;
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (i != worst)
            decoys.push_back(pool[i]);

    const SurrogateRetrievalOracle oracle(m, pool[worst], decoys);
    CHECK(oracle.evaluate(img) == 1);
}

TEST_CASE("an exact cosine tie counts as a failure") {
    const ToyDualEncoder m = init_model(7);
    // Tokenization lowercases, so this decoy embeds identically to the truth
    // while passing the distinct-text check.
    const SurrogateRetrievalOracle oracle(m, {"a red car"}, {{"A RED CAR"}});
    CHECK(oracle.evaluate(natural_image()) == 0);
    CHECK(oracle.evaluate(random_image(24, 24, 9)) == 0);
}
