#include "support.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "pgtk/png_io.hpp"
#include "pgtk/rng.hpp"

namespace testsupport {

pgtk::ImageBuffer random_image(int h, int w, std::uint64_t seed) {
    return random_image_in(h, w, seed, 0.0, 1.0);
}

pgtk::ImageBuffer random_image_in(int h, int w, std::uint64_t seed, double lo, double hi) {
    pgtk::ImageBuffer img(h, w);
    std::mt19937_64 gen(seed);
    for (double& v : img.data) v = pgtk::uniform(gen, lo, hi);
    return img;
}

pgtk::GradientField random_grad(int h, int w, std::uint64_t seed) {
    pgtk::GradientField g(h, w);
    std::mt19937_64 gen(seed);
    for (double& v : g.data) v = pgtk::uniform(gen, -1.0, 1.0);
    return g;
}

std::pair<pgtk::ImageBuffer, pgtk::ImageBuffer> ssim_pair(int k) {
    const pgtk::ImageBuffer x = random_image(32, 32, 1000 + static_cast<std::uint64_t>(k));
    if (k % 2 == 0) {
        return {x, random_image(32, 32, 2000 + static_cast<std::uint64_t>(k))};
    }
    pgtk::ImageBuffer y = x;
    std::mt19937_64 gen(2000 + static_cast<std::uint64_t>(k));
    for (double& v : y.data) {
        v += pgtk::uniform(gen, -0.08, 0.08);
        v = std::min(1.0, std::max(0.0, v));
    }
    return {x, y};
}

pgtk::ImageBuffer natural_image() {
    pgtk::ImageBuffer img(64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(y, x, c) = 0.5 + 0.2 * std::sin(2.0 * 3.14159265358979323846 * y / 16.0 + c) *
                                            std::cos(2.0 * 3.14159265358979323846 * x / 19.0);
    return img;
}

pgtk::MaskImage center_mask(int h, int w, int border) {
    pgtk::MaskImage mask(h, w, 1);
    for (int y = border; y < h - border; ++y)
        for (int x = border; x < w - border; ++x) mask.at(y, x) = 0;
    return mask;
}

TmpDir::TmpDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / "pgtk_tests" / name;
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
}

std::string write_fixture_dataset(const std::filesystem::path& dir, int n, int img_size,
                                  std::uint64_t seed) {
    static const char* kColors[] = {"red", "green", "blue", "yellow"};
    static const char* kObjects[] = {"car", "boat", "plane", "truck"};
    static const char* kTasks[] = {"color", "classification", "counting"};

    const std::filesystem::path manifest_path = dir / "manifest.jsonl";
    std::ofstream manifest(manifest_path);
    for (int i = 0; i < n; ++i) {
        const std::string id = "img" + std::to_string(i);
        const pgtk::ImageBuffer img =
            random_image(img_size, img_size, seed * 1000 + static_cast<std::uint64_t>(i));
        const std::filesystem::path img_path = dir / (id + "_in.png");
        pgtk::save_png(img, img_path.string());

        pgtk::ImageBuffer mask_img(img_size, img_size, 1.0);
        const int border = img_size / 8;
        for (int y = border; y < img_size - border; ++y)
            for (int x = border; x < img_size - border; ++x)
                for (int c = 0; c < 3; ++c) mask_img.at(y, x, c) = 0.0;
        const std::filesystem::path mask_path = dir / (id + "_mask.png");
        pgtk::save_png(mask_img, mask_path.string());

        const char* color = kColors[i % 4];
        const char* object = kObjects[(i / 4 + i) % 4];
        const char* wrong_color = kColors[(i + 1) % 4];
        const char* wrong_object = kObjects[(i / 4 + i + 2) % 4];
        manifest << "{\"id\":\"" << id << "\",\"image_path\":\"" << img_path.generic_string()
                 << "\",\"mask_path\":\"" << mask_path.generic_string() << "\",\"caption\":\"a "
                 << color << " " << object << " on the road\",\"task\":\"" << kTasks[i % 3]
                 << "\",\"deceptive_texts\":[\"the " << object << " is clearly " << wrong_color
                 << "\",\"there is no " << object << " here\",\"this is a " << wrong_object
                 << "\"]}\n";
    }
    return manifest_path.string();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace testsupport
