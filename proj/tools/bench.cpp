#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "pgtk/image.hpp"
#include "pgtk/metrics.hpp"
#include "pgtk/reference.hpp"
#include "pgtk/rng.hpp"

namespace {

pgtk::ImageBuffer random_image(int h, int w, std::uint64_t seed) {
    pgtk::ImageBuffer img(h, w);
    std::mt19937_64 gen(seed);
    for (double& v : img.data) v = pgtk::uniform01(gen);
    return img;
}

pgtk::GradientField random_grad(int h, int w, std::uint64_t seed) {
    pgtk::GradientField g(h, w);
    std::mt19937_64 gen(seed);
    for (double& v : g.data) v = pgtk::uniform(gen, -1.0, 1.0);
    return g;
}

double best_seconds(const std::function<void()>& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        best = std::min(best, s);
    }
    return best;
}

void report(const char* name, double serial_s, double parallel_s, double max_delta) {
    std::printf("%-18s %10.2f ms %10.2f ms %7.2fx   max|d|=%.3g\n", name, serial_s * 1e3,
                parallel_s * 1e3, serial_s / parallel_s, max_delta);
}

double max_abs(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    int size = 768;
    int reps = 5;
    int threads = 0;

    CLI::App app{"serial reference vs parallel kernel timings"};
    app.add_option("--size", size, "base image side length")->check(CLI::Range(64, 8192));
    app.add_option("--reps", reps, "repetitions, best time wins")->check(CLI::Range(1, 100));
    app.add_option("--threads", threads, "OpenMP threads (0 keeps the default)");
    CLI11_PARSE(app, argc, argv);

    if (threads > 0) omp_set_num_threads(threads);
    std::printf("size %dx%d, %d reps, %d thread(s)\n\n", size, size, reps, omp_get_max_threads());
    std::printf("%-18s %13s %13s %8s\n", "kernel", "serial", "parallel", "speedup");

    const pgtk::ImageBuffer img = random_image(size, size, 11);
    const pgtk::ImageBuffer adv = random_image(size, size, 12);
    const pgtk::GradientField grad = random_grad(size / 2, size / 2, 13);
    pgtk::MaskImage mask(size, size);
    {
        std::mt19937_64 gen(14);
        for (auto& v : mask.data) v = pgtk::uniform01(gen) < 0.5 ? 0 : 1;
    }

    {
        const int oh = size / 2, ow = size / 2;
        pgtk::ImageBuffer a, b;
        const double ts = best_seconds([&] { a = pgtk::reference::resize_bilinear_dims(img, oh, ow); }, reps);
        const double tp = best_seconds([&] { b = pgtk::resize_bilinear_dims(img, oh, ow); }, reps);
        report("resize_bilinear", ts, tp, max_abs(a.data, b.data));
    }
    {
        pgtk::GradientField a, b;
        const double ts = best_seconds([&] { a = pgtk::reference::resize_adjoint(grad, size, size); }, reps);
        const double tp = best_seconds([&] { b = pgtk::resize_adjoint(grad, size, size); }, reps);
        report("resize_adjoint", ts, tp, max_abs(a.data, b.data));
    }
    {
        pgtk::ImageBuffer a, b;
        const double ts = best_seconds([&] { a = pgtk::reference::clip_linf(adv, img, 16.0 / 255.0); }, reps);
        const double tp = best_seconds([&] { b = pgtk::clip_linf(adv, img, 16.0 / 255.0); }, reps);
        report("clip_linf", ts, tp, max_abs(a.data, b.data));
    }
    {
        pgtk::ImageBuffer a, b;
        const double ts = best_seconds([&] { a = pgtk::reference::masked_compose(img, adv, mask); }, reps);
        const double tp = best_seconds([&] { b = pgtk::masked_compose(img, adv, mask); }, reps);
        report("masked_compose", ts, tp, max_abs(a.data, b.data));
    }
    {
        const pgtk::GradientField big = random_grad(size, size, 15);
        double a = 0.0, b = 0.0;
        const double ts = best_seconds([&] { a = pgtk::reference::l1_norm(big); }, reps);
        const double tp = best_seconds([&] { b = pgtk::l1_norm(big); }, reps);
        report("l1_norm", ts, tp, std::abs(a - b));
    }
    {
        const pgtk::SsimParams params;
        double a = 0.0, b = 0.0;
        const double ts = best_seconds([&] { a = pgtk::reference::ssim(img, adv, params); }, reps);
        const double tp = best_seconds([&] { b = pgtk::ssim(img, adv, params); }, reps);
        report("ssim", ts, tp, std::abs(a - b));
    }
    return 0;
}
