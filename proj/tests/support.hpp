#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "pgtk/image.hpp"

namespace testsupport {

pgtk::ImageBuffer random_image(int h, int w, std::uint64_t seed);
pgtk::ImageBuffer random_image_in(int h, int w, std::uint64_t seed, double lo, double hi);
pgtk::GradientField random_grad(int h, int w, std::uint64_t seed);

// Deterministic 32x32 pair k of 20. Even k pairs two independent noise
// images, odd k pairs an image with a +-0.08 perturbed copy. The frozen
// SSIM oracle values were computed from exactly these buffers.
std::pair<pgtk::ImageBuffer, pgtk::ImageBuffer> ssim_pair(int k);

// Smooth mid-contrast 64x64 sinusoid image, no RNG involved.
pgtk::ImageBuffer natural_image();

// 1 (preserved) on a border ring of the given thickness, 0 (attackable)
// inside.
pgtk::MaskImage center_mask(int h, int w, int border);

// Fresh scratch directory under the system temp root. Cleared on
// construction, left behind afterwards for post-mortem inspection.
struct TmpDir {
    std::filesystem::path path;
    explicit TmpDir(const std::string& name);
};

// Writes n seeded image/mask PNG pairs plus a JSON-lines manifest into dir.
// Returns the manifest path. Captions and deceptive texts come from small
// word pools so entries differ but stay reproducible.
std::string write_fixture_dataset(const std::filesystem::path& dir, int n, int img_size,
                                  std::uint64_t seed);

std::string read_file(const std::filesystem::path& path);

}  // namespace testsupport
