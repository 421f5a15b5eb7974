#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gandiv/image.hpp"

namespace gandiv {

// Single-scale SSIM settings: 11x11 Gaussian window (sigma 1.5) and the
// usual stabilization constants for a 255 dynamic range.
struct SsimConfig {
    int window_side = 11;
    double window_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;

    double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
    double c3() const { return c2() / 2.0; }
};

// Spatial means of the luminance, contrast and structure maps.
struct SsimComponents {
    double luminance = 0.0;
    double contrast = 0.0;
    double structure = 0.0;
};

// Multi-scale settings: per-scale exponents for contrast/structure, the
// coarsest scale's weight doubling as the luminance exponent.
struct MsSsimConfig {
    int max_scales = 5;
    std::vector<double> weights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
};

struct PairSample {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // distinct indices
};

SsimComponents ssim_components(const Image& x, const Image& y, const SsimConfig& cfg = {});

// Number of scales an image of this size supports: each scale halves both
// sides (floor) and the window must still fit at the coarsest one.
int usable_scale_count(int width, int height, const MsSsimConfig& cfg = {},
                       const SsimConfig& ssim_cfg = {});

// Multi-scale structural similarity in [0, 1]. Contrast and structure are
// taken at every scale, luminance only at the coarsest; weights are
// renormalized when the image supports fewer scales than configured, and
// negative component means clamp to zero before exponentiation.
double msssim(const Image& x, const Image& y, const MsSsimConfig& cfg = {},
              const SsimConfig& ssim_cfg = {});

// n_pairs unordered distinct-index pairs drawn uniformly (with replacement
// across pairs) from a dataset of n_images, deterministic per seed.
PairSample sample_pairs(std::size_t n_images, std::size_t n_pairs, std::uint64_t seed);

double mean_msssim(const std::vector<Image>& images, const PairSample& pairs,
                   const MsSsimConfig& cfg = {}, const SsimConfig& ssim_cfg = {});

// Fake-minus-real score delta; a positive delta flags mode collapse
// (synthetic images more self-similar than the real ones).
struct CollapseVerdict {
    double delta = 0.0;
    bool collapsed = false;
};

CollapseVerdict collapse_delta(double real_score, double fake_score);

}  // namespace gandiv
