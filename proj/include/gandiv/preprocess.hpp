#pragma once

#include <cstdint>
#include <vector>

#include "gandiv/image.hpp"

namespace gandiv {

// Per-tile intensity histogram. Bin count is 256 for 8-bit tiles; the
// clip/redistribute rule itself works for any bin count.
using Histogram = std::vector<std::uint32_t>;

// Equalization lookup table, one output intensity per input intensity.
using Lut = std::vector<std::uint8_t>;

// Tile grid of the adaptive equalization: counts of tiles per axis.
struct WindowGrid {
    int tiles_x = 8;
    int tiles_y = 8;
};

Histogram histogram_of(const Image& img, int x0, int y0, int w, int h);

// Caps every bin at clip_limit and hands the excess back: floor(excess/n)
// to every bin, the remainder one-per-bin from index 0 upward. Total mass
// is preserved exactly; redistributed bins may end above the limit.
Histogram clip_and_redistribute(const Histogram& hist, std::uint32_t clip_limit);

// Equalization LUT from the inclusive cumulative histogram of a region
// holding `area` pixels. Entries are monotone non-decreasing.
Lut equalization_lut(const Histogram& hist, std::uint32_t area);

// Adaptive input-image normalization: contrast-limited adaptive histogram
// equalization over a tiles_x x tiles_y grid. Edge tiles absorb remainder
// pixels; per-tile clip limit is max(1, floor(threshold * tile_area / 256));
// pixels are mapped by bilinear interpolation between the LUTs of the four
// nearest tile centers, clamped at the borders.
Image aiin_normalize(const Image& img, const WindowGrid& grid, std::uint32_t threshold);

// 1-D Gaussian taps for an odd window, sigma = 0.3*((ksize-1)*0.5 - 1) + 0.8,
// normalized to sum 1.
std::vector<double> gaussian_kernel1d(int ksize);

// Separable Gaussian smoothing with reflected borders.
Image gaussian_filter(const Image& img, int ksize);

// ksize x ksize median with reflected borders; the window area is odd so the
// median is always a single sample.
Image median_filter(const Image& img, int ksize);

}  // namespace gandiv
