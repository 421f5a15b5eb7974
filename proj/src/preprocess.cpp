#include "gandiv/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace gandiv {

Histogram histogram_of(const Image& img, int x0, int y0, int w, int h) {
    Histogram hist(256, 0);
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) ++hist[img.at(x, y)];
    return hist;
}

Histogram clip_and_redistribute(const Histogram& hist, std::uint32_t clip_limit) {
    if (clip_limit == 0) throw std::invalid_argument("clip limit must be >= 1");
    const std::size_t n = hist.size();
    Histogram out(n);
    std::uint64_t excess = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (hist[i] > clip_limit) {
            excess += hist[i] - clip_limit;
            out[i] = clip_limit;
        } else {
            out[i] = hist[i];
        }
    }
    const std::uint64_t base = excess / n;
    const std::uint64_t residual = excess % n;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] += static_cast<std::uint32_t>(base);
        if (i < residual) ++out[i];
    }
    return out;
}

Lut equalization_lut(const Histogram& hist, std::uint32_t area) {
    Lut lut(hist.size());
    std::uint64_t cdf = 0;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        cdf += hist[i];
        lut[i] = static_cast<std::uint8_t>(
            round_half_up(255.0 * static_cast<double>(cdf) / area));
    }
    return lut;
}

namespace {

// Reflected index with the edge sample repeated (-1 -> 0, n -> n-1),
// folded until in range so kernels wider than the image stay valid.
int reflect(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

struct TileLayout {
    std::vector<int> x0, y0, tw, th;   // tile origins/extents
    std::vector<double> cx, cy;        // tile centers in pixel coordinates
};

TileLayout tile_layout(int width, int height, const WindowGrid& grid) {
    TileLayout t;
    const int bw = width / grid.tiles_x;
    const int bh = height / grid.tiles_y;
    for (int tx = 0; tx < grid.tiles_x; ++tx) {
        const int x0 = tx * bw;
        const int w = (tx + 1 == grid.tiles_x) ? width - x0 : bw;  // last tile absorbs remainder
        t.x0.push_back(x0);
        t.tw.push_back(w);
        t.cx.push_back(x0 + (w - 1) / 2.0);
    }
    for (int ty = 0; ty < grid.tiles_y; ++ty) {
        const int y0 = ty * bh;
        const int h = (ty + 1 == grid.tiles_y) ? height - y0 : bh;
        t.y0.push_back(y0);
        t.th.push_back(h);
        t.cy.push_back(y0 + (h - 1) / 2.0);
    }
    return t;
}

// Bracketing tile pair along one axis, clamped at the borders.
void bracket(const std::vector<double>& centers, double pos, int& lo, int& hi, double& frac) {
    const int n = static_cast<int>(centers.size());
    if (pos <= centers.front()) {
        lo = hi = 0;
        frac = 0.0;
        return;
    }
    if (pos >= centers.back()) {
        lo = hi = n - 1;
        frac = 0.0;
        return;
    }
    lo = 0;
    while (lo + 1 < n && centers[lo + 1] <= pos) ++lo;
    hi = lo + 1;
    frac = (pos - centers[lo]) / (centers[hi] - centers[lo]);
}

}  // namespace

Image aiin_normalize(const Image& img, const WindowGrid& grid, std::uint32_t threshold) {
    if (grid.tiles_x < 1 || grid.tiles_y < 1)
        throw std::invalid_argument("aiin: tile grid must be >= 1x1");
    if (grid.tiles_x > img.width || grid.tiles_y > img.height)
        throw std::invalid_argument("aiin: tile grid larger than image");

    const TileLayout layout = tile_layout(img.width, img.height, grid);
    std::vector<Lut> luts(static_cast<std::size_t>(grid.tiles_x) * grid.tiles_y);
    for (int ty = 0; ty < grid.tiles_y; ++ty) {
        for (int tx = 0; tx < grid.tiles_x; ++tx) {
            const std::uint32_t area =
                static_cast<std::uint32_t>(layout.tw[tx]) * layout.th[ty];
            const std::uint32_t clip = std::max<std::uint32_t>(
                1, static_cast<std::uint32_t>(
                       static_cast<std::uint64_t>(threshold) * area / 256));
            Histogram hist = histogram_of(img, layout.x0[tx], layout.y0[ty],
                                          layout.tw[tx], layout.th[ty]);
            luts[static_cast<std::size_t>(ty) * grid.tiles_x + tx] =
                equalization_lut(clip_and_redistribute(hist, clip), area);
        }
    }

    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        int ty0, ty1;
        double fy;
        bracket(layout.cy, y, ty0, ty1, fy);
        for (int x = 0; x < img.width; ++x) {
            int tx0, tx1;
            double fx;
            bracket(layout.cx, x, tx0, tx1, fx);
            const std::uint8_t v = img.at(x, y);
            const double lu = luts[static_cast<std::size_t>(ty0) * grid.tiles_x + tx0][v];
            const double ru = luts[static_cast<std::size_t>(ty0) * grid.tiles_x + tx1][v];
            const double lb = luts[static_cast<std::size_t>(ty1) * grid.tiles_x + tx0][v];
            const double rb = luts[static_cast<std::size_t>(ty1) * grid.tiles_x + tx1][v];
            const double top = (1.0 - fx) * lu + fx * ru;
            const double bot = (1.0 - fx) * lb + fx * rb;
            out.at(x, y) = clamp_u8((1.0 - fy) * top + fy * bot);
        }
    }
    return out;
}

std::vector<double> gaussian_kernel1d(int ksize) {
    if (ksize < 3 || ksize % 2 == 0)
        throw std::invalid_argument("gaussian: window side must be odd and >= 3");
    const double sigma = 0.3 * ((ksize - 1) * 0.5 - 1.0) + 0.8;
    const int c = ksize / 2;
    std::vector<double> k(ksize);
    double sum = 0.0;
    for (int i = 0; i < ksize; ++i) {
        const double d = i - c;
        k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (auto& v : k) v /= sum;
    return k;
}

Image gaussian_filter(const Image& img, int ksize) {
    const std::vector<double> k = gaussian_kernel1d(ksize);
    const int r = ksize / 2;

    std::vector<double> tmp(img.pixel_count());
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += k[i + r] * img.at(reflect(x + i, img.width), y);
            tmp[static_cast<std::size_t>(y) * img.width + x] = acc;
        }
    }
    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += k[i + r] * tmp[static_cast<std::size_t>(reflect(y + i, img.height)) * img.width + x];
            out.at(x, y) = clamp_u8(acc);
        }
    }
    return out;
}

Image median_filter(const Image& img, int ksize) {
    if (ksize < 3 || ksize % 2 == 0)
        throw std::invalid_argument("median: window side must be odd and >= 3");
    const int r = ksize / 2;
    Image out(img.width, img.height);
    std::vector<std::uint8_t> window(static_cast<std::size_t>(ksize) * ksize);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            std::size_t n = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    window[n++] = img.at(reflect(x + dx, img.width), reflect(y + dy, img.height));
            auto mid = window.begin() + static_cast<std::ptrdiff_t>(n / 2);
            std::nth_element(window.begin(), mid, window.begin() + static_cast<std::ptrdiff_t>(n));
            out.at(x, y) = *mid;
        }
    }
    return out;
}

}  // namespace gandiv
