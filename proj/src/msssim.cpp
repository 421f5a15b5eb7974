#include "gandiv/msssim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gandiv/rng.hpp"

namespace gandiv {

namespace {

// Continuous-valued image used between scales; pooling leaves the integer
// grid behind after the first downsample.
struct DImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

DImage to_dimage(const Image& img) {
    DImage d;
    d.width = img.width;
    d.height = img.height;
    d.data.assign(img.data.begin(), img.data.end());
    return d;
}

DImage downsample2x2(const DImage& src) {
    DImage dst;
    dst.width = src.width / 2;
    dst.height = src.height / 2;
    dst.data.resize(static_cast<std::size_t>(dst.width) * dst.height);
    for (int y = 0; y < dst.height; ++y)
        for (int x = 0; x < dst.width; ++x)
            dst.data[static_cast<std::size_t>(y) * dst.width + x] =
                0.25 * (src.at(2 * x, 2 * y) + src.at(2 * x + 1, 2 * y) +
                        src.at(2 * x, 2 * y + 1) + src.at(2 * x + 1, 2 * y + 1));
    return dst;
}

std::vector<double> window_weights(const SsimConfig& cfg) {
    const int n = cfg.window_side;
    const int c = n / 2;
    std::vector<double> w(static_cast<std::size_t>(n) * n);
    double sum = 0.0;
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const double dx = x - c;
            const double dy = y - c;
            const double v = std::exp(-(dx * dx + dy * dy) /
                                      (2.0 * cfg.window_sigma * cfg.window_sigma));
            w[static_cast<std::size_t>(y) * n + x] = v;
            sum += v;
        }
    }
    for (auto& v : w) v /= sum;
    return w;
}

// Component maps over every position where the window fits, averaged.
SsimComponents components_of(const DImage& x, const DImage& y, const SsimConfig& cfg) {
    if (x.width != y.width || x.height != y.height)
        throw std::invalid_argument("ssim: image dimensions differ");
    const int n = cfg.window_side;
    if (x.width < n || x.height < n)
        throw std::invalid_argument("ssim: image smaller than the window");

    const std::vector<double> w = window_weights(cfg);
    const double c1 = cfg.c1();
    const double c2 = cfg.c2();
    const double c3 = cfg.c3();

    double lsum = 0.0, csum = 0.0, ssum = 0.0;
    std::size_t count = 0;
    for (int oy = 0; oy + n <= x.height; ++oy) {
        for (int ox = 0; ox + n <= x.width; ++ox) {
            double mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
            std::size_t wi = 0;
            for (int dy = 0; dy < n; ++dy) {
                for (int dx = 0; dx < n; ++dx, ++wi) {
                    const double xv = x.at(ox + dx, oy + dy);
                    const double yv = y.at(ox + dx, oy + dy);
                    const double wv = w[wi];
                    mx += wv * xv;
                    my += wv * yv;
                    mxx += wv * xv * xv;
                    myy += wv * yv * yv;
                    mxy += wv * xv * yv;
                }
            }
            const double vx = std::max(mxx - mx * mx, 0.0);
            const double vy = std::max(myy - my * my, 0.0);
            const double cov = mxy - mx * my;
            const double sx = std::sqrt(vx);
            const double sy = std::sqrt(vy);

            lsum += (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
            csum += (2.0 * sx * sy + c2) / (vx + vy + c2);
            ssum += (cov + c3) / (sx * sy + c3);
            ++count;
        }
    }
    return {lsum / count, csum / count, ssum / count};
}

}  // namespace

SsimComponents ssim_components(const Image& x, const Image& y, const SsimConfig& cfg) {
    return components_of(to_dimage(x), to_dimage(y), cfg);
}

int usable_scale_count(int width, int height, const MsSsimConfig& cfg,
                       const SsimConfig& ssim_cfg) {
    int side = std::min(width, height);
    int scales = 0;
    while (scales < cfg.max_scales && side >= ssim_cfg.window_side) {
        ++scales;
        side /= 2;
    }
    return scales;
}

double msssim(const Image& x, const Image& y, const MsSsimConfig& cfg,
              const SsimConfig& ssim_cfg) {
    if (x.width != y.width || x.height != y.height)
        throw std::invalid_argument("msssim: image dimensions differ");
    const int scales = usable_scale_count(x.width, x.height, cfg, ssim_cfg);
    if (scales < 1)
        throw std::invalid_argument("msssim: image smaller than one window at scale 1");
    if (static_cast<std::size_t>(scales) > cfg.weights.size())
        throw std::invalid_argument("msssim: weight list shorter than scale count");

    double weight_sum = 0.0;
    for (int j = 0; j < scales; ++j) weight_sum += cfg.weights[j];

    DImage xs = to_dimage(x);
    DImage ys = to_dimage(y);
    double result = 1.0;
    for (int j = 0; j < scales; ++j) {
        const SsimComponents comp = components_of(xs, ys, ssim_cfg);
        const double wj = cfg.weights[j] / weight_sum;
        result *= std::pow(std::max(comp.contrast, 0.0), wj);
        result *= std::pow(std::max(comp.structure, 0.0), wj);
        if (j + 1 == scales) {
            result *= std::pow(std::max(comp.luminance, 0.0), wj);
        } else {
            xs = downsample2x2(xs);
            ys = downsample2x2(ys);
        }
    }
    return result;
}

PairSample sample_pairs(std::size_t n_images, std::size_t n_pairs, std::uint64_t seed) {
    if (n_images < 2) throw std::invalid_argument("sample_pairs: needs at least 2 images");
    Rng rng(seed);
    PairSample sample;
    sample.pairs.reserve(n_pairs);
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const std::size_t a = rng.below(n_images);
        std::size_t b = rng.below(n_images - 1);
        if (b >= a) ++b;
        sample.pairs.emplace_back(std::min(a, b), std::max(a, b));
    }
    return sample;
}

double mean_msssim(const std::vector<Image>& images, const PairSample& pairs,
                   const MsSsimConfig& cfg, const SsimConfig& ssim_cfg) {
    if (pairs.pairs.empty()) throw std::invalid_argument("mean_msssim: empty pair list");
    double sum = 0.0;
    for (const auto& [a, b] : pairs.pairs) {
        if (a >= images.size() || b >= images.size())
            throw std::invalid_argument("mean_msssim: pair index out of range");
        sum += msssim(images[a], images[b], cfg, ssim_cfg);
    }
    return sum / static_cast<double>(pairs.pairs.size());
}

CollapseVerdict collapse_delta(double real_score, double fake_score) {
    if (real_score < 0.0 || real_score > 1.0 || fake_score < 0.0 || fake_score > 1.0)
        throw std::invalid_argument("collapse_delta: scores must lie in [0, 1]");
    CollapseVerdict v;
    v.delta = fake_score - real_score;
    v.collapsed = v.delta > 0.0;
    return v;
}

}  // namespace gandiv
