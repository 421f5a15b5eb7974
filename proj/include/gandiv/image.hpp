#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace gandiv {

// 8-bit grayscale raster, row-major. The shared currency of the whole
// pipeline: preprocessing, metrics and training all consume it.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 0);

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t pixel_count() const { return data.size(); }
};

// Ties: rounds toward +inf. Used everywhere an intensity is produced.
inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

inline std::uint8_t clamp_u8(double v) {
    const int r = round_half_up(v);
    if (r < 0) return 0;
    if (r > 255) return 255;
    return static_cast<std::uint8_t>(r);
}

// PGM codec. P5 (binary) and P2 (ASCII) are accepted; maxval must be in
// [1, 255] and samples are rescaled to a 255 maxval on decode.
Image decode_pgm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_pgm(const Image& img, bool binary = true);

Image load_pgm(const std::string& path);
void save_pgm(const std::string& path, const Image& img, bool binary = true);

// Half-pixel center-aligned bilinear resampling; same-size is the identity.
Image resize_bilinear(const Image& img, int out_w, int out_h);

}  // namespace gandiv
