#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gandiv/image.hpp"
#include "gandiv/linalg.hpp"

namespace gandiv {

inline constexpr std::size_t kPatchFeatureDim = 768;

// Gaussian fit of a feature sample: mean vector and covariance.
struct GaussianStats {
    std::vector<double> mu;
    SymMatrix sigma;
};

// Deterministic 768-dim descriptor: resize to 128x128, split into a 16x16
// grid of 8x8 cells, emit (mean, stddev, mean Sobel gradient magnitude)
// per cell, each normalized by 255. Cells row-major, stats innermost.
std::vector<double> extract_patchstats(const Image& img);

Matrix patchstats_features(const std::vector<Image>& images);

// Mean/covariance of row-sample features; eps adds eps*I to the covariance
// for ill-conditioned samples (default off).
GaussianStats gaussian_stats(const Matrix& features, double eps = 0.0);

// Frechet distance between two Gaussian fits:
// |mu_r - mu_s|^2 + tr(sigma_r) + tr(sigma_s) - 2 tr((sigma_r sigma_s)^(1/2)).
// Round-off negatives within 1e-6 clamp to zero.
double fid(const GaussianStats& r, const GaussianStats& s);

// Feature CSV: one row per sample, equal-length comma-separated decimals,
// no header. Import errors name the offending line.
Matrix import_features(std::istream& in);
Matrix import_features_string(const std::string& text);
void export_features(std::ostream& out, const Matrix& features);

Matrix load_features(const std::string& path);
void save_features(const std::string& path, const Matrix& features);

}  // namespace gandiv
