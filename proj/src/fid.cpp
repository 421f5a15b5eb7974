#include "gandiv/fid.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gandiv/error.hpp"

namespace gandiv {

namespace {

int reflect(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

// Sobel responses scaled by 1/4 so the magnitude stays within 255*sqrt(2).
void sobel_magnitude(const Image& img, std::vector<double>& mag) {
    const int w = img.width;
    const int h = img.height;
    mag.resize(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const int ym = reflect(y - 1, h);
        const int yp = reflect(y + 1, h);
        for (int x = 0; x < w; ++x) {
            const int xm = reflect(x - 1, w);
            const int xp = reflect(x + 1, w);
            const double gx = (img.at(xp, ym) - img.at(xm, ym)) +
                              2.0 * (img.at(xp, y) - img.at(xm, y)) +
                              (img.at(xp, yp) - img.at(xm, yp));
            const double gy = (img.at(xm, yp) - img.at(xm, ym)) +
                              2.0 * (img.at(x, yp) - img.at(x, ym)) +
                              (img.at(xp, yp) - img.at(xp, ym));
            mag[static_cast<std::size_t>(y) * w + x] = std::hypot(gx / 4.0, gy / 4.0);
        }
    }
}

}  // namespace

std::vector<double> extract_patchstats(const Image& img) {
    constexpr int kSide = 128;
    constexpr int kGrid = 16;
    constexpr int kCell = kSide / kGrid;

    const Image resized = resize_bilinear(img, kSide, kSide);
    std::vector<double> grad;
    sobel_magnitude(resized, grad);

    std::vector<double> features;
    features.reserve(kPatchFeatureDim);
    for (int cy = 0; cy < kGrid; ++cy) {
        for (int cx = 0; cx < kGrid; ++cx) {
            double sum = 0.0, sq = 0.0, gsum = 0.0;
            for (int dy = 0; dy < kCell; ++dy) {
                for (int dx = 0; dx < kCell; ++dx) {
                    const int x = cx * kCell + dx;
                    const int y = cy * kCell + dy;
                    const double v = resized.at(x, y);
                    sum += v;
                    sq += v * v;
                    gsum += grad[static_cast<std::size_t>(y) * kSide + x];
                }
            }
            constexpr double n = kCell * kCell;
            const double mean = sum / n;
            const double var = std::max(sq / n - mean * mean, 0.0);
            features.push_back(mean / 255.0);
            features.push_back(std::sqrt(var) / 255.0);
            features.push_back(gsum / n / 255.0);
        }
    }
    return features;
}

Matrix patchstats_features(const std::vector<Image>& images) {
    Matrix f(images.size(), kPatchFeatureDim);
    for (std::size_t i = 0; i < images.size(); ++i) {
        const std::vector<double> v = extract_patchstats(images[i]);
        std::copy(v.begin(), v.end(), f.row(i));
    }
    return f;
}

GaussianStats gaussian_stats(const Matrix& features, double eps) {
    GaussianStats stats;
    mean_and_covariance(features, stats.mu, stats.sigma);
    if (eps != 0.0)
        for (std::size_t i = 0; i < stats.sigma.dim; ++i) stats.sigma.at(i, i) += eps;
    return stats;
}

double fid(const GaussianStats& r, const GaussianStats& s) {
    if (r.mu.size() != s.mu.size() || r.sigma.dim != s.sigma.dim)
        throw std::invalid_argument("fid: feature dimensions differ");
    double mean_term = 0.0;
    for (std::size_t i = 0; i < r.mu.size(); ++i) {
        const double d = r.mu[i] - s.mu[i];
        mean_term += d * d;
    }
    const double value =
        mean_term + r.sigma.trace() + s.sigma.trace() - 2.0 * trace_sqrt_product(r.sigma, s.sigma);
    if (value < 0.0) {
        if (value < -1e-6)
            throw NumericError("fid: negative distance " + std::to_string(value) +
                               "; consider eps regularization of the covariances");
        return 0.0;
    }
    return value;
}

Matrix import_features(std::istream& in) {
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() && in.peek() == EOF) break;  // trailing newline
        std::size_t count = 0;
        std::size_t start = 0;
        for (;;) {
            std::size_t end = line.find(',', start);
            const std::string tok = line.substr(
                start, end == std::string::npos ? std::string::npos : end - start);
            try {
                std::size_t used = 0;
                const double v = std::stod(tok, &used);
                while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used])))
                    ++used;
                if (used != tok.size()) throw std::invalid_argument("trailing junk");
                if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
                values.push_back(v);
            } catch (const std::exception&) {
                throw IoError("features: non-numeric token '" + tok + "' at line " +
                              std::to_string(lineno));
            }
            ++count;
            if (end == std::string::npos) break;
            start = end + 1;
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw IoError("features: ragged row at line " + std::to_string(lineno) +
                          " (got " + std::to_string(count) + " columns, want " +
                          std::to_string(cols) + ")");
        }
        ++rows;
    }
    if (rows == 0) throw IoError("features: empty input");
    Matrix m(rows, cols);
    m.values = std::move(values);
    return m;
}

Matrix import_features_string(const std::string& text) {
    std::istringstream in(text);
    return import_features(in);
}

void export_features(std::ostream& out, const Matrix& features) {
    char buf[40];
    for (std::size_t i = 0; i < features.rows; ++i) {
        const double* row = features.row(i);
        for (std::size_t j = 0; j < features.cols; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", row[j]);
            if (j) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

Matrix load_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open feature file: " + path);
    try {
        return import_features(in);
    } catch (const IoError& e) {
        throw IoError(std::string(e.what()) + " (" + path + ")");
    }
}

void save_features(const std::string& path, const Matrix& features) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + path);
    export_features(out, features);
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace gandiv
