#include <stdexcept>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "gandiv/error.hpp"
#include "gandiv/fid.hpp"
#include "gandiv/image.hpp"
#include "gandiv/rng.hpp"

using namespace gandiv;

namespace {

GaussianStats diag_stats(const std::vector<double>& mu, const std::vector<double>& var) {
    GaussianStats g;
    g.mu = mu;
    g.sigma = SymMatrix(var.size());
    for (std::size_t i = 0; i < var.size(); ++i) g.sigma.at(i, i) = var[i];
    return g;
}

}  // namespace

TEST_CASE("extract_patchstats on vertical stripes gives exact cell stats") {
    // alternating 0/255 columns: every 8x8 cell holds four of each, so
    // mean 0.5 and population stddev 0.5 exactly; interior Sobel columns
    // cancel and only the reflected border columns respond
    Image img(128, 128);
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x) img.at(x, y) = (x % 2 == 0) ? 0 : 255;

    const std::vector<double> f = extract_patchstats(img);
    REQUIRE_EQ(f.size(), kPatchFeatureDim);
    for (int cy = 0; cy < 16; ++cy) {
        for (int cx = 0; cx < 16; ++cx) {
            const std::size_t base = (static_cast<std::size_t>(cy) * 16 + cx) * 3;
            CHECK_EQ(f[base + 0], 0.5);
            CHECK_EQ(f[base + 1], 0.5);
            const double want_grad = (cx == 0 || cx == 15) ? 0.125 : 0.0;
            CHECK_EQ(f[base + 2], want_grad);
        }
    }
}

TEST_CASE("extract_patchstats on a half split localizes the edge response") {
    // columns below 64 are 0, the rest 255; the step straddles cells 7 and 8
    Image img(128, 128);
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x) img.at(x, y) = x < 64 ? 0 : 255;

    const std::vector<double> f = extract_patchstats(img);
    const auto cell = [&](int cx, int stat) { return f[(0 * 16 + cx) * 3 + stat]; };
    CHECK_EQ(cell(7, 0), 0.0);
    CHECK_EQ(cell(7, 1), 0.0);
    CHECK_EQ(cell(7, 2), 0.125);
    CHECK_EQ(cell(8, 0), 1.0);
    CHECK_EQ(cell(8, 1), 0.0);
    CHECK_EQ(cell(8, 2), 0.125);
    CHECK_EQ(cell(3, 0), 0.0);
    CHECK_EQ(cell(3, 2), 0.0);
    CHECK_EQ(cell(12, 0), 1.0);
    CHECK_EQ(cell(12, 2), 0.0);
}

TEST_CASE("extract_patchstats on a constant image is flat") {
    const Image img(64, 32, 100);  // exercises the resize path too
    const std::vector<double> f = extract_patchstats(img);
    for (std::size_t i = 0; i < f.size(); i += 3) {
        CHECK_EQ(f[i + 0], doctest::Approx(100.0 / 255.0).epsilon(1e-12));
        CHECK_EQ(f[i + 1], doctest::Approx(0.0).epsilon(1e-12));
        CHECK_EQ(f[i + 2], doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("patchstats_features stacks one row per image") {
    const std::vector<Image> imgs = {Image(16, 16, 0), Image(16, 16, 255)};
    const Matrix f = patchstats_features(imgs);
    CHECK_EQ(f.rows, 2);
    CHECK_EQ(f.cols, kPatchFeatureDim);
    CHECK_EQ(f.at(0, 0), 0.0);
    CHECK_EQ(f.at(1, 0), 1.0);
}

TEST_CASE("gaussian_stats adds the eps ridge on request") {
    Matrix feats(3, 2);
    feats.values = {1, 2, 3, 4, 5, 6};
    const GaussianStats plain = gaussian_stats(feats);
    const GaussianStats ridged = gaussian_stats(feats, 0.5);
    CHECK_EQ(plain.mu[0], doctest::Approx(3.0));
    CHECK_EQ(ridged.sigma.at(0, 0), doctest::Approx(plain.sigma.at(0, 0) + 0.5));
    CHECK_EQ(ridged.sigma.at(0, 1), doctest::Approx(plain.sigma.at(0, 1)));
}

TEST_CASE("fid is zero for identical fits") {
    Rng rng(19);
    Matrix feats(20, 6);
    for (auto& v : feats.values) v = rng.normal();
    const GaussianStats g = gaussian_stats(feats);
    const double d = fid(g, g);
    CHECK_GE(d, 0.0);
    CHECK_LT(d, 1e-8);
}

TEST_CASE("fid matches the univariate closed form") {
    // N(0,1) vs N(0,4): 0 + 1 + 4 - 2*sqrt(4) = 1
    const GaussianStats a = diag_stats({0.0}, {1.0});
    const GaussianStats b = diag_stats({0.0}, {4.0});
    CHECK_EQ(fid(a, b), doctest::Approx(1.0).epsilon(1e-12));
    CHECK_EQ(fid(b, a), doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fid reduces to the mean shift for equal covariances") {
    GaussianStats a = diag_stats({1.0, 2.0}, {2.0, 3.0});
    a.sigma.at(0, 1) = 0.5;
    a.sigma.at(1, 0) = 0.5;
    GaussianStats b = a;
    b.mu = {4.0, 6.0};
    CHECK_EQ(fid(a, b), doctest::Approx(25.0).epsilon(1e-8));
}

TEST_CASE("fid matches the commuting-covariance closed form") {
    const GaussianStats a = diag_stats({0.0, 0.0}, {1.0, 4.0});
    const GaussianStats b = diag_stats({1.0, -1.0}, {9.0, 16.0});
    // 2 + (1+4) + (9+16) - 2*(sqrt(9) + sqrt(64)) = 10
    CHECK_EQ(fid(a, b), doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("fid validates matching dimensions") {
    const GaussianStats a = diag_stats({0.0}, {1.0});
    const GaussianStats b = diag_stats({0.0, 0.0}, {1.0, 1.0});
    CHECK_THROWS_AS(fid(a, b), std::invalid_argument);
}

TEST_CASE("feature CSV round-trips exactly") {
    Rng rng(29);
    Matrix feats(5, 7);
    for (auto& v : feats.values) v = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));

    std::ostringstream out;
    export_features(out, feats);
    const Matrix back = import_features_string(out.str());
    REQUIRE_EQ(back.rows, feats.rows);
    REQUIRE_EQ(back.cols, feats.cols);
    CHECK_EQ(back.values, feats.values);
}

TEST_CASE("import_features parses plain rows and flags bad input by line") {
    const Matrix m = import_features_string("1,2\n3,4\n");
    CHECK_EQ(m.rows, 2);
    CHECK_EQ(m.cols, 2);
    CHECK_EQ(m.at(1, 0), 3.0);

    CHECK_THROWS_AS(import_features_string(""), IoError);
    CHECK_THROWS_AS(import_features_string("1,2\n3\n"), IoError);
    CHECK_THROWS_AS(import_features_string("1,x\n"), IoError);
    CHECK_THROWS_AS(import_features_string("1,2junk\n"), IoError);

    // stod accepts these spellings, but feature matrices must stay finite
    CHECK_THROWS_AS(import_features_string("nan,1\n"), IoError);
    CHECK_THROWS_AS(import_features_string("1,inf\n"), IoError);

    try {
        import_features_string("1,2\n3,oops\n");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}
