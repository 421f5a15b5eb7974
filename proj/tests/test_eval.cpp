#include <stdexcept>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gandiv/error.hpp"
#include "gandiv/eval.hpp"
#include "gandiv/image.hpp"
#include "gandiv/rng.hpp"
#include "test_util.hpp"

using namespace gandiv;

namespace {

Image noisy_level(int side, double level, Rng& rng) {
    Image img(side, side);
    for (auto& p : img.data) p = clamp_u8(level + 10.0 * rng.normal());
    return img;
}

// dark images labeled 0, bright ones labeled 1: linearly separable
LabeledDataset separable_dataset(std::size_t per_class, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset data;
    for (std::size_t i = 0; i < per_class; ++i) {
        data.images.push_back(noisy_level(8, 40.0, rng));
        data.labels.push_back(0);
        data.images.push_back(noisy_level(8, 200.0, rng));
        data.labels.push_back(1);
    }
    return data;
}

}  // namespace

TEST_CASE("augment concatenates minority with leading synthetic images") {
    const std::vector<Image> minority = {Image(4, 4, 1), Image(4, 4, 2)};
    const std::vector<Image> synthetic = {Image(4, 4, 10), Image(4, 4, 11), Image(4, 4, 12)};

    const auto merged = augment(minority, synthetic, 4);
    REQUIRE_EQ(merged.size(), 4);
    CHECK_EQ(merged[0].data[0], 1);
    CHECK_EQ(merged[1].data[0], 2);
    CHECK_EQ(merged[2].data[0], 10);
    CHECK_EQ(merged[3].data[0], 11);

    const auto untouched = augment(minority, synthetic, 2);
    CHECK_EQ(untouched.size(), 2);
    CHECK_EQ(untouched[1].data[0], 2);

    CHECK_THROWS_AS(augment(minority, synthetic, 1), std::invalid_argument);
    CHECK_THROWS_AS(augment(minority, synthetic, 6), std::invalid_argument);
}

TEST_CASE("geometric_augment with zero ranges is the identity") {
    Rng rng(2);
    Image img(9, 9);
    for (auto& p : img.data) p = static_cast<std::uint8_t>(rng.below(256));
    const Image out = geometric_augment(img, 0.0, 0.0, 0.0, 7);
    CHECK_EQ(out.data, img.data);
}

TEST_CASE("geometric_augment is deterministic and bounded") {
    Image img(12, 12, 0);
    for (int y = 3; y < 9; ++y)
        for (int x = 3; x < 9; ++x) img.at(x, y) = 200;

    const Image a = geometric_augment(img, 15.0, 0.2, 0.2, 42);
    const Image b = geometric_augment(img, 15.0, 0.2, 0.2, 42);
    const Image c = geometric_augment(img, 15.0, 0.2, 0.2, 43);
    CHECK_EQ(a.data, b.data);
    CHECK_NE(a.data, c.data);
    CHECK_EQ(a.width, img.width);
    CHECK_EQ(a.height, img.height);

    // a solid centered square survives mild jitter with most of its mass
    long mass_in = 0, mass_out = 0;
    for (const auto p : img.data) mass_in += p;
    for (const auto p : a.data) mass_out += p;
    CHECK_GT(mass_out, mass_in / 2);
}

TEST_CASE("geometric_augment keeps the interior of a constant image constant") {
    const Image img(16, 16, 90);
    const Image out = geometric_augment(img, 10.0, 0.1, 0.1, 5);
    for (int y = 6; y < 10; ++y)
        for (int x = 6; x < 10; ++x) CHECK_EQ(out.at(x, y), 90);
}

TEST_CASE("geometric_augment rejects out-of-range parameters") {
    const Image img(8, 8, 0);
    CHECK_THROWS_AS(geometric_augment(img, 15.1, 0.0, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(geometric_augment(img, 0.0, 0.3, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(geometric_augment(img, 0.0, 0.0, 0.21, 0), std::invalid_argument);
    CHECK_THROWS_AS(geometric_augment(img, -1.0, 0.0, 0.0, 0), std::invalid_argument);
}

TEST_CASE("train_classifier separates a two-blob toy problem") {
    const LabeledDataset data = separable_dataset(20, 1);
    ClassifierConfig cfg;
    cfg.seed = 1;
    cfg.batch_size = 8;
    const MlpModel model = train_classifier(data, cfg);
    const ConfusionCounts counts = evaluate_classifier(model, data);
    CHECK_EQ(counts.total(), 40);
    const UtilityMetrics m = confusion_metrics(counts);
    INFO("observed training accuracy ", m.accuracy);
    CHECK_GE(m.accuracy, 0.95);
}

TEST_CASE("train_classifier is deterministic and honors zero epochs") {
    const LabeledDataset data = separable_dataset(4, 2);
    ClassifierConfig cfg;
    cfg.epochs = 3;
    const MlpModel a = train_classifier(data, cfg);
    const MlpModel b = train_classifier(data, cfg);
    CHECK_EQ(serialize_model(a), serialize_model(b));

    cfg.epochs = 0;
    const MlpModel fresh = train_classifier(data, cfg);
    CHECK_EQ(fresh.input_dim(), 64);
    CHECK_EQ(fresh.output_dim(), 1);
    for (const double bias : fresh.layers[0].bias) CHECK_EQ(bias, 0.0);
}

TEST_CASE("train_classifier validates labels and class coverage") {
    LabeledDataset data = separable_dataset(2, 3);
    data.labels[0] = 7;
    CHECK_THROWS_AS(train_classifier(data, {}), std::invalid_argument);

    LabeledDataset single;
    single.images = {Image(4, 4, 0), Image(4, 4, 1)};
    single.labels = {1, 1};
    CHECK_THROWS_AS(train_classifier(single, {}), std::invalid_argument);

    LabeledDataset ragged = separable_dataset(2, 4);
    ragged.images[1] = Image(5, 5, 0);
    CHECK_THROWS_AS(train_classifier(ragged, {}), std::invalid_argument);

    LabeledDataset mismatched = separable_dataset(2, 5);
    mismatched.labels.pop_back();
    CHECK_THROWS_AS(train_classifier(mismatched, {}), std::invalid_argument);
}

TEST_CASE("confusion_metrics matches hand-computed cases") {
    const UtilityMetrics a = confusion_metrics({390, 49, 185, 0});
    CHECK_EQ(a.specificity, doctest::Approx(185.0 / 234.0).epsilon(1e-12));
    CHECK_EQ(a.specificity, doctest::Approx(0.7906).epsilon(1e-3));
    CHECK_EQ(a.recall, doctest::Approx(1.0));
    CHECK_FALSE(a.degenerate);

    const UtilityMetrics b = confusion_metrics({8, 1, 9, 2});
    CHECK_EQ(b.recall, doctest::Approx(0.8).epsilon(1e-12));
    CHECK_EQ(b.specificity, doctest::Approx(0.9).epsilon(1e-12));
    CHECK_EQ(b.accuracy, doctest::Approx(0.85).epsilon(1e-12));
    CHECK_EQ(b.precision, doctest::Approx(8.0 / 9.0).epsilon(1e-12));

    const UtilityMetrics perfect = confusion_metrics({5, 0, 5, 0});
    CHECK_EQ(perfect.accuracy, 1.0);
    CHECK_EQ(perfect.precision, 1.0);
    CHECK_EQ(perfect.recall, 1.0);
    CHECK_EQ(perfect.specificity, 1.0);
    CHECK_FALSE(perfect.degenerate);
}

TEST_CASE("confusion_metrics flags degenerate ratios and rejects empty counts") {
    const UtilityMetrics no_pos = confusion_metrics({0, 0, 10, 0});
    CHECK_EQ(no_pos.precision, 0.0);
    CHECK_EQ(no_pos.recall, 0.0);
    CHECK_EQ(no_pos.specificity, 1.0);
    CHECK(no_pos.degenerate);

    const UtilityMetrics no_neg = confusion_metrics({10, 0, 0, 0});
    CHECK_EQ(no_neg.specificity, 0.0);
    CHECK(no_neg.degenerate);

    CHECK_THROWS_AS(confusion_metrics({0, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("confusion_metrics agrees with a brute-force recount") {
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.below(50);
        std::vector<int> pred(n), label(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = static_cast<int>(rng.below(2));
            label[i] = static_cast<int>(rng.below(2));
        }

        ConfusionCounts counts;
        for (std::size_t i = 0; i < n; ++i) {
            if (pred[i] == 1 && label[i] == 1) ++counts.tp;
            if (pred[i] == 1 && label[i] == 0) ++counts.fp;
            if (pred[i] == 0 && label[i] == 0) ++counts.tn;
            if (pred[i] == 0 && label[i] == 1) ++counts.fn;
        }
        const UtilityMetrics m = confusion_metrics(counts);

        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i) correct += pred[i] == label[i];
        CHECK_EQ(m.accuracy, doctest::Approx(static_cast<double>(correct) / n).epsilon(1e-12));

        // accuracy = recall*prevalence + specificity*(1 - prevalence)
        const double prevalence = static_cast<double>(counts.tp + counts.fn) / n;
        CHECK_EQ(m.accuracy,
                 doctest::Approx(m.recall * prevalence + m.specificity * (1.0 - prevalence))
                     .epsilon(1e-12));
    }
}

TEST_CASE("manifests round-trip labeled image sets") {
    testutil::TempDir dir("eval");
    const Image a(4, 4, 10);
    const Image b(4, 4, 240);
    save_pgm(dir.file("a.pgm"), a);
    save_pgm(dir.file("b.pgm"), b);
    // relative paths resolve against the manifest directory
    save_manifest(dir.file("set.csv"), {"a.pgm", dir.file("b.pgm")}, {0, 1});

    const LabeledDataset data = load_labeled_manifest(dir.file("set.csv"));
    REQUIRE_EQ(data.images.size(), 2);
    CHECK_EQ(data.labels, std::vector<int>{0, 1});
    CHECK_EQ(data.images[0].data, a.data);
    CHECK_EQ(data.images[1].data, b.data);

    const std::vector<Image> plain = load_manifest_images(dir.file("set.csv"));
    REQUIRE_EQ(plain.size(), 2);
    CHECK_EQ(plain[1].data, b.data);
}

TEST_CASE("load_manifest_images accepts label-free lines") {
    testutil::TempDir dir("eval");
    save_pgm(dir.file("only.pgm"), Image(3, 3, 7));
    std::ofstream out(dir.file("bare.csv"));
    out << "only.pgm\n\n";  // blank lines are skipped
    out.close();
    const auto imgs = load_manifest_images(dir.file("bare.csv"));
    REQUIRE_EQ(imgs.size(), 1);
    CHECK_EQ(imgs[0].data[0], 7);
}

TEST_CASE("manifest loaders report bad rows with line numbers") {
    testutil::TempDir dir("eval");
    save_pgm(dir.file("ok.pgm"), Image(2, 2, 0));

    std::ofstream bad_label(dir.file("badlabel.csv"));
    bad_label << "ok.pgm,2\n";
    bad_label.close();
    CHECK_THROWS_AS(load_labeled_manifest(dir.file("badlabel.csv")), IoError);

    std::ofstream missing(dir.file("missing.csv"));
    missing << "ok.pgm,0\nnot_there.pgm,1\n";
    missing.close();
    CHECK_THROWS_AS(load_labeled_manifest(dir.file("missing.csv")), IoError);

    CHECK_THROWS_AS(load_labeled_manifest(dir.file("absent.csv")), IoError);

    try {
        load_labeled_manifest(dir.file("badlabel.csv"));
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK_NE(std::string(e.what()).find("line 1"), std::string::npos);
    }
}

TEST_CASE("save_manifest validates column agreement") {
    testutil::TempDir dir("eval");
    CHECK_THROWS_AS(save_manifest(dir.file("x.csv"), {"a.pgm"}, {0, 1}), std::invalid_argument);
}
