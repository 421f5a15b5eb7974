#include "gandiv/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gandiv/error.hpp"
#include "gandiv/fid.hpp"
#include "gandiv/msssim.hpp"
#include "gandiv/preprocess.hpp"

namespace gandiv {

namespace {

// seed offsets keeping every pipeline stage on its own deterministic stream
constexpr std::uint64_t kMajorityTrainSeed = 1000003;
constexpr std::uint64_t kMinorityTestSeed = 2000003;
constexpr std::uint64_t kMajorityTestSeed = 3000003;
constexpr std::uint64_t kGenerateSeed = 4000003;
constexpr std::uint64_t kClassifierSeed = 5000003;
constexpr std::uint64_t kJitterSeed = 6000003;
constexpr std::uint64_t kPairSeed = 7000003;

template <typename Fn>
auto run_stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const IoError& e) {
        throw IoError("stage " + std::string(name) + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError("stage " + std::string(name) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("stage " + std::string(name) + ": " + e.what());
    }
}

// The majority class mirrors the minority blob layout inside the opposite
// end of the intensity range, keeping the two classes separable while both
// stay multi-modal.
ToyDatasetSpec majority_spec(const ToyDatasetSpec& minority, std::size_t n) {
    ToyDatasetSpec spec = minority;
    spec.band_low = 255 - minority.band_high;
    spec.band_high = 255 - minority.band_low;
    spec.n = n;
    return spec;
}

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

}  // namespace

std::string augmentation_tag(Augmentation aug) {
    switch (aug) {
        case Augmentation::None: return "none";
        case Augmentation::Aiin: return "aiin";
        case Augmentation::Gaussian: return "gaussian";
        case Augmentation::Median: return "median";
    }
    throw std::invalid_argument("unknown augmentation value");
}

Augmentation parse_augmentation(const std::string& tag) {
    if (tag == "none") return Augmentation::None;
    if (tag == "aiin") return Augmentation::Aiin;
    if (tag == "gaussian") return Augmentation::Gaussian;
    if (tag == "median") return Augmentation::Median;
    throw std::invalid_argument("unknown augmentation \"" + tag +
                                "\" (expected none, aiin, gaussian or median)");
}

Image apply_preprocessing(const ExperimentVariant& variant, const Image& img) {
    switch (variant.augmentation) {
        case Augmentation::None: return img;
        case Augmentation::Aiin: {
            WindowGrid grid{static_cast<int>(variant.grid_w), static_cast<int>(variant.grid_h)};
            return aiin_normalize(img, grid, static_cast<std::uint32_t>(variant.threshold));
        }
        case Augmentation::Gaussian: return gaussian_filter(img, variant.ksize);
        case Augmentation::Median: return median_filter(img, variant.ksize);
    }
    throw std::invalid_argument("unknown augmentation value");
}

ExperimentRow run_experiment(const ExperimentVariant& variant) {
    const std::uint64_t seed = variant.gan.seed;
    const std::size_t n = variant.toy.n;
    if (n < 4) throw std::invalid_argument("experiment: toy dataset needs at least 4 images");

    const auto real_raw =
        run_stage("toydata", [&] { return make_toy_dataset(variant.toy, seed); });

    const auto real = run_stage("preprocess", [&] {
        std::vector<Image> out;
        out.reserve(real_raw.size());
        for (const auto& img : real_raw) out.push_back(apply_preprocessing(variant, img));
        return out;
    });

    GanConfig gan_cfg = variant.gan;
    gan_cfg.image_side = variant.toy.side;
    const auto trained = run_stage("train", [&] { return train_gan(gan_cfg, real); });

    const auto synthetic = run_stage("generate", [&] {
        return generate(trained.generator, n, seed + kGenerateSeed);
    });

    const auto verdict = run_stage("msssim", [&] {
        const std::size_t pairs = variant.pairs > 0 ? variant.pairs : n / 2;
        const PairSample sample = sample_pairs(n, pairs, seed + kPairSeed);
        const double real_mean = mean_msssim(real, sample);
        const double fake_mean = mean_msssim(synthetic, sample);
        return collapse_delta(real_mean, fake_mean);
    });

    const double fid_value = run_stage("fid", [&] {
        const GaussianStats real_stats = gaussian_stats(patchstats_features(real));
        const GaussianStats fake_stats = gaussian_stats(patchstats_features(synthetic));
        return fid(real_stats, fake_stats);
    });

    const UtilityMetrics metrics = run_stage("classify", [&] {
        const auto majority_train =
            make_toy_dataset(majority_spec(variant.toy, 2 * n), seed + kMajorityTrainSeed);
        const auto minority_test = make_toy_dataset(
            [&] { ToyDatasetSpec s = variant.toy; s.n = std::max<std::size_t>(1, n / 4); return s; }(),
            seed + kMinorityTestSeed);
        const auto majority_test = make_toy_dataset(
            majority_spec(variant.toy, std::max<std::size_t>(1, n / 2)), seed + kMajorityTestSeed);

        LabeledDataset train;
        for (const auto& img : augment(real_raw, synthetic, 2 * n)) {
            train.images.push_back(img);
            train.labels.push_back(0);
        }
        for (const auto& img : majority_train) {
            train.images.push_back(img);
            train.labels.push_back(1);
        }
        const std::size_t base = train.images.size();
        for (std::size_t i = 0; i < base; ++i) {
            train.images.push_back(
                geometric_augment(train.images[i], 15.0, 0.2, 0.2, seed + kJitterSeed + i));
            train.labels.push_back(train.labels[i]);
        }

        ClassifierConfig cls = variant.classifier;
        cls.seed = seed + kClassifierSeed;
        const MlpModel model = train_classifier(train, cls);

        LabeledDataset test;
        for (const auto& img : minority_test) {
            test.images.push_back(img);
            test.labels.push_back(0);
        }
        for (const auto& img : majority_test) {
            test.images.push_back(img);
            test.labels.push_back(1);
        }
        return confusion_metrics(evaluate_classifier(model, test));
    });

    ExperimentRow row;
    row.augmentation = augmentation_tag(variant.augmentation);
    row.batch_size = gan_cfg.batch_size;
    switch (variant.augmentation) {
        case Augmentation::None:
            row.window = "-";
            row.threshold = "-";
            break;
        case Augmentation::Aiin:
            row.window = std::to_string(variant.grid_w) + "x" + std::to_string(variant.grid_h);
            row.threshold = format_double("%g", variant.threshold);
            break;
        case Augmentation::Gaussian:
        case Augmentation::Median:
            row.window = std::to_string(variant.ksize) + "x" + std::to_string(variant.ksize);
            row.threshold = "-";
            break;
    }
    row.msssim_delta = verdict.delta;
    row.fid = fid_value;
    row.accuracy = metrics.accuracy;
    row.precision = metrics.precision;
    row.recall = metrics.recall;
    row.specificity = metrics.specificity;
    return row;
}

std::array<std::string, kReportColumns> format_row_cells(const ExperimentRow& row) {
    return {row.augmentation,
            std::to_string(row.batch_size),
            row.window,
            row.threshold,
            format_double("%.6f", row.msssim_delta),
            format_double("%.6f", row.fid),
            format_double("%.4f", row.accuracy),
            format_double("%.4f", row.precision),
            format_double("%.4f", row.recall),
            format_double("%.4f", row.specificity)};
}

void append_row(ReportTable& table, const ExperimentRow& row) {
    table.rows.push_back(format_row_cells(row));
}

std::string report_csv(const ReportTable& table) {
    std::string out = std::string(kReportHeader) + "\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < kReportColumns; ++c) {
            if (c > 0) out += ',';
            out += row[c];
        }
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cell);
            cell.clear();
        } else {
            cell += ch;
        }
    }
    cells.push_back(cell);
    return cells;
}

bool parses_as_double(const std::string& text) {
    if (text.empty()) return false;
    std::size_t used = 0;
    try {
        (void)std::stod(text, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == text.size();
}

bool parses_as_count(const std::string& text) {
    if (text.empty()) return false;
    return std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

ReportTable parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("report: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kReportHeader)
        throw IoError("report: bad header, expected \"" + std::string(kReportHeader) + "\"");

    ReportTable table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_cells(line);
        if (cells.size() != kReportColumns)
            throw IoError("report line " + std::to_string(line_no) + ": expected " +
                          std::to_string(kReportColumns) + " columns, got " +
                          std::to_string(cells.size()));
        if (!parses_as_count(cells[1]))
            throw IoError("report line " + std::to_string(line_no) +
                          ": batch_size is not a count: \"" + cells[1] + "\"");
        for (std::size_t c = 4; c < kReportColumns; ++c)
            if (!parses_as_double(cells[c]))
                throw IoError("report line " + std::to_string(line_no) + ": column " +
                              std::to_string(c + 1) + " is not numeric: \"" + cells[c] + "\"");
        std::array<std::string, kReportColumns> row;
        std::copy(cells.begin(), cells.end(), row.begin());
        table.rows.push_back(std::move(row));
    }
    return table;
}

ReportTable load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open report: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return parse_report_csv(text);
    } catch (const IoError& e) {
        throw IoError(std::string(e.what()) + " (" + path + ")");
    }
}

void save_report(const std::string& path, const ReportTable& table) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + path);
    const std::string csv = report_csv(table);
    out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::string render_report(const ReportTable& table) {
    const auto header_cells = split_cells(kReportHeader);
    std::vector<std::size_t> widths(kReportColumns);
    for (std::size_t c = 0; c < kReportColumns; ++c) widths[c] = header_cells[c].size();
    for (const auto& row : table.rows)
        for (std::size_t c = 0; c < kReportColumns; ++c)
            widths[c] = std::max(widths[c], row[c].size());

    auto emit_row = [&](const std::vector<std::string>& cells) {
        std::string out;
        for (std::size_t c = 0; c < kReportColumns; ++c) {
            if (c > 0) out += "  ";
            out += cells[c];
            out.append(widths[c] - cells[c].size(), ' ');
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        return out + "\n";
    };

    std::string out = emit_row(header_cells);
    for (const auto& row : table.rows)
        out += emit_row(std::vector<std::string>(row.begin(), row.end()));
    return out;
}

}  // namespace gandiv
