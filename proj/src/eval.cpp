#include "gandiv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "gandiv/error.hpp"
#include "gandiv/linalg.hpp"
#include "gandiv/rng.hpp"

namespace gandiv {

namespace {

constexpr double kMaxRotationDeg = 15.0;
constexpr double kMaxShear = 0.2;
constexpr double kMaxZoom = 0.2;
constexpr double kPi = 3.14159265358979323846;

double fetch_or_zero(const Image& img, long x, long y) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return 0.0;
    return static_cast<double>(img.data[static_cast<std::size_t>(y) * img.width + x]);
}

}  // namespace

std::vector<Image> augment(const std::vector<Image>& minority,
                           const std::vector<Image>& synthetic, std::size_t target) {
    if (target < minority.size())
        throw std::invalid_argument("augment: target below minority count");
    const std::size_t need = target - minority.size();
    if (synthetic.size() < need)
        throw std::invalid_argument("augment: insufficient synthetic images (" +
                                    std::to_string(synthetic.size()) + " available, " +
                                    std::to_string(need) + " needed)");
    std::vector<Image> out = minority;
    out.insert(out.end(), synthetic.begin(), synthetic.begin() + static_cast<long>(need));
    return out;
}

Image geometric_augment(const Image& img, double max_rotation_deg, double max_shear,
                        double max_zoom, std::uint64_t seed) {
    if (max_rotation_deg < 0.0 || max_rotation_deg > kMaxRotationDeg)
        throw std::invalid_argument("geometric_augment: rotation range must be in [0, 15]");
    if (max_shear < 0.0 || max_shear > kMaxShear)
        throw std::invalid_argument("geometric_augment: shear range must be in [0, 0.2]");
    if (max_zoom < 0.0 || max_zoom > kMaxZoom)
        throw std::invalid_argument("geometric_augment: zoom range must be in [0, 0.2]");

    Rng rng(seed);
    const double theta = rng.uniform(-max_rotation_deg, max_rotation_deg) * kPi / 180.0;
    const double shear = rng.uniform(-max_shear, max_shear);
    const double scale = 1.0 + rng.uniform(-max_zoom, max_zoom);

    // forward map: rotate(theta) * shear_x(shear) * scale
    const double a11 = scale * std::cos(theta);
    const double a12 = scale * (shear * std::cos(theta) - std::sin(theta));
    const double a21 = scale * std::sin(theta);
    const double a22 = scale * (shear * std::sin(theta) + std::cos(theta));
    const double det = a11 * a22 - a12 * a21;
    const double i11 = a22 / det;
    const double i12 = -a12 / det;
    const double i21 = -a21 / det;
    const double i22 = a11 / det;

    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;

    Image out(img.width, img.height);
    std::size_t idx = 0;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x, ++idx) {
            const double dx = x - cx;
            const double dy = y - cy;
            const double sx = i11 * dx + i12 * dy + cx;
            const double sy = i21 * dx + i22 * dy + cy;
            const double fx0 = std::floor(sx);
            const double fy0 = std::floor(sy);
            const long x0 = static_cast<long>(fx0);
            const long y0 = static_cast<long>(fy0);
            const double fx = sx - fx0;
            const double fy = sy - fy0;
            const double value = (1.0 - fx) * (1.0 - fy) * fetch_or_zero(img, x0, y0) +
                                 fx * (1.0 - fy) * fetch_or_zero(img, x0 + 1, y0) +
                                 (1.0 - fx) * fy * fetch_or_zero(img, x0, y0 + 1) +
                                 fx * fy * fetch_or_zero(img, x0 + 1, y0 + 1);
            out.data[idx] = clamp_u8(value);
        }
    }
    return out;
}

MlpModel train_classifier(const LabeledDataset& data, const ClassifierConfig& cfg) {
    if (data.images.size() != data.labels.size())
        throw std::invalid_argument("classifier: image and label counts differ");
    if (data.images.empty()) throw std::invalid_argument("classifier: dataset is empty");
    bool has_neg = false;
    bool has_pos = false;
    for (int label : data.labels) {
        if (label == 0) has_neg = true;
        else if (label == 1) has_pos = true;
        else throw std::invalid_argument("classifier: labels must be 0 or 1");
    }
    if (!has_neg || !has_pos)
        throw std::invalid_argument("classifier: both classes must be present");
    if (cfg.hidden < 1) throw std::invalid_argument("classifier: hidden size must be >= 1");
    if (cfg.batch_size < 1) throw std::invalid_argument("classifier: batch_size must be >= 1");

    const int w = data.images[0].width;
    const int h = data.images[0].height;
    for (const auto& img : data.images)
        if (img.width != w || img.height != h)
            throw std::invalid_argument("classifier: images must share one size");
    const std::size_t dim = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    const std::size_t n = data.images.size();

    Rng rng(cfg.seed);
    MlpModel model = make_mlp({dim, cfg.hidden, 1}, {Activation::Relu, Activation::Sigmoid}, rng);
    AdamState opt = AdamState::for_model(model, cfg.lr, 0.9);

    Matrix rows(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = rows.row(i);
        for (std::size_t p = 0; p < dim; ++p)
            row[p] = static_cast<double>(data.images[i].data[p]) / 255.0;
    }

    const std::size_t bs = std::min(cfg.batch_size, n);
    const std::size_t batches = n / bs;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.below(i)]);
        for (std::size_t b = 0; b < batches; ++b) {
            Matrix batch(bs, dim);
            Matrix labels(bs, 1);
            for (std::size_t r = 0; r < bs; ++r) {
                const std::size_t src = order[b * bs + r];
                std::copy(rows.row(src), rows.row(src) + dim, batch.row(r));
                labels.values[r] = static_cast<double>(data.labels[src]);
            }
            ForwardCache cache;
            const Matrix out = forward(model, batch, &cache);
            const BceResult bce = bce_loss(out, labels);
            if (!std::isfinite(bce.loss))
                throw NumericError("classifier: training diverged at epoch " +
                                   std::to_string(epoch + 1));
            adam_step(opt, model, backward(model, cache, bce.grad));
        }
    }
    return model;
}

ConfusionCounts evaluate_classifier(const MlpModel& model, const LabeledDataset& data) {
    if (data.images.size() != data.labels.size())
        throw std::invalid_argument("evaluate: image and label counts differ");
    if (data.images.empty()) throw std::invalid_argument("evaluate: dataset is empty");
    const std::size_t dim = model.input_dim();

    ConfusionCounts counts;
    for (std::size_t i = 0; i < data.images.size(); ++i) {
        const Image& img = data.images[i];
        if (img.data.size() != dim)
            throw std::invalid_argument("evaluate: image size does not match model input");
        Matrix row(1, dim);
        for (std::size_t p = 0; p < dim; ++p)
            row.values[p] = static_cast<double>(img.data[p]) / 255.0;
        const double p = forward(model, row, nullptr).values[0];
        const int predicted = p >= 0.5 ? 1 : 0;
        if (predicted == 1 && data.labels[i] == 1) counts.tp += 1;
        else if (predicted == 1 && data.labels[i] == 0) counts.fp += 1;
        else if (predicted == 0 && data.labels[i] == 0) counts.tn += 1;
        else counts.fn += 1;
    }
    return counts;
}

UtilityMetrics confusion_metrics(const ConfusionCounts& counts) {
    if (counts.total() == 0) throw std::invalid_argument("confusion_metrics: empty counts");
    UtilityMetrics m;
    auto ratio = [&m](std::uint64_t num, std::uint64_t denom) {
        if (denom == 0) {
            m.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(denom);
    };
    m.accuracy = ratio(counts.tp + counts.tn, counts.total());
    m.precision = ratio(counts.tp, counts.tp + counts.fp);
    m.recall = ratio(counts.tp, counts.tp + counts.fn);
    m.specificity = ratio(counts.tn, counts.tn + counts.fp);
    return m;
}

namespace {

struct ManifestEntry {
    std::string path;
    bool has_label = false;
    int label = 0;
};

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path);
    const std::filesystem::path base = std::filesystem::path(path).parent_path();

    std::vector<ManifestEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ManifestEntry entry;
        const auto comma = line.find(',');
        std::string raw_path = line.substr(0, comma);
        if (raw_path.empty())
            throw IoError("manifest " + path + " line " + std::to_string(line_no) +
                          ": empty image path");
        if (comma != std::string::npos) {
            const std::string label = line.substr(comma + 1);
            if (label != "0" && label != "1")
                throw IoError("manifest " + path + " line " + std::to_string(line_no) +
                              ": label must be 0 or 1, got \"" + label + "\"");
            entry.has_label = true;
            entry.label = label == "1" ? 1 : 0;
        }
        const std::filesystem::path img_path(raw_path);
        entry.path = img_path.is_absolute() ? img_path.string() : (base / img_path).string();
        entries.push_back(std::move(entry));
    }
    return entries;
}

}  // namespace

LabeledDataset load_labeled_manifest(const std::string& path) {
    LabeledDataset data;
    for (const auto& entry : read_manifest(path)) {
        if (!entry.has_label)
            throw IoError("manifest " + path + ": entry \"" + entry.path +
                          "\" is missing its label column");
        data.images.push_back(load_pgm(entry.path));
        data.labels.push_back(entry.label);
    }
    return data;
}

std::vector<Image> load_manifest_images(const std::string& path) {
    std::vector<Image> images;
    for (const auto& entry : read_manifest(path)) images.push_back(load_pgm(entry.path));
    return images;
}

void save_manifest(const std::string& manifest_path, const std::vector<std::string>& image_paths,
                   const std::vector<int>& labels) {
    if (image_paths.size() != labels.size())
        throw std::invalid_argument("manifest: path and label counts differ");
    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + manifest_path);
    for (std::size_t i = 0; i < image_paths.size(); ++i)
        out << image_paths[i] << ',' << labels[i] << '\n';
    if (!out) throw IoError("write failed: " + manifest_path);
}

}  // namespace gandiv
