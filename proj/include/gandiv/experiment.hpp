#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gandiv/eval.hpp"
#include "gandiv/gan.hpp"

namespace gandiv {

enum class Augmentation { None = 0, Aiin = 1, Gaussian = 2, Median = 3 };

std::string augmentation_tag(Augmentation aug);
Augmentation parse_augmentation(const std::string& tag);

struct ExperimentVariant {
    Augmentation augmentation = Augmentation::None;
    std::size_t grid_w = 8;     // adaptive normalization tile grid
    std::size_t grid_h = 8;
    double threshold = 50.0;    // adaptive normalization contrast threshold
    int ksize = 3;              // blur / median kernel side
    ToyDatasetSpec toy;
    GanConfig gan;
    ClassifierConfig classifier;
    std::size_t pairs = 0;      // sampled score pairs; 0 means toy.n / 2
};

struct ExperimentRow {
    std::string augmentation;
    std::size_t batch_size = 0;
    std::string window;     // "-", or "WxH" for the active filter
    std::string threshold;  // "-", or the contrast threshold
    double msssim_delta = 0.0;
    double fid = 0.0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
};

// Full single-variant pipeline: toy data, preprocessing, adversarial
// training, generation, the two diversity scores, and classifier utility on
// a synthetic-balanced training set against a held-out test set. All stage
// seeds derive from gan.seed; errors carry the failing stage's name.
ExperimentRow run_experiment(const ExperimentVariant& variant);

// Applies the variant's preprocessing choice to one image.
Image apply_preprocessing(const ExperimentVariant& variant, const Image& img);

inline constexpr std::size_t kReportColumns = 10;
inline constexpr const char* kReportHeader =
    "augmentation,batch_size,window,threshold,msssim_delta,fid,accuracy,precision,recall,"
    "specificity";

// Rows keep their raw cell text so that parse -> emit round-trips are
// byte-lossless; numeric columns are validated at parse time.
struct ReportTable {
    std::vector<std::array<std::string, kReportColumns>> rows;
};

std::array<std::string, kReportColumns> format_row_cells(const ExperimentRow& row);
void append_row(ReportTable& table, const ExperimentRow& row);

std::string report_csv(const ReportTable& table);
ReportTable parse_report_csv(const std::string& text);
ReportTable load_report(const std::string& path);
void save_report(const std::string& path, const ReportTable& table);

// Fixed-width human-readable rendering of the table.
std::string render_report(const ReportTable& table);

}  // namespace gandiv
