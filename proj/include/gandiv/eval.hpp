#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gandiv/image.hpp"
#include "gandiv/net.hpp"

namespace gandiv {

// Label 0 is the minority/negative class ("healthy" analog), label 1 the
// majority/positive class ("pneumonia" analog). Specificity therefore
// measures how well the minority class is recognized.
struct LabeledDataset {
    std::vector<Image> images;
    std::vector<int> labels;
};

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

struct UtilityMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
    bool degenerate = false;  // some 0/0 ratio was reported as 0
};

struct ClassifierConfig {
    std::size_t hidden = 64;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double lr = 0.001;
    std::uint64_t seed = 0;
};

// Minority images followed by the first (target - minority) synthetic ones.
std::vector<Image> augment(const std::vector<Image>& minority,
                           const std::vector<Image>& synthetic, std::size_t target);

// One affine jitter about the image center: rotation, shear and zoom are
// each drawn uniformly from [-max, +max] for this image, sampled bilinearly
// with zero fill outside the source.
Image geometric_augment(const Image& img, double max_rotation_deg, double max_shear,
                        double max_zoom, std::uint64_t seed);

// Flattened-pixel MLP (input -> hidden -> 1, sigmoid) trained with BCE and
// Adam; deterministic per seed.
MlpModel train_classifier(const LabeledDataset& data, const ClassifierConfig& cfg);

// Sigmoid outputs thresholded at 0.5 against the positive class 1.
ConfusionCounts evaluate_classifier(const MlpModel& model, const LabeledDataset& data);

UtilityMetrics confusion_metrics(const ConfusionCounts& counts);

// Manifest CSV: one "path,label" line per image, no header, label in {0,1};
// paths are resolved relative to the manifest's directory.
LabeledDataset load_labeled_manifest(const std::string& path);

// Same format with the label column optional; labels are ignored.
std::vector<Image> load_manifest_images(const std::string& path);

void save_manifest(const std::string& manifest_path, const std::vector<std::string>& image_paths,
                   const std::vector<int>& labels);

}  // namespace gandiv
