#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gandiv/linalg.hpp"
#include "gandiv/rng.hpp"

namespace gandiv {

enum class Activation : std::uint8_t {
    None = 0,
    Relu = 1,
    LeakyRelu = 2,  // slope 0.2
    Tanh = 3,
    Sigmoid = 4,
};

struct Layer {
    Matrix weight;               // out x in
    std::vector<double> bias;    // out
    Activation activation = Activation::None;
};

// Fully-connected network. Layer dimensions must chain; batches are
// row-major (one sample per row).
struct MlpModel {
    std::vector<Layer> layers;

    std::size_t input_dim() const { return layers.front().weight.cols; }
    std::size_t output_dim() const { return layers.back().weight.rows; }
    std::size_t parameter_count() const;
};

// Layer sizes in -> hidden... -> out, weights N(0, 0.02), zero bias.
MlpModel make_mlp(const std::vector<std::size_t>& sizes,
                  const std::vector<Activation>& activations, Rng& rng);

struct ForwardCache {
    Matrix input;
    std::vector<Matrix> pre_activations;
    std::vector<Matrix> outputs;
};

Matrix forward(const MlpModel& model, const Matrix& batch, ForwardCache* cache = nullptr);

struct BceResult {
    double loss = 0.0;
    Matrix grad;  // dloss/dp, same shape as predictions
};

// Mean binary cross-entropy; predictions are clamped to [1e-7, 1 - 1e-7].
BceResult bce_loss(const Matrix& predictions, const Matrix& labels);

struct Gradients {
    std::vector<Matrix> weight;
    std::vector<std::vector<double>> bias;
    // gradient w.r.t. the batch input, for chaining through a frozen head
    Matrix input;
};

Gradients backward(const MlpModel& model, const ForwardCache& cache, const Matrix& output_grad);

// Adam with bias-corrected moments. One state per model; step() applies
// one update and bumps the step counter.
struct AdamState {
    double lr = 0.0002;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t t = 0;
    std::vector<Matrix> m_weight, v_weight;
    std::vector<std::vector<double>> m_bias, v_bias;

    static AdamState for_model(const MlpModel& model, double lr, double beta1);
};

void adam_step(AdamState& state, MlpModel& model, const Gradients& grads);

enum class GradCheckLoss { Bce, Mse };

// Worst relative error between analytic gradients and central finite
// differences over every parameter. Intended for small models.
double grad_check(const MlpModel& model, const Matrix& batch, const Matrix& labels,
                  double epsilon = 1e-5, GradCheckLoss loss = GradCheckLoss::Bce);

// Versioned binary checkpoint ("DGMLP1"): layer count, per-layer dims and
// activation tag, then little-endian float64 weights (row-major) and biases.
void save_model(const std::string& path, const MlpModel& model);
MlpModel load_model(const std::string& path);
std::vector<std::uint8_t> serialize_model(const MlpModel& model);
MlpModel deserialize_model(const std::vector<std::uint8_t>& bytes);

}  // namespace gandiv
