#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gandiv/image.hpp"
#include "gandiv/net.hpp"

namespace gandiv {

struct GanConfig {
    std::size_t latent_dim = 100;
    std::size_t image_side = 16;
    std::vector<std::size_t> gen_hidden = {256, 512};
    std::vector<std::size_t> disc_hidden = {256, 128};
    std::size_t batch_size = 20;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
};

struct ToyDatasetSpec {
    std::size_t k_modes = 4;
    std::size_t side = 16;
    double blob_sigma = 2.5;
    int band_low = 20;
    int band_high = 80;
    double noise_sigma = 0.0;
    std::size_t n = 400;
};

struct TrainHistory {
    std::vector<double> d_loss;  // one entry per epoch
    std::vector<double> g_loss;
    // optimizer step counters; the discriminator advances twice per batch
    // (real batch, then fake batch, as two separate updates)
    std::uint64_t disc_steps = 0;
    std::uint64_t gen_steps = 0;
};

struct TrainResult {
    MlpModel generator;
    MlpModel discriminator;
    TrainHistory history;
};

// Multi-modal blob images: each sample picks one of k_modes fixed centers
// (spread on a circle), renders a Gaussian bump scaled into the intensity
// band, then adds clamped pixel noise. Deterministic per seed.
std::vector<Image> make_toy_dataset(const ToyDatasetSpec& spec, std::uint64_t seed);

TrainResult train_gan(const GanConfig& cfg, const std::vector<Image>& images);

// Decodes n latent draws through the generator; tanh outputs in [-1, 1] map
// to intensities via (v + 1) * 127.5 with round-half-up.
std::vector<Image> generate(const MlpModel& generator, std::size_t n, std::uint64_t seed);

// Degenerate generator whose output is the same gray image for every latent
// input; used to exercise the collapse detector deterministically.
MlpModel make_constant_generator(std::size_t latent_dim, std::size_t image_side,
                                 std::uint8_t gray);

// CSV export, one "epoch,d_loss,g_loss" row per epoch after a header line.
std::string history_csv(const TrainHistory& history);
void save_history(const std::string& path, const TrainHistory& history);

}  // namespace gandiv
