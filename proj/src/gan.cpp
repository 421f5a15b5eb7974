#include "gandiv/gan.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "gandiv/error.hpp"
#include "gandiv/linalg.hpp"
#include "gandiv/rng.hpp"

namespace gandiv {

namespace {

constexpr double kGanLr = 0.0002;
constexpr double kGanBeta1 = 0.5;
constexpr double kPi = 3.14159265358979323846;

void validate_toy_spec(const ToyDatasetSpec& spec) {
    if (spec.k_modes < 1) throw std::invalid_argument("toy dataset: k_modes must be >= 1");
    if (spec.side < 1) throw std::invalid_argument("toy dataset: side must be >= 1");
    if (spec.blob_sigma <= 0.0) throw std::invalid_argument("toy dataset: blob_sigma must be > 0");
    if (spec.band_low < 0 || spec.band_high > 255 || spec.band_low >= spec.band_high)
        throw std::invalid_argument("toy dataset: intensity band must satisfy 0 <= low < high <= 255");
    if (spec.noise_sigma < 0.0) throw std::invalid_argument("toy dataset: noise_sigma must be >= 0");
}

std::vector<std::pair<double, double>> mode_centers(const ToyDatasetSpec& spec) {
    const double c = (static_cast<double>(spec.side) - 1.0) / 2.0;
    std::vector<std::pair<double, double>> centers;
    if (spec.k_modes == 1) {
        centers.emplace_back(c, c);
        return centers;
    }
    const double radius = static_cast<double>(spec.side) / 4.0;
    for (std::size_t m = 0; m < spec.k_modes; ++m) {
        const double angle =
            2.0 * kPi * static_cast<double>(m) / static_cast<double>(spec.k_modes) - kPi / 2.0;
        centers.emplace_back(c + radius * std::cos(angle), c + radius * std::sin(angle));
    }
    return centers;
}

Matrix images_to_rows(const std::vector<Image>& images, std::size_t side) {
    Matrix rows(images.size(), side * side);
    for (std::size_t i = 0; i < images.size(); ++i) {
        double* row = rows.row(i);
        for (std::size_t p = 0; p < side * side; ++p)
            row[p] = static_cast<double>(images[i].data[p]) / 127.5 - 1.0;
    }
    return rows;
}

Matrix constant_labels(std::size_t rows, double value) {
    Matrix m(rows, 1);
    for (auto& v : m.values) v = value;
    return m;
}

Matrix draw_latent(Rng& rng, std::size_t rows, std::size_t latent_dim) {
    Matrix z(rows, latent_dim);
    for (auto& v : z.values) v = rng.normal();
    return z;
}

}  // namespace

std::vector<Image> make_toy_dataset(const ToyDatasetSpec& spec, std::uint64_t seed) {
    validate_toy_spec(spec);
    const auto centers = mode_centers(spec);
    const double low = static_cast<double>(spec.band_low);
    const double span = static_cast<double>(spec.band_high - spec.band_low);
    const double inv_two_sigma2 = 1.0 / (2.0 * spec.blob_sigma * spec.blob_sigma);

    Rng rng(seed);
    std::vector<Image> images;
    images.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const auto [cx, cy] = centers[rng.below(spec.k_modes)];
        Image img(static_cast<int>(spec.side), static_cast<int>(spec.side));
        std::size_t idx = 0;
        for (std::size_t y = 0; y < spec.side; ++y) {
            for (std::size_t x = 0; x < spec.side; ++x, ++idx) {
                const double dx = static_cast<double>(x) - cx;
                const double dy = static_cast<double>(y) - cy;
                double value = low + span * std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
                if (spec.noise_sigma > 0.0) value += spec.noise_sigma * rng.normal();
                img.data[idx] = clamp_u8(value);
            }
        }
        images.push_back(std::move(img));
    }
    return images;
}

TrainResult train_gan(const GanConfig& cfg, const std::vector<Image>& images) {
    if (images.empty()) throw std::invalid_argument("gan: dataset is empty");
    if (cfg.latent_dim < 1) throw std::invalid_argument("gan: latent_dim must be >= 1");
    if (cfg.batch_size < 1 || cfg.batch_size > images.size())
        throw std::invalid_argument("gan: batch_size must be in [1, dataset size]");
    const std::size_t side = cfg.image_side;
    for (const auto& img : images)
        if (img.width != static_cast<int>(side) || img.height != static_cast<int>(side))
            throw std::invalid_argument("gan: all images must be image_side x image_side");

    Rng rng(cfg.seed);

    std::vector<std::size_t> gen_sizes = {cfg.latent_dim};
    gen_sizes.insert(gen_sizes.end(), cfg.gen_hidden.begin(), cfg.gen_hidden.end());
    gen_sizes.push_back(side * side);
    std::vector<Activation> gen_acts(cfg.gen_hidden.size(), Activation::Relu);
    gen_acts.push_back(Activation::Tanh);

    std::vector<std::size_t> disc_sizes = {side * side};
    disc_sizes.insert(disc_sizes.end(), cfg.disc_hidden.begin(), cfg.disc_hidden.end());
    disc_sizes.push_back(1);
    std::vector<Activation> disc_acts(cfg.disc_hidden.size(), Activation::LeakyRelu);
    disc_acts.push_back(Activation::Sigmoid);

    TrainResult result;
    result.generator = make_mlp(gen_sizes, gen_acts, rng);
    result.discriminator = make_mlp(disc_sizes, disc_acts, rng);

    AdamState g_opt = AdamState::for_model(result.generator, kGanLr, kGanBeta1);
    AdamState d_opt = AdamState::for_model(result.discriminator, kGanLr, kGanBeta1);

    const Matrix real_rows = images_to_rows(images, side);
    const std::size_t bs = cfg.batch_size;
    const std::size_t batches = images.size() / bs;
    const Matrix ones = constant_labels(bs, 1.0);
    const Matrix zeros = constant_labels(bs, 0.0);

    std::vector<std::size_t> order(images.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.below(i)]);

        double d_sum = 0.0;
        double g_sum = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            Matrix real_batch(bs, side * side);
            for (std::size_t r = 0; r < bs; ++r) {
                const double* src = real_rows.row(order[b * bs + r]);
                std::copy(src, src + side * side, real_batch.row(r));
            }

            // discriminator update on the real batch
            ForwardCache d_cache;
            Matrix d_out = forward(result.discriminator, real_batch, &d_cache);
            BceResult d_real = bce_loss(d_out, ones);
            adam_step(d_opt, result.discriminator,
                      backward(result.discriminator, d_cache, d_real.grad));

            // separate discriminator update on a fake batch
            Matrix fake = forward(result.generator, draw_latent(rng, bs, cfg.latent_dim), nullptr);
            d_out = forward(result.discriminator, fake, &d_cache);
            BceResult d_fake = bce_loss(d_out, zeros);
            adam_step(d_opt, result.discriminator,
                      backward(result.discriminator, d_cache, d_fake.grad));

            // generator update through the frozen discriminator
            ForwardCache g_cache;
            Matrix fake2 =
                forward(result.generator, draw_latent(rng, bs, cfg.latent_dim), &g_cache);
            d_out = forward(result.discriminator, fake2, &d_cache);
            BceResult g_bce = bce_loss(d_out, ones);
            Gradients d_grads = backward(result.discriminator, d_cache, g_bce.grad);
            adam_step(g_opt, result.generator,
                      backward(result.generator, g_cache, d_grads.input));

            d_sum += 0.5 * (d_real.loss + d_fake.loss);
            g_sum += g_bce.loss;
        }
        const double d_epoch = d_sum / static_cast<double>(batches);
        const double g_epoch = g_sum / static_cast<double>(batches);
        if (!std::isfinite(d_epoch) || !std::isfinite(g_epoch))
            throw NumericError("gan: training diverged at epoch " + std::to_string(epoch + 1));
        result.history.d_loss.push_back(d_epoch);
        result.history.g_loss.push_back(g_epoch);
    }
    result.history.disc_steps = d_opt.t;
    result.history.gen_steps = g_opt.t;
    return result;
}

std::vector<Image> generate(const MlpModel& generator, std::size_t n, std::uint64_t seed) {
    if (generator.layers.empty()) throw std::invalid_argument("generate: empty model");
    const std::size_t dim = generator.output_dim();
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(dim))));
    if (side * side != dim)
        throw std::invalid_argument("generate: generator output is not a square image");

    std::vector<Image> out;
    out.reserve(n);
    if (n == 0) return out;

    Rng rng(seed);
    const Matrix values = forward(generator, draw_latent(rng, n, generator.input_dim()), nullptr);
    for (std::size_t i = 0; i < n; ++i) {
        Image img(static_cast<int>(side), static_cast<int>(side));
        const double* row = values.row(i);
        for (std::size_t p = 0; p < dim; ++p)
            img.data[p] = clamp_u8((row[p] + 1.0) * 127.5);
        out.push_back(std::move(img));
    }
    return out;
}

MlpModel make_constant_generator(std::size_t latent_dim, std::size_t image_side,
                                 std::uint8_t gray) {
    if (latent_dim < 1 || image_side < 1)
        throw std::invalid_argument("constant generator: dimensions must be >= 1");
    MlpModel model;
    Layer layer;
    layer.weight = Matrix(image_side * image_side, latent_dim);
    layer.bias.assign(image_side * image_side, static_cast<double>(gray) / 127.5 - 1.0);
    layer.activation = Activation::None;
    model.layers.push_back(std::move(layer));
    return model;
}

std::string history_csv(const TrainHistory& history) {
    if (history.d_loss.size() != history.g_loss.size())
        throw std::invalid_argument("history: loss series lengths differ");
    std::string out = "epoch,d_loss,g_loss\n";
    char line[96];
    for (std::size_t i = 0; i < history.d_loss.size(); ++i) {
        std::snprintf(line, sizeof(line), "%zu,%.9g,%.9g\n", i + 1, history.d_loss[i],
                      history.g_loss[i]);
        out += line;
    }
    return out;
}

void save_history(const std::string& path, const TrainHistory& history) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + path);
    const std::string csv = history_csv(history);
    out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace gandiv
