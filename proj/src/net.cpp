#include "gandiv/net.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "gandiv/error.hpp"

namespace gandiv {

namespace {

constexpr double kLeakSlope = 0.2;
constexpr double kBceClamp = 1e-7;

double activate(double z, Activation a) {
    switch (a) {
        case Activation::None: return z;
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::LeakyRelu: return z > 0.0 ? z : kLeakSlope * z;
        case Activation::Tanh: return std::tanh(z);
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    }
    return z;
}

// derivative expressed through the pre-activation z
double activate_grad(double z, Activation a) {
    switch (a) {
        case Activation::None: return 1.0;
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::LeakyRelu: return z > 0.0 ? 1.0 : kLeakSlope;
        case Activation::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::Sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-z));
            return s * (1.0 - s);
        }
    }
    return 1.0;
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.values.size() + l.bias.size();
    return n;
}

MlpModel make_mlp(const std::vector<std::size_t>& sizes,
                  const std::vector<Activation>& activations, Rng& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("mlp: need at least input and output sizes");
    if (activations.size() != sizes.size() - 1)
        throw std::invalid_argument("mlp: one activation per layer required");
    MlpModel model;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        Layer layer;
        layer.weight = Matrix(sizes[i + 1], sizes[i]);
        for (auto& w : layer.weight.values) w = 0.02 * rng.normal();
        layer.bias.assign(sizes[i + 1], 0.0);
        layer.activation = activations[i];
        model.layers.push_back(std::move(layer));
    }
    return model;
}

Matrix forward(const MlpModel& model, const Matrix& batch, ForwardCache* cache) {
    if (model.layers.empty()) throw std::invalid_argument("forward: empty model");
    if (batch.cols != model.input_dim())
        throw std::invalid_argument("forward: batch width does not match model input");

    if (cache) {
        cache->input = batch;
        cache->pre_activations.clear();
        cache->outputs.clear();
    }
    Matrix x = batch;
    for (const auto& layer : model.layers) {
        Matrix z = matmul_nt(x, layer.weight);
        for (std::size_t r = 0; r < z.rows; ++r) {
            double* row = z.row(r);
            for (std::size_t c = 0; c < z.cols; ++c) row[c] += layer.bias[c];
        }
        Matrix a = z;
        for (auto& v : a.values) v = activate(v, layer.activation);
        if (cache) {
            cache->pre_activations.push_back(std::move(z));
            cache->outputs.push_back(a);
        }
        x = std::move(a);
    }
    return x;
}

BceResult bce_loss(const Matrix& predictions, const Matrix& labels) {
    if (predictions.rows != labels.rows || predictions.cols != labels.cols)
        throw std::invalid_argument("bce: prediction and label shapes differ");
    const std::size_t n = predictions.values.size();
    BceResult res;
    res.grad = Matrix(predictions.rows, predictions.cols);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = labels.values[i];
        if (y != 0.0 && y != 1.0)
            throw std::invalid_argument("bce: labels must be 0 or 1");
        double p = predictions.values[i];
        if (p < kBceClamp) p = kBceClamp;
        if (p > 1.0 - kBceClamp) p = 1.0 - kBceClamp;
        sum += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
        res.grad.values[i] = (-y / p + (1.0 - y) / (1.0 - p)) / static_cast<double>(n);
    }
    res.loss = sum / static_cast<double>(n);
    return res;
}

Gradients backward(const MlpModel& model, const ForwardCache& cache, const Matrix& output_grad) {
    const std::size_t L = model.layers.size();
    if (cache.pre_activations.size() != L)
        throw std::invalid_argument("backward: cache does not match model");
    if (output_grad.rows != cache.input.rows ||
        output_grad.cols != model.output_dim())
        throw std::invalid_argument("backward: output gradient shape mismatch");

    Gradients g;
    g.weight.resize(L);
    g.bias.resize(L);

    Matrix grad = output_grad;
    for (std::size_t li = L; li-- > 0;) {
        const Layer& layer = model.layers[li];
        const Matrix& z = cache.pre_activations[li];
        Matrix gz = grad;
        for (std::size_t i = 0; i < gz.values.size(); ++i)
            gz.values[i] *= activate_grad(z.values[i], layer.activation);

        const Matrix& input = li == 0 ? cache.input : cache.outputs[li - 1];
        g.weight[li] = matmul_tn(gz, input);  // out x in
        g.bias[li].assign(layer.weight.rows, 0.0);
        for (std::size_t r = 0; r < gz.rows; ++r) {
            const double* row = gz.row(r);
            for (std::size_t c = 0; c < gz.cols; ++c) g.bias[li][c] += row[c];
        }
        grad = matmul(gz, layer.weight);  // gradient w.r.t. the layer input
    }
    g.input = std::move(grad);
    return g;
}

AdamState AdamState::for_model(const MlpModel& model, double lr, double beta1) {
    AdamState s;
    s.lr = lr;
    s.beta1 = beta1;
    for (const auto& layer : model.layers) {
        s.m_weight.emplace_back(layer.weight.rows, layer.weight.cols);
        s.v_weight.emplace_back(layer.weight.rows, layer.weight.cols);
        s.m_bias.emplace_back(layer.bias.size(), 0.0);
        s.v_bias.emplace_back(layer.bias.size(), 0.0);
    }
    return s;
}

namespace {

void adam_update(double lr, double b1, double b2, double eps, double bc1, double bc2,
                 double* param, double* m, double* v, const double* grad, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double gi = grad[i];
        if (!std::isfinite(gi)) throw NumericError("adam: non-finite gradient");
        m[i] = b1 * m[i] + (1.0 - b1) * gi;
        v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
        const double mh = m[i] / bc1;
        const double vh = v[i] / bc2;
        param[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
}

}  // namespace

void adam_step(AdamState& state, MlpModel& model, const Gradients& grads) {
    if (state.m_weight.size() != model.layers.size() ||
        grads.weight.size() != model.layers.size())
        throw std::invalid_argument("adam: state/model/gradient layer counts differ");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        Layer& layer = model.layers[li];
        if (grads.weight[li].rows != layer.weight.rows ||
            grads.weight[li].cols != layer.weight.cols ||
            grads.bias[li].size() != layer.bias.size())
            throw std::invalid_argument("adam: gradient shape mismatch");
        adam_update(state.lr, state.beta1, state.beta2, state.eps, bc1, bc2,
                    layer.weight.values.data(), state.m_weight[li].values.data(),
                    state.v_weight[li].values.data(), grads.weight[li].values.data(),
                    layer.weight.values.size());
        adam_update(state.lr, state.beta1, state.beta2, state.eps, bc1, bc2,
                    layer.bias.data(), state.m_bias[li].data(), state.v_bias[li].data(),
                    grads.bias[li].data(), layer.bias.size());
    }
}

namespace {

double scalar_loss(const MlpModel& model, const Matrix& batch, const Matrix& labels,
                   GradCheckLoss kind, Matrix* out_grad) {
    ForwardCache cache;
    const Matrix p = forward(model, batch, &cache);
    if (kind == GradCheckLoss::Bce) {
        BceResult r = bce_loss(p, labels);
        if (out_grad) *out_grad = r.grad;
        return r.loss;
    }
    // mean squared error
    const std::size_t n = p.values.size();
    double sum = 0.0;
    Matrix grad(p.rows, p.cols);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = p.values[i] - labels.values[i];
        sum += d * d;
        grad.values[i] = 2.0 * d / static_cast<double>(n);
    }
    if (out_grad) *out_grad = std::move(grad);
    return sum / static_cast<double>(n);
}

}  // namespace

double grad_check(const MlpModel& model, const Matrix& batch, const Matrix& labels,
                  double epsilon, GradCheckLoss loss) {
    MlpModel probe = model;
    ForwardCache cache;
    Matrix out_grad;
    scalar_loss(probe, batch, labels, loss, &out_grad);
    forward(probe, batch, &cache);
    const Gradients analytic = backward(probe, cache, out_grad);

    double worst = 0.0;
    auto check_param = [&](double* param, double analytic_grad) {
        const double saved = *param;
        *param = saved + epsilon;
        const double lp = scalar_loss(probe, batch, labels, loss, nullptr);
        *param = saved - epsilon;
        const double lm = scalar_loss(probe, batch, labels, loss, nullptr);
        *param = saved;
        const double numeric = (lp - lm) / (2.0 * epsilon);
        const double denom = std::max({std::abs(analytic_grad), std::abs(numeric), 1e-2});
        worst = std::max(worst, std::abs(analytic_grad - numeric) / denom);
    };

    for (std::size_t li = 0; li < probe.layers.size(); ++li) {
        Layer& layer = probe.layers[li];
        for (std::size_t i = 0; i < layer.weight.values.size(); ++i)
            check_param(&layer.weight.values[i], analytic.weight[li].values[i]);
        for (std::size_t i = 0; i < layer.bias.size(); ++i)
            check_param(&layer.bias[i], analytic.bias[li][i]);
    }
    return worst;
}

namespace {

constexpr char kMagic[6] = {'D', 'G', 'M', 'L', 'P', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

struct Reader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (bytes.size() - pos < n) throw IoError("checkpoint: truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = bytes[pos] | (bytes[pos + 1] << 8) | (bytes[pos + 2] << 16) |
                          (static_cast<std::uint32_t>(bytes[pos + 3]) << 24);
        pos += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
        pos += 8;
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const MlpModel& model) {
    std::vector<std::uint8_t> out(kMagic, kMagic + 6);
    put_u32(out, static_cast<std::uint32_t>(model.layers.size()));
    for (const auto& layer : model.layers) {
        put_u32(out, static_cast<std::uint32_t>(layer.weight.cols));
        put_u32(out, static_cast<std::uint32_t>(layer.weight.rows));
        out.push_back(static_cast<std::uint8_t>(layer.activation));
    }
    for (const auto& layer : model.layers) {
        for (double v : layer.weight.values) put_f64(out, v);
        for (double v : layer.bias) put_f64(out, v);
    }
    return out;
}

MlpModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 6 || std::memcmp(bytes.data(), kMagic, 6) != 0)
        throw IoError("checkpoint: bad magic (want DGMLP1)");
    Reader r{bytes, 6};
    const std::uint32_t layer_count = r.u32();
    if (layer_count == 0 || layer_count > 1024) throw IoError("checkpoint: bad layer count");
    MlpModel model;
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        const std::uint32_t in_dim = r.u32();
        const std::uint32_t out_dim = r.u32();
        r.need(1);
        const std::uint8_t tag = bytes[r.pos++];
        if (in_dim == 0 || out_dim == 0) throw IoError("checkpoint: zero layer dimension");
        if (tag > 4) throw IoError("checkpoint: unknown activation tag");
        Layer layer;
        layer.weight = Matrix(out_dim, in_dim);
        layer.bias.assign(out_dim, 0.0);
        layer.activation = static_cast<Activation>(tag);
        model.layers.push_back(std::move(layer));
    }
    for (std::uint32_t i = 1; i < layer_count; ++i)
        if (model.layers[i].weight.cols != model.layers[i - 1].weight.rows)
            throw IoError("checkpoint: layer dimensions do not chain");
    for (auto& layer : model.layers) {
        for (auto& v : layer.weight.values) v = r.f64();
        for (auto& v : layer.bias) v = r.f64();
    }
    return model;
}

void save_model(const std::string& path, const MlpModel& model) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

MlpModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return deserialize_model(bytes);
    } catch (const IoError& e) {
        throw IoError(std::string(e.what()) + " (" + path + ")");
    }
}

}  // namespace gandiv
