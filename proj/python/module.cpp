#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gandiv/eval.hpp"
#include "gandiv/fid.hpp"
#include "gandiv/gan.hpp"
#include "gandiv/image.hpp"
#include "gandiv/msssim.hpp"
#include "gandiv/net.hpp"
#include "gandiv/preprocess.hpp"

namespace py = pybind11;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

gandiv::Image to_image(const U8Array& arr) {
    if (arr.ndim() != 2) throw std::invalid_argument("image must be a 2-D uint8 array");
    gandiv::Image img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    std::copy(arr.data(), arr.data() + arr.size(), img.data.begin());
    return img;
}

py::array_t<std::uint8_t> from_image(const gandiv::Image& img) {
    py::array_t<std::uint8_t> arr({img.height, img.width});
    std::copy(img.data.begin(), img.data.end(), arr.mutable_data());
    return arr;
}

gandiv::Matrix to_matrix(const F64Array& arr) {
    if (arr.ndim() != 2) throw std::invalid_argument("features must be a 2-D float64 array");
    gandiv::Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
    std::copy(arr.data(), arr.data() + arr.size(), m.values.begin());
    return m;
}

std::vector<gandiv::Image> to_images(const std::vector<U8Array>& arrays) {
    std::vector<gandiv::Image> images;
    images.reserve(arrays.size());
    for (const auto& arr : arrays) images.push_back(to_image(arr));
    return images;
}

// Thin trained-generator handle so python callers can sample and persist it.
struct Generator {
    gandiv::MlpModel model;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "GAN diversity toolkit core: adaptive normalization, MS-SSIM, FID, "
              "desk-scale adversarial training";

    m.def(
        "aiin_normalize",
        [](const U8Array& img, int tiles_x, int tiles_y, std::uint32_t threshold) {
            return from_image(
                gandiv::aiin_normalize(to_image(img), gandiv::WindowGrid{tiles_x, tiles_y}, threshold));
        },
        py::arg("image"), py::arg("tiles_x") = 8, py::arg("tiles_y") = 8,
        py::arg("threshold") = 50,
        "Contrast-limited adaptive histogram equalization over a tile grid");

    m.def(
        "gaussian_filter",
        [](const U8Array& img, int ksize) {
            return from_image(gandiv::gaussian_filter(to_image(img), ksize));
        },
        py::arg("image"), py::arg("ksize") = 3);

    m.def(
        "median_filter",
        [](const U8Array& img, int ksize) {
            return from_image(gandiv::median_filter(to_image(img), ksize));
        },
        py::arg("image"), py::arg("ksize") = 3);

    m.def(
        "clip_and_redistribute",
        [](const std::vector<std::uint32_t>& hist, std::uint32_t clip_limit) {
            return gandiv::clip_and_redistribute(hist, clip_limit);
        },
        py::arg("histogram"), py::arg("clip_limit"),
        "Histogram clipping with exact mass-preserving redistribution");

    m.def(
        "msssim",
        [](const U8Array& a, const U8Array& b) {
            return gandiv::msssim(to_image(a), to_image(b));
        },
        py::arg("a"), py::arg("b"), "Multi-scale structural similarity in [0, 1]");

    m.def(
        "extract_patchstats",
        [](const U8Array& img) { return gandiv::extract_patchstats(to_image(img)); },
        py::arg("image"), "768-dim deterministic patch-statistics feature vector");

    m.def(
        "features",
        [](const std::vector<U8Array>& images) {
            const gandiv::Matrix m = gandiv::patchstats_features(to_images(images));
            py::array_t<double> out({m.rows, m.cols});
            std::copy(m.values.begin(), m.values.end(), out.mutable_data());
            return out;
        },
        py::arg("images"), "Patch-statistics feature matrix, one row per image");

    m.def(
        "fid",
        [](const F64Array& a, const F64Array& b, double eps) {
            return gandiv::fid(gandiv::gaussian_stats(to_matrix(a), eps),
                               gandiv::gaussian_stats(to_matrix(b), eps));
        },
        py::arg("features_a"), py::arg("features_b"), py::arg("eps") = 0.0,
        "Frechet distance between the Gaussian fits of two feature matrices");

    m.def(
        "collapse_delta",
        [](double real_score, double fake_score) {
            const gandiv::CollapseVerdict v = gandiv::collapse_delta(real_score, fake_score);
            return py::make_tuple(v.delta, v.collapsed);
        },
        py::arg("real_score"), py::arg("fake_score"),
        "(delta, collapsed): positive fake-minus-real delta flags mode collapse");

    m.def(
        "make_toy_dataset",
        [](std::size_t k_modes, std::size_t side, double blob_sigma, int band_low, int band_high,
           double noise_sigma, std::size_t n, std::uint64_t seed) {
            gandiv::ToyDatasetSpec spec;
            spec.k_modes = k_modes;
            spec.side = side;
            spec.blob_sigma = blob_sigma;
            spec.band_low = band_low;
            spec.band_high = band_high;
            spec.noise_sigma = noise_sigma;
            spec.n = n;
            std::vector<py::array_t<std::uint8_t>> out;
            for (const auto& img : gandiv::make_toy_dataset(spec, seed))
                out.push_back(from_image(img));
            return out;
        },
        py::arg("k_modes") = 4, py::arg("side") = 16, py::arg("blob_sigma") = 2.5,
        py::arg("band_low") = 20, py::arg("band_high") = 80, py::arg("noise_sigma") = 0.0,
        py::arg("n") = 400, py::arg("seed") = 0, "Multi-modal blob toy dataset");

    m.def(
        "geometric_augment",
        [](const U8Array& img, double max_rotation_deg, double max_shear, double max_zoom,
           std::uint64_t seed) {
            return from_image(gandiv::geometric_augment(to_image(img), max_rotation_deg,
                                                        max_shear, max_zoom, seed));
        },
        py::arg("image"), py::arg("max_rotation_deg") = 15.0, py::arg("max_shear") = 0.2,
        py::arg("max_zoom") = 0.2, py::arg("seed") = 0);

    m.def(
        "confusion_metrics",
        [](std::uint64_t tp, std::uint64_t fp, std::uint64_t tn, std::uint64_t fn) {
            const gandiv::UtilityMetrics u =
                gandiv::confusion_metrics(gandiv::ConfusionCounts{tp, fp, tn, fn});
            py::dict out;
            out["accuracy"] = u.accuracy;
            out["precision"] = u.precision;
            out["recall"] = u.recall;
            out["specificity"] = u.specificity;
            out["degenerate"] = u.degenerate;
            return out;
        },
        py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));

    py::class_<Generator>(m, "Generator", "Trained generator handle")
        .def(
            "generate",
            [](const Generator& g, std::size_t n, std::uint64_t seed) {
                std::vector<py::array_t<std::uint8_t>> out;
                for (const auto& img : gandiv::generate(g.model, n, seed))
                    out.push_back(from_image(img));
                return out;
            },
            py::arg("n"), py::arg("seed") = 0)
        .def("save", [](const Generator& g, const std::string& path) {
            gandiv::save_model(path, g.model);
        });

    m.def(
        "load_generator",
        [](const std::string& path) { return Generator{gandiv::load_model(path)}; },
        py::arg("path"));

    m.def(
        "train_gan",
        [](const std::vector<U8Array>& images, std::size_t epochs, std::size_t batch_size,
           std::size_t latent_dim, std::uint64_t seed) {
            const auto imgs = to_images(images);
            if (imgs.empty()) throw std::invalid_argument("train_gan: no images");
            gandiv::GanConfig cfg;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            cfg.latent_dim = latent_dim;
            cfg.seed = seed;
            cfg.image_side = static_cast<std::size_t>(imgs[0].width);
            const gandiv::TrainResult result = gandiv::train_gan(cfg, imgs);
            py::dict history;
            history["d_loss"] = result.history.d_loss;
            history["g_loss"] = result.history.g_loss;
            history["disc_steps"] = result.history.disc_steps;
            history["gen_steps"] = result.history.gen_steps;
            return py::make_tuple(Generator{result.generator}, history);
        },
        py::arg("images"), py::arg("epochs") = 200, py::arg("batch_size") = 20,
        py::arg("latent_dim") = 100, py::arg("seed") = 0,
        "Returns (generator, history) after adversarial training");
}
