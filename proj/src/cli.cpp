#include "gandiv/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "gandiv/error.hpp"
#include "gandiv/eval.hpp"
#include "gandiv/experiment.hpp"
#include "gandiv/fid.hpp"
#include "gandiv/gan.hpp"
#include "gandiv/image.hpp"
#include "gandiv/msssim.hpp"
#include "gandiv/net.hpp"
#include "gandiv/preprocess.hpp"
#include "gandiv/rng.hpp"
#include "gandiv/svg.hpp"

namespace gandiv {

namespace {

namespace fs = std::filesystem;

struct GridSize {
    int w = 0;
    int h = 0;
};

GridSize parse_grid(const std::string& text) {
    const auto sep = text.find('x');
    if (sep == std::string::npos || sep == 0 || sep + 1 >= text.size())
        throw std::invalid_argument("grid must look like WxH, got \"" + text + "\"");
    GridSize grid;
    std::size_t used = 0;
    try {
        grid.w = std::stoi(text.substr(0, sep), &used);
        if (used != sep) throw std::invalid_argument("");
        const std::string rest = text.substr(sep + 1);
        grid.h = std::stoi(rest, &used);
        if (used != rest.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw std::invalid_argument("grid must look like WxH, got \"" + text + "\"");
    }
    if (grid.w < 1 || grid.h < 1)
        throw std::invalid_argument("grid sides must be positive, got \"" + text + "\"");
    return grid;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

std::string trimmed(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

// Applies a flat key=value file to a subcommand's long options. Keys name
// options without the leading dashes; values for options already given on
// the command line are ignored, so flags win.
void apply_config_file(CLI::App& cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open \"" + path + "\"");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string entry = trimmed(line);
        if (entry.empty() || entry[0] == '#' || entry[0] == ';') continue;
        const auto where = "config " + path + " line " + std::to_string(line_no);
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(where + ": expected key=value, got \"" + entry + "\"");
        const std::string key = trimmed(entry.substr(0, eq));
        const std::string value = trimmed(entry.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument(where + ": empty key");
        if (key == "config") throw std::invalid_argument(where + ": config cannot nest");
        CLI::Option* opt = cmd.get_option_no_throw("--" + key);
        if (opt == nullptr) throw std::invalid_argument(where + ": unknown key \"" + key + "\"");
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
    }
}

// Writes images as <stem>_00000.pgm ... under dir; optionally records them
// in a manifest whose entries are relative to the manifest's directory.
// Every entry gets the same label so that real (1) and fake (0) manifests
// concatenate directly into a classifier training set.
void write_image_set(const std::string& dir, const std::string& stem,
                     const std::vector<Image>& images, const std::string& manifest_path,
                     int label) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory: " + dir);

    std::vector<std::string> rel_paths;
    const fs::path manifest_dir =
        manifest_path.empty() ? fs::path() : fs::path(manifest_path).parent_path();
    for (std::size_t i = 0; i < images.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%05zu.pgm", stem.c_str(), i);
        const fs::path path = fs::path(dir) / name;
        save_pgm(path.string(), images[i]);
        if (!manifest_path.empty()) {
            fs::path rel = fs::relative(path, manifest_dir.empty() ? "." : manifest_dir, ec);
            rel_paths.push_back(ec ? fs::absolute(path).string() : rel.string());
        }
    }
    if (!manifest_path.empty())
        save_manifest(manifest_path, rel_paths, std::vector<int>(rel_paths.size(), label));
}

void require_at_least(std::size_t n, std::size_t minimum, const std::string& what) {
    if (n < minimum)
        throw IoError(what + ": need at least " + std::to_string(minimum) + " images, got " +
                      std::to_string(n));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"GAN diversity toolkit: adaptive input normalization, MS-SSIM and FID "
                 "diversity scoring, desk-scale adversarial training, and classifier-utility "
                 "reporting"};
    app.require_subcommand(1);

    // normalize
    auto* norm_cmd = app.add_subcommand(
        "normalize", "Apply aiin, gaussian or median preprocessing to a PGM image");
    std::string norm_method;
    std::string norm_input;
    std::string norm_output;
    std::string norm_grid = "8x8";
    std::uint32_t norm_threshold = 50;
    int norm_ksize = 3;
    norm_cmd->add_option("method", norm_method, "One of: aiin, gaussian, median")
        ->required()
        ->check(CLI::IsMember({"aiin", "gaussian", "median"}));
    norm_cmd->add_option("input", norm_input, "Input PGM image")->required();
    norm_cmd->add_option("output", norm_output, "Output PGM image")->required();
    norm_cmd->add_option("--grid", norm_grid, "Tile grid for aiin, as WxH")
        ->capture_default_str();
    norm_cmd->add_option("--threshold", norm_threshold, "Contrast threshold for aiin")
        ->capture_default_str();
    norm_cmd->add_option("--ksize", norm_ksize, "Kernel side for gaussian/median (odd, >= 3)")
        ->capture_default_str();
    norm_cmd->callback([&] {
        const Image img = load_pgm(norm_input);
        Image result;
        if (norm_method == "aiin") {
            const GridSize grid = parse_grid(norm_grid);
            result = aiin_normalize(img, WindowGrid{grid.w, grid.h}, norm_threshold);
        } else if (norm_method == "gaussian") {
            result = gaussian_filter(img, norm_ksize);
        } else {
            result = median_filter(img, norm_ksize);
        }
        save_pgm(norm_output, result);
    });

    // msssim
    auto* ms_cmd = app.add_subcommand(
        "msssim", "Mean pairwise MS-SSIM of two image sets and their collapse delta");
    std::string ms_real;
    std::string ms_fake;
    std::size_t ms_pairs = 0;
    std::uint64_t ms_seed = 0;
    ms_cmd->add_option("real", ms_real, "Manifest of the real image set")->required();
    ms_cmd->add_option("fake", ms_fake, "Manifest of the synthetic image set")->required();
    ms_cmd->add_option("--pairs", ms_pairs, "Sampled pairs per set (default: set size / 2)");
    ms_cmd->add_option("--seed", ms_seed, "Pair sampling seed")->capture_default_str();
    ms_cmd->callback([&] {
        const auto real = load_manifest_images(ms_real);
        const auto fake = load_manifest_images(ms_fake);
        require_at_least(real.size(), 2, ms_real);
        require_at_least(fake.size(), 2, ms_fake);
        const std::size_t real_pairs = ms_pairs > 0 ? ms_pairs : real.size() / 2;
        const std::size_t fake_pairs = ms_pairs > 0 ? ms_pairs : fake.size() / 2;
        const double real_mean = mean_msssim(real, sample_pairs(real.size(), real_pairs, ms_seed));
        const double fake_mean = mean_msssim(fake, sample_pairs(fake.size(), fake_pairs, ms_seed));
        const CollapseVerdict verdict = collapse_delta(real_mean, fake_mean);
        out << "real_mean=" << fmt("%.6f", real_mean) << "\n";
        out << "fake_mean=" << fmt("%.6f", fake_mean) << "\n";
        if (real.size() == fake.size()) {
            // position-matched cross-set score; 1.0 when both manifests list
            // identical images
            Rng rng(ms_seed);
            double sum = 0.0;
            const std::size_t count = ms_pairs > 0 ? ms_pairs : real.size() / 2;
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t idx = rng.below(real.size());
                sum += msssim(real[idx], fake[idx]);
            }
            out << "matched_mean=" << fmt("%.6f", count > 0 ? sum / count : 0.0) << "\n";
        }
        out << "msssim_delta=" << fmt("%.6f", verdict.delta) << "\n";
        out << "collapsed=" << (verdict.collapsed ? "true" : "false") << "\n";
    });

    // fid
    auto* fid_cmd = app.add_subcommand(
        "fid", "Frechet distance between two image sets or two feature CSVs");
    std::string fid_a;
    std::string fid_b;
    bool fid_features = false;
    double fid_eps = 0.0;
    fid_cmd->add_option("a", fid_a, "Manifest (or feature CSV) of the first set")->required();
    fid_cmd->add_option("b", fid_b, "Manifest (or feature CSV) of the second set")->required();
    fid_cmd->add_flag("--features", fid_features, "Treat both inputs as feature CSVs");
    fid_cmd->add_option("--eps", fid_eps, "Diagonal covariance regularization")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    fid_cmd->callback([&] {
        Matrix fa;
        Matrix fb;
        if (fid_features) {
            fa = load_features(fid_a);
            fb = load_features(fid_b);
        } else {
            fa = patchstats_features(load_manifest_images(fid_a));
            fb = patchstats_features(load_manifest_images(fid_b));
        }
        for (const Matrix* m : {&fa, &fb})
            if (m->rows < m->cols + 1)
                err << "warning: " << m->rows << " samples for " << m->cols
                    << "-dimensional features; covariance is rank-deficient (consider --eps)\n";
        const double value = fid(gaussian_stats(fa, fid_eps), gaussian_stats(fb, fid_eps));
        out << "fid=" << fmt("%.6f", value) << "\n";
    });

    // features
    auto* feat_cmd = app.add_subcommand(
        "features", "Extract 768-dim patch-statistics features from a manifest into a CSV");
    std::string feat_manifest;
    std::string feat_out;
    feat_cmd->add_option("manifest", feat_manifest, "Image manifest")->required();
    feat_cmd->add_option("output", feat_out, "Output feature CSV")->required();
    feat_cmd->callback([&] {
        const auto images = load_manifest_images(feat_manifest);
        require_at_least(images.size(), 1, feat_manifest);
        save_features(feat_out, patchstats_features(images));
    });

    // toygen
    auto* toy_cmd = app.add_subcommand(
        "toygen", "Render a multi-modal blob toy dataset as PGM files");
    std::string toy_dir;
    std::string toy_manifest;
    ToyDatasetSpec toy_spec;
    std::uint64_t toy_seed = 0;
    toy_cmd->add_option("outdir", toy_dir, "Output directory")->required();
    toy_cmd->add_option("--n", toy_spec.n, "Number of images")->capture_default_str();
    toy_cmd->add_option("--k-modes", toy_spec.k_modes, "Number of blob modes")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    toy_cmd->add_option("--side", toy_spec.side, "Image side in pixels")->capture_default_str();
    toy_cmd->add_option("--blob-sigma", toy_spec.blob_sigma, "Blob radius parameter")
        ->capture_default_str();
    toy_cmd->add_option("--band-low", toy_spec.band_low, "Low end of the intensity band")
        ->capture_default_str();
    toy_cmd->add_option("--band-high", toy_spec.band_high, "High end of the intensity band")
        ->capture_default_str();
    toy_cmd->add_option("--noise-sigma", toy_spec.noise_sigma, "Pixel noise sigma")
        ->capture_default_str();
    toy_cmd->add_option("--seed", toy_seed, "Dataset seed")->capture_default_str();
    toy_cmd->add_option("--manifest", toy_manifest, "Also write a manifest CSV here");
    toy_cmd->callback([&] {
        write_image_set(toy_dir, "toy", make_toy_dataset(toy_spec, toy_seed), toy_manifest, 1);
    });

    // train-gan
    auto* train_cmd = app.add_subcommand(
        "train-gan", "Train the adversarial pair on a manifest of square images");
    std::string train_manifest;
    std::string train_gen_out;
    std::string train_disc_out;
    std::string train_history_out;
    GanConfig train_cfg;
    train_cmd->add_option("manifest", train_manifest, "Training image manifest")->required();
    train_cmd->add_option("--gen", train_gen_out, "Generator checkpoint output")->required();
    train_cmd->add_option("--disc", train_disc_out, "Discriminator checkpoint output");
    train_cmd->add_option("--history", train_history_out, "Per-epoch loss CSV output");
    train_cmd->add_option("--epochs", train_cfg.epochs, "Training epochs")->capture_default_str();
    train_cmd->add_option("--batch", train_cfg.batch_size, "Batch size")->capture_default_str();
    train_cmd->add_option("--latent", train_cfg.latent_dim, "Latent dimension")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", train_cfg.seed, "Training seed")->capture_default_str();
    train_cmd->callback([&] {
        const auto images = load_manifest_images(train_manifest);
        require_at_least(images.size(), 1, train_manifest);
        if (images[0].width != images[0].height)
            throw IoError("train-gan: images must be square, got " +
                          std::to_string(images[0].width) + "x" +
                          std::to_string(images[0].height));
        train_cfg.image_side = static_cast<std::size_t>(images[0].width);
        const TrainResult result = train_gan(train_cfg, images);
        save_model(train_gen_out, result.generator);
        if (!train_disc_out.empty()) save_model(train_disc_out, result.discriminator);
        if (!train_history_out.empty()) save_history(train_history_out, result.history);
        out << "trained " << train_cfg.epochs << " epochs, disc_steps="
            << result.history.disc_steps << ", gen_steps=" << result.history.gen_steps << "\n";
    });

    // generate
    auto* gen_cmd = app.add_subcommand(
        "generate", "Sample images from a generator checkpoint");
    std::string gen_ckpt;
    std::string gen_dir;
    std::string gen_manifest;
    std::size_t gen_n = 0;
    std::uint64_t gen_seed = 0;
    gen_cmd->add_option("checkpoint", gen_ckpt, "Generator checkpoint")->required();
    gen_cmd->add_option("outdir", gen_dir, "Output directory")->required();
    gen_cmd->add_option("--n", gen_n, "Number of images")->required();
    gen_cmd->add_option("--seed", gen_seed, "Latent sampling seed")->capture_default_str();
    gen_cmd->add_option("--manifest", gen_manifest, "Also write a manifest CSV here");
    gen_cmd->callback([&] {
        const MlpModel model = load_model(gen_ckpt);
        write_image_set(gen_dir, "gen", generate(model, gen_n, gen_seed), gen_manifest, 0);
    });

    // classify
    auto* cls_cmd = app.add_subcommand(
        "classify", "Train the utility classifier and report confusion metrics");
    std::string cls_train;
    std::string cls_test;
    std::string cls_model_out;
    ClassifierConfig cls_cfg;
    cls_cmd->add_option("train", cls_train, "Labeled training manifest (path,label)")->required();
    cls_cmd->add_option("test", cls_test, "Labeled test manifest (path,label)")->required();
    cls_cmd->add_option("--epochs", cls_cfg.epochs, "Training epochs")->capture_default_str();
    cls_cmd->add_option("--batch", cls_cfg.batch_size, "Batch size")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cls_cmd->add_option("--hidden", cls_cfg.hidden, "Hidden layer width")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cls_cmd->add_option("--lr", cls_cfg.lr, "Adam learning rate")->capture_default_str();
    cls_cmd->add_option("--seed", cls_cfg.seed, "Training seed")->capture_default_str();
    cls_cmd->add_option("--model", cls_model_out, "Save the trained model checkpoint here");
    cls_cmd->callback([&] {
        const LabeledDataset train = load_labeled_manifest(cls_train);
        const LabeledDataset test = load_labeled_manifest(cls_test);
        const MlpModel model = train_classifier(train, cls_cfg);
        if (!cls_model_out.empty()) save_model(cls_model_out, model);
        const ConfusionCounts counts = evaluate_classifier(model, test);
        const UtilityMetrics metrics = confusion_metrics(counts);
        out << "tp=" << counts.tp << " fp=" << counts.fp << " tn=" << counts.tn
            << " fn=" << counts.fn << "\n";
        out << "accuracy=" << fmt("%.4f", metrics.accuracy) << "\n";
        out << "precision=" << fmt("%.4f", metrics.precision) << "\n";
        out << "recall=" << fmt("%.4f", metrics.recall) << "\n";
        out << "specificity=" << fmt("%.4f", metrics.specificity) << "\n";
        if (metrics.degenerate) out << "degenerate=true\n";
    });

    // experiment
    auto* exp_cmd = app.add_subcommand(
        "experiment", "Run the full variant sweep and emit the report rows CSV");
    std::string exp_config;
    exp_cmd->add_option("--config", exp_config, "Flat key=value config file; flags override");
    std::vector<std::string> exp_variants = {"none", "aiin"};
    std::string exp_out;
    std::string exp_grid = "8x8";
    ExperimentVariant exp_base;
    exp_base.classifier.epochs = 40;
    exp_cmd->add_option("--variants", exp_variants,
                        "Comma-separated preprocessing variants (none,aiin,gaussian,median)")
        ->delimiter(',')
        ->capture_default_str();
    exp_cmd->add_option("--out", exp_out, "Also write the rows CSV here");
    exp_cmd->add_option("--n", exp_base.toy.n, "Toy dataset size")->capture_default_str();
    exp_cmd->add_option("--k-modes", exp_base.toy.k_modes, "Toy dataset modes")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    exp_cmd->add_option("--side", exp_base.toy.side, "Toy image side")->capture_default_str();
    exp_cmd->add_option("--blob-sigma", exp_base.toy.blob_sigma, "Toy blob radius")
        ->capture_default_str();
    exp_cmd->add_option("--band-low", exp_base.toy.band_low, "Toy intensity band low end")
        ->capture_default_str();
    exp_cmd->add_option("--band-high", exp_base.toy.band_high, "Toy intensity band high end")
        ->capture_default_str();
    exp_cmd->add_option("--noise-sigma", exp_base.toy.noise_sigma, "Toy pixel noise sigma")
        ->capture_default_str();
    exp_cmd->add_option("--epochs", exp_base.gan.epochs, "GAN training epochs")
        ->capture_default_str();
    exp_cmd->add_option("--batch", exp_base.gan.batch_size, "GAN batch size")
        ->capture_default_str();
    exp_cmd->add_option("--latent", exp_base.gan.latent_dim, "GAN latent dimension")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    exp_cmd->add_option("--seed", exp_base.gan.seed, "Master seed for every stage")
        ->capture_default_str();
    exp_cmd->add_option("--grid", exp_grid, "aiin tile grid, as WxH")->capture_default_str();
    exp_cmd->add_option("--threshold", exp_base.threshold, "aiin contrast threshold")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    exp_cmd->add_option("--ksize", exp_base.ksize, "gaussian/median kernel side")
        ->capture_default_str();
    exp_cmd->add_option("--pairs", exp_base.pairs,
                        "Sampled MS-SSIM pairs per set (default: n / 2)");
    exp_cmd->add_option("--classifier-epochs", exp_base.classifier.epochs,
                        "Utility classifier epochs")
        ->capture_default_str();
    exp_cmd->add_option("--classifier-batch", exp_base.classifier.batch_size,
                        "Utility classifier batch size")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    exp_cmd->add_option("--classifier-hidden", exp_base.classifier.hidden,
                        "Utility classifier hidden width")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    exp_cmd->callback([&] {
        if (!exp_config.empty()) apply_config_file(*exp_cmd, exp_config);
        const GridSize grid = parse_grid(exp_grid);
        exp_base.grid_w = static_cast<std::size_t>(grid.w);
        exp_base.grid_h = static_cast<std::size_t>(grid.h);
        ReportTable table;
        for (const auto& tag : exp_variants) {
            ExperimentVariant variant = exp_base;
            variant.augmentation = parse_augmentation(tag);
            append_row(table, run_experiment(variant));
        }
        out << report_csv(table);
        if (!exp_out.empty()) save_report(exp_out, table);
    });

    // report
    auto* rep_cmd = app.add_subcommand(
        "report", "Render a rows CSV as a table, optionally re-emitting CSV and an SVG chart");
    std::string rep_input;
    std::string rep_csv_out;
    std::string rep_svg_out;
    std::string rep_metric = "fid";
    rep_cmd->add_option("rows", rep_input, "Rows CSV produced by experiment")->required();
    rep_cmd->add_option("--csv-out", rep_csv_out, "Re-emit the parsed rows as CSV here");
    rep_cmd->add_option("--svg", rep_svg_out, "Write a bar chart SVG here");
    rep_cmd->add_option("--metric", rep_metric, "Column charted by --svg")
        ->capture_default_str();
    rep_cmd->callback([&] {
        const ReportTable table = load_report(rep_input);
        out << render_report(table);
        if (!rep_csv_out.empty()) save_report(rep_csv_out, table);
        if (!rep_svg_out.empty()) save_svg_bars(rep_svg_out, table, rep_metric);
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(std::move(reversed));
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace gandiv
