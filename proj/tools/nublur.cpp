#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "nublur/blur_operator.hpp"
#include "nublur/io.hpp"
#include "nublur/metrics.hpp"
#include "nublur/response.hpp"
#include "nublur/rl.hpp"
#include "nublur/synth.hpp"
#include "nublur/types.hpp"

namespace fs = std::filesystem;
using namespace nublur;

namespace {

// Errors the user can fix; reported as a single line.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
    if (seed) return *seed;
    std::random_device rd;
    const std::uint64_t s = (std::uint64_t(rd()) << 32) ^ rd();
    std::cerr << "seed: " << s << "\n";
    return s;
}

Image clamp01(Image img) {
    for (double& x : img.data()) x = std::clamp(x, 0.0, 1.0);
    return img;
}

bool on_off(const std::string& s) { return s == "on"; }

const CLI::IsMember kOnOff{std::vector<std::string>{"on", "off"}};

// ---------------------------------------------------------------------------

struct BlurArgs {
    std::string field, input, output, mode = "clip";
    double noise_sigma = 0.0, gamma = 2.2;
    std::optional<std::uint64_t> seed;
};

int run_blur(const BlurArgs& a) {
    const BlurField field = io::read_blurfield(a.field);
    const Image u = io::read_image(a.input);
    if (u.width() != field.width() || u.height() != field.height()) {
        throw UsageError("image is " + std::to_string(u.width()) + "x" + std::to_string(u.height()) +
                         " but field is " + std::to_string(field.width()) + "x" + std::to_string(field.height()));
    }
    if (a.noise_sigma < 0.0) throw UsageError("--noise-sigma must be >= 0");
    ResponseParams params;
    params.gamma = a.gamma;
    params.validate();
    std::mt19937_64 rng(a.noise_sigma > 0.0 ? resolve_seed(a.seed) : a.seed.value_or(0));
    const CaptureMode mode = a.mode == "smooth" ? CaptureMode::smooth : CaptureMode::hard_clip;
    io::write_image(clamp01(forward_capture(field, u, a.noise_sigma, params, mode, rng)), a.output);
    return 0;
}

// ---------------------------------------------------------------------------

struct DeblurArgs {
    std::string field, input, output, log, sat = "on", linear = "on";
    RLConfig config;
    ResponseParams params;
};

int run_deblur(DeblurArgs a) {
    a.config.use_saturation_model = on_off(a.sat);
    a.config.work_in_linear = on_off(a.linear);
    a.config.validate();
    a.params.validate();
    const BlurField field = io::read_blurfield(a.field);
    const Image v = io::read_image(a.input);
    if (v.width() != field.width() || v.height() != field.height()) {
        throw UsageError("image is " + std::to_string(v.width()) + "x" + std::to_string(v.height()) +
                         " but field is " + std::to_string(field.width()) + "x" + std::to_string(field.height()));
    }
    const DeblurResult result = deblur(v, field, a.config, a.params);
    io::write_image(clamp01(result.image), a.output);
    if (!a.log.empty()) {
        std::ofstream out(a.log);
        if (!out) throw io::FormatError(io::ErrorCode::io, "cannot write " + a.log);
        out << "iter,reblur_loss\n";
        out.precision(17);
        for (std::size_t i = 0; i < result.losses.size(); ++i) out << i << ',' << result.losses[i] << '\n';
    }
    std::cerr << "iterations: " << result.iterations << " ("
              << (result.stop == StopReason::max_iters ? "max iterations" : "no improvement") << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string input_dir, labels_dir, out_dir;
    int kernel_size = 33;
    double exposure = synth::TrajectoryParams{}.exposure;
    int count = -1;
    std::optional<std::uint64_t> seed;
};

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".pfm";
}

int run_synth(const SynthArgs& a) {
    if (a.kernel_size < 3 || a.kernel_size % 2 == 0) throw UsageError("--kernel-size must be odd and >= 3");
    if (!(a.exposure > 0.0 && a.exposure <= 1.0)) throw UsageError("--exposure must be in (0, 1]");
    if (!fs::is_directory(a.input_dir)) throw UsageError("input directory not found: " + a.input_dir);
    if (!fs::is_directory(a.labels_dir)) throw UsageError("labels directory not found: " + a.labels_dir);

    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(a.input_dir)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) inputs.push_back(entry.path());
    }
    std::sort(inputs.begin(), inputs.end());

    std::vector<synth::LabeledImage> items;
    for (const auto& p : inputs) {
        const fs::path label_path = fs::path(a.labels_dir) / (p.stem().string() + ".png");
        if (!fs::exists(label_path)) throw UsageError("missing labels for " + p.filename().string());
        Image img = io::read_image(p);
        SegmentLabels labels = io::read_labels(label_path);
        if (labels.width() != img.width() || labels.height() != img.height()) {
            throw UsageError("label map size does not match " + p.filename().string());
        }
        items.push_back({std::move(img), std::move(labels)});
    }

    synth::DatasetOptions opts;
    opts.side = a.kernel_size;
    opts.trajectory.exposure = a.exposure;
    opts.seed = resolve_seed(a.seed);
    opts.count = a.count;
    opts.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto report = synth::generate_dataset(items, opts, a.out_dir);
    for (const auto& [index, message] : report.failures) {
        std::cerr << "warning: item " << index << " skipped: " << message << "\n";
    }
    std::cerr << "wrote " << report.rows.size() << " samples to " << a.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string pred, ref, field, gt_field, labels, metric;
};

std::vector<double> eval_weights(const EvalArgs& a, int width, int height) {
    if (a.labels.empty()) return metrics::uniform_weights(width, height);
    const SegmentLabels labels = io::read_labels(a.labels);
    if (labels.width() != width || labels.height() != height) throw UsageError("label map size mismatch");
    return metrics::segment_weights(labels);
}

void require_flag(const std::string& value, const char* flag, const std::string& metric) {
    if (value.empty()) throw UsageError(std::string(flag) + " is required for --metric " + metric);
}

void print_value(double x) {
    if (std::isinf(x)) {
        std::printf("inf\n");
    } else {
        std::printf("%.6f\n", x);
    }
}

int run_eval(const EvalArgs& a) {
    if (a.metric == "psnr" || a.metric == "reblur") {
        require_flag(a.pred, "--pred", a.metric);
        require_flag(a.ref, "--ref", a.metric);
        const Image pred = io::read_image(a.pred);
        const Image ref = io::read_image(a.ref);
        if (!pred.same_shape(ref)) throw UsageError("--pred and --ref have different shapes");
        if (a.metric == "psnr") {
            print_value(metrics::psnr(pred, ref));
        } else {
            print_value(metrics::reblur_loss(pred, ref, eval_weights(a, pred.width(), pred.height())));
        }
        return 0;
    }
    require_flag(a.field, "--field", a.metric);
    require_flag(a.gt_field, "--gt-field", a.metric);
    const BlurField field = io::read_blurfield(a.field);
    const BlurField gt = io::read_blurfield(a.gt_field);
    if (field.width() != gt.width() || field.height() != gt.height() || field.side() != gt.side()) {
        throw UsageError("--field and --gt-field have different dimensions or kernel sizes");
    }
    const DenseKernelField dense = densify(gt);
    const int p = a.metric == "kernel-l1" ? 1 : 2;
    print_value(metrics::kernel_loss(field, dense, eval_weights(a, field.width(), field.height()), p));
    return 0;
}

// ---------------------------------------------------------------------------

struct KernelsArgs {
    std::string field, output;
    int stride = 0;
};

int run_kernels(const KernelsArgs& a) {
    const BlurField field = io::read_blurfield(a.field);
    if (a.stride < field.side()) {
        throw UsageError("--stride " + std::to_string(a.stride) + " is smaller than the kernel size " +
                         std::to_string(field.side()));
    }
    io::write_image(io::render_kernel_grid(field, a.stride), a.output);
    return 0;
}

// ---------------------------------------------------------------------------

struct GenFieldArgs {
    std::vector<std::string> kernels, masks;
    std::string output;
};

int run_gen_field(const GenFieldArgs& a) {
    if (a.kernels.size() != a.masks.size()) {
        throw UsageError("got " + std::to_string(a.kernels.size()) + " kernels but " + std::to_string(a.masks.size()) +
                         " masks");
    }
    const int count = static_cast<int>(a.kernels.size());
    int side = 0;
    std::vector<double> kernels;
    for (const auto& path : a.kernels) {
        const Image k = io::read_image(path);
        if (k.channels() != 1) throw UsageError("kernel " + path + " must be single channel");
        if (k.width() != k.height() || k.width() % 2 == 0) throw UsageError("kernel " + path + " must be square and odd");
        if (side == 0) side = k.width();
        if (k.width() != side) throw UsageError("kernel " + path + " has a different size");
        double sum = 0.0;
        for (double x : k.data()) {
            if (x < 0.0) throw UsageError("kernel " + path + " has negative entries");
            sum += x;
        }
        if (sum <= 0.0) throw UsageError("kernel " + path + " has zero mass");
        if (std::abs(sum - 1.0) > 1e-4) std::cerr << "warning: kernel " << path << " renormalized to unit mass\n";
        for (double x : k.data()) kernels.push_back(x / sum);
    }

    int width = 0, height = 0;
    std::vector<double> mixing;
    for (const auto& path : a.masks) {
        const Image m = io::read_image(path);
        if (m.channels() != 1) throw UsageError("mask " + path + " must be single channel");
        if (width == 0) width = m.width(), height = m.height();
        if (m.width() != width || m.height() != height) throw UsageError("mask " + path + " has a different size");
        for (double x : m.data()) {
            if (x < 0.0) throw UsageError("mask " + path + " has negative entries");
            mixing.push_back(x);
        }
    }

    const std::size_t n = static_cast<std::size_t>(width) * height;
    bool renormalized = false;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int b = 0; b < count; ++b) s += mixing[b * n + i];
        if (s <= 0.0) {
            throw UsageError("masks sum to zero at pixel (" + std::to_string(i / width) + ", " +
                             std::to_string(i % width) + ")");
        }
        if (std::abs(s - 1.0) > 1e-6) renormalized = true;
    }
    if (renormalized) std::cerr << "warning: mixing masks renormalized to sum to 1 per pixel\n";

    RawBlurField raw{count, side, width, height, std::move(kernels), std::move(mixing)};
    const BlurField field = BlurField::from_raw(std::move(raw), {1e-6, true});
    io::write_blurfield(field, a.output);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-uniform motion blur toolkit"};
    app.require_subcommand(1);

    BlurArgs blur;
    auto* blur_cmd = app.add_subcommand("blur", "Apply a blur field to a sharp image");
    blur_cmd->add_option("--field", blur.field, "Blur field (.nubf)")->required();
    blur_cmd->add_option("--input", blur.input, "Sharp image")->required();
    blur_cmd->add_option("--output", blur.output, "Blurred image")->required();
    blur_cmd->add_option("--noise-sigma", blur.noise_sigma, "Gaussian noise std in linear space")->capture_default_str();
    blur_cmd->add_option("--gamma", blur.gamma, "Display gamma")->capture_default_str();
    blur_cmd->add_option("--mode", blur.mode, "Sensor response")
        ->check(CLI::IsMember({"smooth", "clip"}))
        ->capture_default_str();
    blur_cmd->add_option("--seed", blur.seed, "Noise seed");

    DeblurArgs deb;
    auto* deb_cmd = app.add_subcommand("deblur", "Richardson-Lucy deblurring with a known blur field");
    deb_cmd->add_option("--field", deb.field, "Blur field (.nubf)")->required();
    deb_cmd->add_option("--input", deb.input, "Blurry image")->required();
    deb_cmd->add_option("--output", deb.output, "Restored image")->required();
    deb_cmd->add_option("--iters", deb.config.max_iters, "Maximum iterations")->capture_default_str();
    deb_cmd->add_option("--lambda-tv", deb.config.lambda_tv, "TV weight")->capture_default_str();
    deb_cmd->add_option("--tv-eps", deb.config.tv_epsilon, "TV smoothing")->capture_default_str();
    deb_cmd->add_option("--sat", deb.sat, "Saturation model")->check(kOnOff)->capture_default_str();
    deb_cmd->add_option("--sat-threshold", deb.params.sat_threshold, "Saturation threshold")->capture_default_str();
    deb_cmd->add_option("--mask-sigma", deb.config.sat_mask_sigma, "Saturation mask blur")->capture_default_str();
    deb_cmd->add_option("--gamma", deb.params.gamma, "Display gamma")->capture_default_str();
    deb_cmd->add_option("--linear", deb.linear, "Deblur in linear space")->check(kOnOff)->capture_default_str();
    deb_cmd->add_option("--log", deb.log, "CSV of per-iteration reblur loss");

    SynthArgs syn;
    auto* syn_cmd = app.add_subcommand("synth", "Generate a synthetic blurry dataset");
    syn_cmd->add_option("--input-dir", syn.input_dir, "Sharp images")->required();
    syn_cmd->add_option("--labels-dir", syn.labels_dir, "Label maps (<stem>.png)")->required();
    syn_cmd->add_option("--out-dir", syn.out_dir, "Output directory")->required();
    syn_cmd->add_option("--kernel-size", syn.kernel_size, "Kernel side (odd)")->capture_default_str();
    syn_cmd->add_option("--exposure", syn.exposure, "Exposure time in seconds")->capture_default_str();
    syn_cmd->add_option("--seed", syn.seed, "Dataset seed");
    syn_cmd->add_option("--count", syn.count, "Number of samples (default: one per image)");

    EvalArgs ev;
    auto* ev_cmd = app.add_subcommand("eval", "Compute a metric");
    ev_cmd->add_option("--pred", ev.pred, "Predicted image");
    ev_cmd->add_option("--ref", ev.ref, "Reference image");
    ev_cmd->add_option("--field", ev.field, "Predicted blur field");
    ev_cmd->add_option("--gt-field", ev.gt_field, "Ground-truth blur field");
    ev_cmd->add_option("--labels", ev.labels, "Segment labels for loss weights");
    ev_cmd->add_option("--metric", ev.metric, "Metric")
        ->required()
        ->check(CLI::IsMember({"psnr", "reblur", "kernel-l1", "kernel-l2"}));

    KernelsArgs ker;
    auto* ker_cmd = app.add_subcommand("kernels", "Render per-pixel kernels on a grid");
    ker_cmd->add_option("--field", ker.field, "Blur field (.nubf)")->required();
    ker_cmd->add_option("--stride", ker.stride, "Grid spacing in pixels")->required();
    ker_cmd->add_option("--output", ker.output, "Output image")->required();

    GenFieldArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-field", "Build a blur field from kernels and masks");
    gen_cmd->add_option("--kernel", gen.kernels, "Kernel image, repeatable")->required();
    gen_cmd->add_option("--mask", gen.masks, "Mixing mask image, repeatable")->required();
    gen_cmd->add_option("--output", gen.output, "Output field (.nubf)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*blur_cmd) return run_blur(blur);
        if (*deb_cmd) return run_deblur(deb);
        if (*syn_cmd) return run_synth(syn);
        if (*ev_cmd) return run_eval(ev);
        if (*ker_cmd) return run_kernels(ker);
        if (*gen_cmd) return run_gen_field(gen);
    } catch (const UsageError& e) {
        std::cerr << "nublur: error: " << e.what() << "\n";
        return 2;
    } catch (const io::FormatError& e) {
        std::cerr << "nublur: error: " << io::to_string(e.code()) << ": " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "nublur: error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
