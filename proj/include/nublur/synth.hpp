#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nublur/blur_operator.hpp"
#include "nublur/image.hpp"
#include "nublur/types.hpp"

namespace nublur::synth {

/// Hand-shake surrogate: velocity follows a damped AR(1) process driven by
/// Gaussian acceleration, position integrates velocity over the exposure.
struct TrajectoryParams {
    int steps = 1000;
    double exposure = 0.5;       // seconds, at most 1
    double damping = 0.995;      // per-step velocity retention
    double accel_sigma = 150.0;  // pixels / s^2 per sqrt(s)
    std::uint64_t seed = 0;

    double dt() const { return exposure / steps; }
    void validate() const;
};

struct Point2 {
    double x;
    double y;
};

/// steps + 1 positions starting at rest at the origin, shifted so their
/// centroid is the origin. Deterministic in params.seed.
std::vector<Point2> sample_trajectory(const TrajectoryParams& params);

/// Bilinear splat onto a side x side grid centered at (side-1)/2, normalized to
/// unit mass. Returns nullopt when any sample falls outside the inner
/// (side-2) x (side-2) window, so the outermost ring never carries mass.
std::optional<std::vector<double>> rasterize_kernel(std::span<const Point2> trajectory, int side);

/// Draws trajectory seeds from `rng` until one rasterizes; throws after
/// `max_attempts` rejections.
std::vector<double> sample_kernel(TrajectoryParams params, int side, std::mt19937_64& rng, int max_attempts = 1000);

inline constexpr int kMaxObjectRegions = 3;
inline constexpr std::size_t kMinRegionPixels = 400;

/// Sharp image with background (label 0) and up to three object labels. One
/// kernel per region: index 0 is the background, then objects in ascending
/// label order.
struct SceneSpec {
    Image sharp;
    SegmentLabels labels;
    int side;
    std::vector<std::vector<double>> kernels;
};

struct SynthResult {
    Image blurry;            // clipped to [0, 1]
    Image blurry_unclipped;  // sum of mixed region blurs before clipping
    BlurField field;
    std::optional<DenseKernelField> dense;
};

/// Distinct non-zero labels in ascending order.
std::vector<std::uint32_t> object_labels(const SegmentLabels& labels);

/// Keeps the `max_regions` largest objects with at least `min_pixels` pixels,
/// relabelled 1..n by original label order; everything else becomes background.
SegmentLabels select_object_regions(const SegmentLabels& labels, int max_regions = kMaxObjectRegions,
                                    std::size_t min_pixels = kMinRegionPixels);

/// Region masks are smoothed with their own kernel, renormalized per pixel,
/// and used as mixing coefficients for the region kernels; the blurry image
/// is the mixed sum of circular region blurs.
SynthResult synth_blur(const SceneSpec& spec, bool want_dense = false);

/// synth_blur on the scene edge-padded by (K+1)/2, cropped back to the input
/// size, so the circular wrap never reaches the visible image.
SynthResult synth_blur_padded(const SceneSpec& spec, bool want_dense = false);

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v);
void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b);

/// Scales the HSV value channel of an RGB image and clips back to [0, 1].
Image augment_exposure(const Image& u, double scale);
/// Uniform draw from [0.5, 1.5].
double random_exposure_scale(std::mt19937_64& rng);

struct LabeledImage {
    Image image;
    SegmentLabels labels;
};

struct DatasetOptions {
    TrajectoryParams trajectory;
    int side = 33;
    std::uint64_t seed = 0;
    int count = -1;   // samples to emit; -1 means one per input image
    int workers = 1;  // parallel items; output does not depend on it
};

struct ManifestRow {
    std::string sharp_path;
    std::string blurry_path;
    std::string field_path;
    std::uint64_t seed;
    int regions;
};

struct DatasetReport {
    std::vector<ManifestRow> rows;
    std::vector<std::pair<int, std::string>> failures;  // item index, message
};

/// Seed for item `index`, derived from the dataset seed only.
std::uint64_t item_seed(std::uint64_t seed, std::uint64_t index);

/// Writes sample_NNNNNN_{sharp,blurry}.pfm and sample_NNNNNN_field.nubf plus
/// manifest.tsv into out_dir. Item failures are recorded and skipped.
DatasetReport generate_dataset(std::span<const LabeledImage> items, const DatasetOptions& options,
                               const std::filesystem::path& out_dir);

/// One tab-separated line: sharp, blurry, field, seed, region count.
std::string format_manifest_row(const ManifestRow& row);

}  // namespace nublur::synth
