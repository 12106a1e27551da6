#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nublur {

/// Outcome of an invariant check. On failure `message` names the violated
/// invariant and the index fields locate it (-1 when not applicable).
struct ValidationReport {
    bool ok = true;
    std::string message;
    int kernel = -1;
    int row = -1;
    int col = -1;

    static ValidationReport pass() { return {}; }
    static ValidationReport fail(std::string message, int kernel = -1, int row = -1, int col = -1) {
        return {false, std::move(message), kernel, row, col};
    }
    explicit operator bool() const { return ok; }
    std::string describe() const;
};

class InvariantError : public std::invalid_argument {
public:
    explicit InvariantError(ValidationReport report)
        : std::invalid_argument(report.describe()), report_(std::move(report)) {}
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

/// How constructors treat slightly-off data. `renormalize` divides kernels by
/// their sum and mixing coefficients by their per-pixel sum before checking.
struct CheckOptions {
    double tolerance = 1e-6;
    bool renormalize = false;
};

ValidationReport check_kernels(int count, int side, std::span<const double> kernels, double tolerance = 1e-6);
ValidationReport check_mixing(int count, int width, int height, std::span<const double> maps,
                              double tolerance = 1e-6);

/// B non-negative, unit-mass kernels of odd side K, stored contiguously.
class KernelBasis {
public:
    KernelBasis(int count, int side, std::vector<double> kernels, CheckOptions options = {});

    /// Single centered delta kernel.
    static KernelBasis delta(int side = 1);

    int count() const { return count_; }
    int side() const { return side_; }
    int radius() const { return side_ / 2; }
    std::size_t kernel_size() const { return static_cast<std::size_t>(side_) * side_; }
    std::span<const double> kernel(int b) const {
        return std::span<const double>(data_).subspan(b * kernel_size(), kernel_size());
    }
    std::span<const double> data() const { return data_; }

private:
    int count_;
    int side_;
    std::vector<double> data_;
};

/// B coefficient maps, non-negative and summing to one at every pixel.
class MixingField {
public:
    MixingField(int count, int width, int height, std::vector<double> maps, CheckOptions options = {});

    /// One map identically equal to one.
    static MixingField constant(int width, int height);

    int count() const { return count_; }
    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t plane_size() const { return static_cast<std::size_t>(width_) * height_; }
    std::span<const double> map(int b) const {
        return std::span<const double>(data_).subspan(b * plane_size(), plane_size());
    }
    double at(int b, int row, int col) const {
        return data_[b * plane_size() + static_cast<std::size_t>(row) * width_ + col];
    }
    std::span<const double> data() const { return data_; }

private:
    int count_;
    int width_;
    int height_;
    std::vector<double> data_;
};

/// Unvalidated blur field contents, as read from disk or built by hand.
struct RawBlurField {
    int count = 0;
    int side = 0;
    int width = 0;
    int height = 0;
    std::vector<double> kernels;  // count * side * side
    std::vector<double> mixing;   // count * height * width
};

/// Low-rank spatially varying blur: per-pixel kernel k_i = sum_b m^b_i k^b.
class BlurField {
public:
    BlurField(KernelBasis basis, MixingField mixing);

    static BlurField from_raw(RawBlurField raw, CheckOptions options = {});
    /// Delta kernel with constant mixing; apply() is the identity.
    static BlurField identity(int width, int height);
    /// A single kernel used everywhere.
    static BlurField uniform(int width, int height, int side, std::vector<double> kernel);

    const KernelBasis& basis() const { return basis_; }
    const MixingField& mixing() const { return mixing_; }
    int count() const { return basis_.count(); }
    int side() const { return basis_.side(); }
    int width() const { return mixing_.width(); }
    int height() const { return mixing_.height(); }

    /// Scalars held by the low-rank form: B(K^2 + HW).
    std::uint64_t storage_scalars() const;
    /// Scalars a per-pixel kernel field would hold: K^2 HW.
    std::uint64_t dense_storage_scalars() const;

    RawBlurField to_raw() const;

private:
    KernelBasis basis_;
    MixingField mixing_;
};

ValidationReport validate(const RawBlurField& field, double tolerance = 1e-6);
ValidationReport validate(const BlurField& field, double tolerance = 1e-6);

/// Per-pixel object identifiers; 0 is background.
class SegmentLabels {
public:
    SegmentLabels(int width, int height, std::vector<std::uint32_t> labels);
    static SegmentLabels single(int width, int height) {
        return SegmentLabels(width, height, std::vector<std::uint32_t>(static_cast<std::size_t>(width) * height, 0));
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::uint32_t at(int row, int col) const { return labels_[static_cast<std::size_t>(row) * width_ + col]; }
    std::span<const std::uint32_t> data() const { return labels_; }

private:
    int width_;
    int height_;
    std::vector<std::uint32_t> labels_;
};

/// Camera response: smooth saturation sharpness, gamma and saturation level.
struct ResponseParams {
    double a = 50.0;
    double gamma = 2.2;
    double sat_threshold = 0.99;

    void validate() const;
};

struct RLConfig {
    int max_iters = 30;
    double lambda_tv = 0.002;
    double tv_epsilon = 1e-3;
    double sat_mask_sigma = 2.0;
    double denom_floor = 1e-3;
    bool use_saturation_model = true;
    bool work_in_linear = true;
    /// Pixels within this Chebyshev radius of a clipped observation also get z = 0.
    int z_dilation = 0;

    void validate() const;
};

}  // namespace nublur
