#include "nublur/types.hpp"

#include <cmath>
#include <sstream>

namespace nublur {

std::string ValidationReport::describe() const {
    if (ok) return "ok";
    std::ostringstream os;
    os << message;
    if (kernel >= 0) os << " (kernel " << kernel;
    if (row >= 0) os << (kernel >= 0 ? ", " : " (") << "pixel " << row << "," << col;
    if (kernel >= 0 || row >= 0) os << ")";
    return os.str();
}

ValidationReport check_kernels(int count, int side, std::span<const double> kernels, double tolerance) {
    if (count < 1) return ValidationReport::fail("basis must hold at least one kernel");
    if (side < 1 || side % 2 == 0) return ValidationReport::fail("kernel side must be odd and positive");
    const std::size_t ksize = static_cast<std::size_t>(side) * side;
    if (kernels.size() != ksize * count) return ValidationReport::fail("kernel data length mismatch");
    for (int b = 0; b < count; ++b) {
        const auto k = kernels.subspan(b * ksize, ksize);
        double sum = 0.0;
        for (std::size_t j = 0; j < ksize; ++j) {
            const int r = static_cast<int>(j) / side;
            const int c = static_cast<int>(j) % side;
            if (!std::isfinite(k[j])) return ValidationReport::fail("non-finite kernel entry", b, r, c);
            if (k[j] < 0.0) return ValidationReport::fail("negative kernel entry", b, r, c);
            sum += k[j];
        }
        if (std::abs(sum - 1.0) > tolerance) return ValidationReport::fail("kernel not unit mass", b);
    }
    return ValidationReport::pass();
}

ValidationReport check_mixing(int count, int width, int height, std::span<const double> maps, double tolerance) {
    if (count < 1) return ValidationReport::fail("mixing must hold at least one map");
    if (width < 1 || height < 1) return ValidationReport::fail("mixing dimensions must be positive");
    const std::size_t plane = static_cast<std::size_t>(width) * height;
    if (maps.size() != plane * count) return ValidationReport::fail("mixing data length mismatch");
    for (int b = 0; b < count; ++b) {
        for (std::size_t i = 0; i < plane; ++i) {
            const double m = maps[b * plane + i];
            if (!std::isfinite(m)) {
                return ValidationReport::fail("non-finite mixing coefficient", b, int(i / width), int(i % width));
            }
            if (m < 0.0) return ValidationReport::fail("negative mixing coefficient", b, int(i / width), int(i % width));
        }
    }
    for (std::size_t i = 0; i < plane; ++i) {
        double sum = 0.0;
        for (int b = 0; b < count; ++b) sum += maps[b * plane + i];
        if (std::abs(sum - 1.0) > tolerance) {
            return ValidationReport::fail("mixing not normalized", -1, int(i / width), int(i % width));
        }
    }
    return ValidationReport::pass();
}

KernelBasis::KernelBasis(int count, int side, std::vector<double> kernels, CheckOptions options)
    : count_(count), side_(side), data_(std::move(kernels)) {
    if (options.renormalize && count > 0 && side > 0 && data_.size() == kernel_size() * count) {
        for (int b = 0; b < count; ++b) {
            double sum = 0.0;
            for (std::size_t j = 0; j < kernel_size(); ++j) sum += data_[b * kernel_size() + j];
            if (sum > 0.0 && std::isfinite(sum)) {
                for (std::size_t j = 0; j < kernel_size(); ++j) data_[b * kernel_size() + j] /= sum;
            }
        }
    }
    if (auto report = check_kernels(count_, side_, data_, options.tolerance); !report) {
        throw InvariantError(std::move(report));
    }
}

KernelBasis KernelBasis::delta(int side) {
    std::vector<double> k(static_cast<std::size_t>(side) * side, 0.0);
    if (!k.empty()) k[k.size() / 2] = 1.0;
    return KernelBasis(1, side, std::move(k));
}

MixingField::MixingField(int count, int width, int height, std::vector<double> maps, CheckOptions options)
    : count_(count), width_(width), height_(height), data_(std::move(maps)) {
    if (options.renormalize && count > 0 && width > 0 && height > 0 && data_.size() == plane_size() * count) {
        for (std::size_t i = 0; i < plane_size(); ++i) {
            double sum = 0.0;
            for (int b = 0; b < count; ++b) sum += data_[b * plane_size() + i];
            if (sum > 0.0 && std::isfinite(sum)) {
                for (int b = 0; b < count; ++b) data_[b * plane_size() + i] /= sum;
            }
        }
    }
    if (auto report = check_mixing(count_, width_, height_, data_, options.tolerance); !report) {
        throw InvariantError(std::move(report));
    }
}

MixingField MixingField::constant(int width, int height) {
    return MixingField(1, width, height, std::vector<double>(static_cast<std::size_t>(width) * height, 1.0));
}

BlurField::BlurField(KernelBasis basis, MixingField mixing) : basis_(std::move(basis)), mixing_(std::move(mixing)) {
    if (basis_.count() != mixing_.count()) {
        throw InvariantError(ValidationReport::fail("basis count does not match mixing count"));
    }
}

BlurField BlurField::from_raw(RawBlurField raw, CheckOptions options) {
    KernelBasis basis(raw.count, raw.side, std::move(raw.kernels), options);
    MixingField mixing(raw.count, raw.width, raw.height, std::move(raw.mixing), options);
    return BlurField(std::move(basis), std::move(mixing));
}

BlurField BlurField::identity(int width, int height) {
    return BlurField(KernelBasis::delta(1), MixingField::constant(width, height));
}

BlurField BlurField::uniform(int width, int height, int side, std::vector<double> kernel) {
    return BlurField(KernelBasis(1, side, std::move(kernel)), MixingField::constant(width, height));
}

std::uint64_t BlurField::storage_scalars() const {
    const std::uint64_t k2 = std::uint64_t(side()) * side();
    return std::uint64_t(count()) * (k2 + std::uint64_t(width()) * height());
}

std::uint64_t BlurField::dense_storage_scalars() const {
    return std::uint64_t(side()) * side() * width() * height();
}

RawBlurField BlurField::to_raw() const {
    return RawBlurField{count(),
                        side(),
                        width(),
                        height(),
                        {basis_.data().begin(), basis_.data().end()},
                        {mixing_.data().begin(), mixing_.data().end()}};
}

ValidationReport validate(const RawBlurField& field, double tolerance) {
    if (auto r = check_kernels(field.count, field.side, field.kernels, tolerance); !r) return r;
    return check_mixing(field.count, field.width, field.height, field.mixing, tolerance);
}

ValidationReport validate(const BlurField& field, double tolerance) {
    if (auto r = check_kernels(field.count(), field.side(), field.basis().data(), tolerance); !r) return r;
    if (field.basis().count() != field.mixing().count()) {
        return ValidationReport::fail("basis count does not match mixing count");
    }
    return check_mixing(field.count(), field.width(), field.height(), field.mixing().data(), tolerance);
}

SegmentLabels::SegmentLabels(int width, int height, std::vector<std::uint32_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
    if (width < 1 || height < 1) throw std::invalid_argument("label map dimensions must be positive");
    if (labels_.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("label map length does not match its dimensions");
    }
}

void ResponseParams::validate() const {
    if (!(a > 0.0)) throw std::invalid_argument("response: a must be > 0");
    if (!(gamma >= 1.0)) throw std::invalid_argument("response: gamma must be >= 1");
    if (!(sat_threshold > 0.0 && sat_threshold <= 1.0)) {
        throw std::invalid_argument("response: saturation threshold must lie in (0,1]");
    }
}

void RLConfig::validate() const {
    if (max_iters < 1) throw std::invalid_argument("rl: max_iters must be >= 1");
    if (!(lambda_tv >= 0.0)) throw std::invalid_argument("rl: lambda_tv must be >= 0");
    if (!(tv_epsilon > 0.0)) throw std::invalid_argument("rl: tv_epsilon must be > 0");
    if (!(sat_mask_sigma > 0.0)) throw std::invalid_argument("rl: sat_mask_sigma must be > 0");
    if (!(denom_floor > 0.0)) throw std::invalid_argument("rl: denom_floor must be > 0");
    if (z_dilation < 0) throw std::invalid_argument("rl: z_dilation must be >= 0");
}

}  // namespace nublur
