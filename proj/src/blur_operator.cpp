#include "nublur/blur_operator.hpp"

#include <algorithm>
#include <cmath>
#include <new>
#include <stdexcept>
#include <string>

#include "nublur/simd/kernels.hpp"

namespace nublur {

namespace {

constexpr std::uint64_t kMaxDenseScalars = std::uint64_t(1) << 28;

double* raw(conv::Spectrum& s) { return reinterpret_cast<double*>(s.data()); }
const double* raw(const conv::Spectrum& s) { return reinterpret_cast<const double*>(s.data()); }

}  // namespace

DenseKernelField::DenseKernelField(int width, int height, int side, std::vector<double> kernels, double tolerance)
    : width_(width), height_(height), side_(side), data_(std::move(kernels)) {
    if (width < 1 || height < 1) throw std::invalid_argument("dense field dimensions must be positive");
    if (side < 1 || side % 2 == 0) throw std::invalid_argument("dense field kernel side must be odd");
    if (data_.size() != kernel_size() * width * height) {
        throw std::invalid_argument("dense field data length mismatch");
    }
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            double sum = 0.0;
            for (double v : kernel(r, c)) {
                if (v < 0.0) throw InvariantError(ValidationReport::fail("negative kernel entry", -1, r, c));
                sum += v;
            }
            if (std::abs(sum - 1.0) > tolerance) {
                throw InvariantError(ValidationReport::fail("kernel not unit mass", -1, r, c));
            }
        }
    }
}

BlurOperator::BlurOperator(BlurField field)
    : field_(std::move(field)), plan_(conv::FftPlan::get(field_.width(), field_.height())) {
    spectra_.reserve(field_.count());
    for (int b = 0; b < field_.count(); ++b) {
        spectra_.push_back(conv::kernel_spectrum({field_.basis().kernel(b), field_.side()}, width(), height()));
    }
}

void BlurOperator::check(const Image& img, const char* what) const {
    if (img.width() != width() || img.height() != height()) {
        throw std::invalid_argument(std::string(what) + ": image " + std::to_string(img.width()) + "x" +
                                    std::to_string(img.height()) + " does not match field " +
                                    std::to_string(width()) + "x" + std::to_string(height()));
    }
}

Image BlurOperator::apply(const Image& u) const {
    check(u, "apply");
    const auto& simd = simd::active();
    const std::size_t n = plan_->real_size();
    Image out(u.width(), u.height(), u.channels());
    conv::Spectrum x, y(plan_->spectrum_size());
    std::vector<double> blurred(n);
    for (int c = 0; c < u.channels(); ++c) {
        plan_->forward(u.plane(c), x);
        auto acc = out.plane(c);
        // Fixed ascending basis order keeps the reduction deterministic.
        for (int b = 0; b < field_.count(); ++b) {
            simd.cmul(raw(x), raw(spectra_[b]), raw(y), x.size());
            plan_->inverse(y, blurred);
            simd.mul_acc(field_.mixing().map(b).data(), blurred.data(), acc.data(), n);
        }
    }
    return out;
}

Image BlurOperator::apply_adjoint(const Image& x) const {
    check(x, "apply_adjoint");
    const auto& simd = simd::active();
    const std::size_t n = plan_->real_size();
    Image out(x.width(), x.height(), x.channels());
    std::vector<double> weighted(n);
    conv::Spectrum t, acc;
    for (int c = 0; c < x.channels(); ++c) {
        acc.assign(plan_->spectrum_size(), {0.0, 0.0});
        for (int b = 0; b < field_.count(); ++b) {
            simd.mul(field_.mixing().map(b).data(), x.plane(c).data(), weighted.data(), n);
            plan_->forward(weighted, t);
            simd.cmul_conj_acc(raw(t), raw(spectra_[b]), raw(acc), t.size());
        }
        plan_->inverse(acc, out.plane(c));
    }
    return out;
}

Image apply(const BlurField& field, const Image& u) { return BlurOperator(field).apply(u); }

Image apply_adjoint(const BlurField& field, const Image& x) { return BlurOperator(field).apply_adjoint(x); }

std::vector<double> assemble_kernel_at(const BlurField& field, int row, int col) {
    if (row < 0 || row >= field.height() || col < 0 || col >= field.width()) {
        throw std::out_of_range("pixel (" + std::to_string(row) + "," + std::to_string(col) + ") outside " +
                                std::to_string(field.width()) + "x" + std::to_string(field.height()) + " field");
    }
    const std::size_t ks = field.basis().kernel_size();
    std::vector<double> k(ks, 0.0);
    for (int b = 0; b < field.count(); ++b) {
        const double m = field.mixing().at(b, row, col);
        const auto kb = field.basis().kernel(b);
        for (std::size_t j = 0; j < ks; ++j) k[j] += m * kb[j];
    }
    return k;
}

DenseKernelField densify(const BlurField& field) {
    if (field.dense_storage_scalars() > kMaxDenseScalars) {
        throw std::length_error("dense kernel field would hold " + std::to_string(field.dense_storage_scalars()) +
                                " scalars");
    }
    std::vector<double> data;
    try {
        data.reserve(field.dense_storage_scalars());
    } catch (const std::bad_alloc&) {
        throw std::length_error("cannot allocate dense kernel field");
    }
    for (int r = 0; r < field.height(); ++r) {
        for (int c = 0; c < field.width(); ++c) {
            const auto k = assemble_kernel_at(field, r, c);
            data.insert(data.end(), k.begin(), k.end());
        }
    }
    return DenseKernelField(field.width(), field.height(), field.side(), std::move(data));
}

Image dense_apply(const DenseKernelField& dense, const Image& u) {
    if (u.width() != dense.width() || u.height() != dense.height()) {
        throw std::invalid_argument("dense_apply: image does not match dense field");
    }
    const int w = u.width(), h = u.height(), side = dense.side(), radius = side / 2;
    Image out(w, h, u.channels());
    for (int ch = 0; ch < u.channels(); ++ch) {
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                const auto k = dense.kernel(r, c);
                double sum = 0.0;
                for (int kr = 0; kr < side; ++kr) {
                    const int sr = ((r - (kr - radius)) % h + h) % h;
                    for (int kc = 0; kc < side; ++kc) {
                        const int sc = ((c - (kc - radius)) % w + w) % w;
                        sum += k[kr * side + kc] * u.at(ch, sr, sc);
                    }
                }
                out.at(ch, r, c) = sum;
            }
        }
    }
    return out;
}

BlurField pad_field(const BlurField& field, int margin) {
    if (margin == 0) return field;
    const auto& mix = field.mixing();
    const int pw = field.width() + 2 * margin, ph = field.height() + 2 * margin;
    std::vector<double> maps;
    maps.reserve(static_cast<std::size_t>(pw) * ph * field.count());
    for (int b = 0; b < field.count(); ++b) {
        const auto p = conv::pad_edge_plane(mix.map(b), field.width(), field.height(), margin);
        maps.insert(maps.end(), p.begin(), p.end());
    }
    // Replicated values keep whatever per-pixel sums the source field passed with.
    return BlurField(field.basis(), MixingField(field.count(), pw, ph, std::move(maps), {1e-4, false}));
}

BlurField crop_field(const BlurField& field, int margin) {
    if (margin == 0) return field;
    const int cw = field.width() - 2 * margin, ch = field.height() - 2 * margin;
    if (margin < 0 || cw <= 0 || ch <= 0) throw std::invalid_argument("crop_field: margin too large");
    const auto& mix = field.mixing();
    std::vector<double> maps;
    maps.reserve(static_cast<std::size_t>(cw) * ch * field.count());
    for (int b = 0; b < field.count(); ++b) {
        for (int r = 0; r < ch; ++r) {
            for (int c = 0; c < cw; ++c) maps.push_back(mix.at(b, r + margin, c + margin));
        }
    }
    return BlurField(field.basis(), MixingField(field.count(), cw, ch, std::move(maps), {1e-4, false}));
}

}  // namespace nublur
