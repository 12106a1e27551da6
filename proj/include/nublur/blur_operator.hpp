#pragma once

#include <memory>
#include <span>
#include <vector>

#include "nublur/conv.hpp"
#include "nublur/image.hpp"
#include "nublur/types.hpp"

namespace nublur {

/// One K x K kernel per pixel, materialized. Costs H*W*K^2 scalars.
class DenseKernelField {
public:
    DenseKernelField(int width, int height, int side, std::vector<double> kernels, double tolerance = 1e-6);

    int width() const { return width_; }
    int height() const { return height_; }
    int side() const { return side_; }
    std::size_t kernel_size() const { return static_cast<std::size_t>(side_) * side_; }
    std::span<const double> kernel(int row, int col) const {
        return std::span<const double>(data_).subspan((static_cast<std::size_t>(row) * width_ + col) * kernel_size(),
                                                      kernel_size());
    }

private:
    int width_;
    int height_;
    int side_;
    std::vector<double> data_;
};

/// H x = sum_b M_b K_b x and its adjoint H^T x = sum_b K_b^T M_b x, with
/// circular boundaries. Basis spectra are computed once at construction.
class BlurOperator {
public:
    explicit BlurOperator(BlurField field);

    const BlurField& field() const { return field_; }
    int width() const { return field_.width(); }
    int height() const { return field_.height(); }

    /// Applied per channel with the same field.
    Image apply(const Image& u) const;
    Image apply_adjoint(const Image& x) const;

private:
    void check(const Image& img, const char* what) const;

    BlurField field_;
    std::shared_ptr<const conv::FftPlan> plan_;
    std::vector<conv::Spectrum> spectra_;
};

Image apply(const BlurField& field, const Image& u);
Image apply_adjoint(const BlurField& field, const Image& x);

/// k_i = sum_b m^b_i k^b at (row, col).
std::vector<double> assemble_kernel_at(const BlurField& field, int row, int col);

/// Throws std::length_error when the dense field would be unreasonably large.
DenseKernelField densify(const BlurField& field);

/// Direct O(H W K^2) evaluation with periodic indexing; the reference for apply().
Image dense_apply(const DenseKernelField& dense, const Image& u);

/// Field for an image padded by `margin`: mixing maps are edge-replicated.
BlurField pad_field(const BlurField& field, int margin);
/// Mixing maps restricted to the interior after removing `margin` per side.
BlurField crop_field(const BlurField& field, int margin);

}  // namespace nublur
