#pragma once

// Circular 2D convolution and correlation through the real DFT.
//
// Kernels are K x K with K odd and are anchored at their center: entry (r, c)
// is the weight for offset (r - K/2, c - K/2). Convolution computes
//   out(i) = sum_j k(j) * x(i - j)
// and correlation, its exact adjoint,
//   out(i) = sum_j k(j) * x(i + j),
// both with periodic indexing.

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "nublur/image.hpp"

namespace nublur::conv {

struct PlaneView {
    std::span<const double> data;
    int width;
    int height;
};

struct KernelView {
    std::span<const double> data;
    int side;
};

using Spectrum = std::vector<std::complex<double>>;

/// Real-to-complex plan pair for one grid size. Instances are shared through a
/// process-wide cache; execution is thread-safe.
class FftPlan {
public:
    ~FftPlan();
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    static std::shared_ptr<const FftPlan> get(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t real_size() const { return static_cast<std::size_t>(width_) * height_; }
    /// Half-spectrum length, H * (W/2 + 1).
    std::size_t spectrum_size() const { return static_cast<std::size_t>(height_) * (width_ / 2 + 1); }

    void forward(std::span<const double> in, Spectrum& out) const;
    /// Unnormalized inverse followed by division by H*W. `in` is left untouched.
    void inverse(const Spectrum& in, std::span<double> out) const;

private:
    FftPlan(int width, int height);

    int width_;
    int height_;
    void* forward_plan_ = nullptr;
    void* inverse_plan_ = nullptr;
};

/// Kernel zero-embedded in the H x W grid with its center at (0, 0), transformed.
Spectrum kernel_spectrum(KernelView kernel, int width, int height);

/// Throws std::invalid_argument if the kernel is even-sided or larger than the plane.
void check_fits(KernelView kernel, int width, int height);

std::vector<double> convolve_circular(PlaneView plane, KernelView kernel);
std::vector<double> correlate_circular(PlaneView plane, KernelView kernel);

/// Edge-replicating pad of every channel by `margin` on all four sides.
Image pad_edge(const Image& image, int margin);
/// Removes `margin` pixels from every side; throws if nothing would remain.
Image crop(const Image& image, int margin);

/// Plane-level edge-replicating pad, used for mixing maps.
std::vector<double> pad_edge_plane(std::span<const double> plane, int width, int height, int margin);

}  // namespace nublur::conv
