#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nublur {

/// Planar floating-point raster. Samples are stored plane by plane, each plane
/// row-major. Nominal range is [0,1] but latent estimates may exceed 1.
class Image {
public:
    Image() = default;

    /// Zero-filled image. Throws std::invalid_argument on non-positive sizes or
    /// a channel count other than 1 or 3.
    Image(int width, int height, int channels);

    /// Takes ownership of `data`; rejects wrong lengths and non-finite samples.
    Image(int width, int height, int channels, std::vector<double> data);

    static Image filled(int width, int height, int channels, double value);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t plane_size() const { return static_cast<std::size_t>(width_) * height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    std::span<double> plane(int c) { return std::span<double>(data_).subspan(c * plane_size(), plane_size()); }
    std::span<const double> plane(int c) const {
        return std::span<const double>(data_).subspan(c * plane_size(), plane_size());
    }

    double& at(int c, int row, int col) { return data_[c * plane_size() + static_cast<std::size_t>(row) * width_ + col]; }
    double at(int c, int row, int col) const {
        return data_[c * plane_size() + static_cast<std::size_t>(row) * width_ + col];
    }

    bool same_shape(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    /// True when every sample is finite.
    bool all_finite() const;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

/// Throws std::invalid_argument naming `what` when shapes differ.
void require_same_shape(const Image& a, const Image& b, const char* what);

}  // namespace nublur
