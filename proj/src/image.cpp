#include "nublur/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nublur {

namespace {

void check_dims(int width, int height, int channels) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("image dimensions must be positive, got " + std::to_string(width) + "x" +
                                    std::to_string(height));
    }
    if (channels != 1 && channels != 3) {
        throw std::invalid_argument("image must have 1 or 3 channels, got " + std::to_string(channels));
    }
}

}  // namespace

Image::Image(int width, int height, int channels) : width_(width), height_(height), channels_(channels) {
    check_dims(width, height, channels);
    data_.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
}

Image::Image(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    check_dims(width, height, channels);
    const std::size_t expected = static_cast<std::size_t>(width) * height * channels;
    if (data_.size() != expected) {
        throw std::invalid_argument("image data length " + std::to_string(data_.size()) + " != " +
                                    std::to_string(expected));
    }
    if (!all_finite()) {
        throw std::invalid_argument("image contains non-finite samples");
    }
}

Image Image::filled(int width, int height, int channels, double value) {
    Image img(width, height, channels);
    std::fill(img.data_.begin(), img.data_.end(), value);
    return img;
}

bool Image::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch (" + std::to_string(a.width()) + "x" +
                                    std::to_string(a.height()) + "x" + std::to_string(a.channels()) + " vs " +
                                    std::to_string(b.width()) + "x" + std::to_string(b.height()) + "x" +
                                    std::to_string(b.channels()) + ")");
    }
}

}  // namespace nublur
