#pragma once

// Fixtures and independent reference computations shared by the test binaries.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "nublur/image.hpp"
#include "nublur/types.hpp"

namespace testsupport {

using nublur::BlurField;
using nublur::Image;

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

inline Image random_image(std::mt19937_64& rng, int w, int h, int c = 1, double lo = 0.0, double hi = 1.0) {
    return Image(w, h, c, random_values(rng, static_cast<std::size_t>(w) * h * c, lo, hi));
}

/// Non-negative kernel with unit mass and a random sparsity pattern.
inline std::vector<double> random_kernel(std::mt19937_64& rng, int side) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<double> k(static_cast<std::size_t>(side) * side);
    double sum = 0.0;
    for (auto& x : k) {
        x = d(rng) < 0.3 ? 0.0 : d(rng);
        sum += x;
    }
    if (sum == 0.0) {
        k[k.size() / 2] = 1.0;
        sum = 1.0;
    }
    for (auto& x : k) x /= sum;
    return k;
}

/// B random kernels and random positive mixing maps normalized per pixel.
inline BlurField random_field(std::mt19937_64& rng, int w, int h, int count, int side) {
    std::vector<double> kernels;
    for (int b = 0; b < count; ++b) {
        auto k = random_kernel(rng, side);
        kernels.insert(kernels.end(), k.begin(), k.end());
    }
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> maps = random_values(rng, n * count, 0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int b = 0; b < count; ++b) s += maps[b * n + i];
        for (int b = 0; b < count; ++b) maps[b * n + i] /= s;
    }
    return BlurField(nublur::KernelBasis(count, side, std::move(kernels)),
                     nublur::MixingField(count, w, h, std::move(maps)));
}

/// Horizontal box of `length` taps centered in a side x side grid.
inline std::vector<double> line_kernel(int side, int length) {
    std::vector<double> k(static_cast<std::size_t>(side) * side, 0.0);
    const int mid = side / 2;
    for (int j = 0; j < length; ++j) k[static_cast<std::size_t>(mid) * side + (mid - length / 2 + j)] = 1.0 / length;
    return k;
}

/// Piecewise smooth test scene: gradient background, rectangles and a sinusoid
/// texture, in [lo, hi].
inline Image scene_image(int w, int h, int c, std::uint64_t seed, double lo = 0.05, double hi = 0.85) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    Image img(w, h, c);
    for (int ch = 0; ch < c; ++ch) {
        const double gx = d(rng), gy = d(rng);
        for (int r = 0; r < h; ++r)
            for (int col = 0; col < w; ++col) img.at(ch, r, col) = 0.3 * (gx * col / w + gy * r / h);
    }
    for (int rect = 0; rect < 6; ++rect) {
        const int x0 = static_cast<int>(d(rng) * w * 0.8), y0 = static_cast<int>(d(rng) * h * 0.8);
        const int rw = 4 + static_cast<int>(d(rng) * w * 0.3), rh = 4 + static_cast<int>(d(rng) * h * 0.3);
        std::vector<double> color(c);
        for (auto& x : color) x = d(rng);
        for (int r = y0; r < std::min(h, y0 + rh); ++r)
            for (int col = x0; col < std::min(w, x0 + rw); ++col)
                for (int ch = 0; ch < c; ++ch) img.at(ch, r, col) = color[ch];
    }
    const double fx = 0.2 + 0.5 * d(rng), fy = 0.2 + 0.5 * d(rng);
    for (int ch = 0; ch < c; ++ch)
        for (int r = 0; r < h; ++r)
            for (int col = 0; col < w; ++col) {
                double x = img.at(ch, r, col) + 0.1 * std::sin(fx * col) * std::sin(fy * r);
                img.at(ch, r, col) = lo + (hi - lo) * std::clamp(x, 0.0, 1.0);
            }
    return img;
}

/// Direct periodic convolution, out(i) = sum_j k(j) x(i - j), kernel centered.
inline std::vector<double> brute_convolve(std::span<const double> x, int w, int h, std::span<const double> k,
                                          int side) {
    const int rad = side / 2;
    std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double s = 0.0;
            for (int kr = 0; kr < side; ++kr)
                for (int kc = 0; kc < side; ++kc) {
                    const int rr = ((r - (kr - rad)) % h + h) % h;
                    const int cc = ((c - (kc - rad)) % w + w) % w;
                    s += k[kr * side + kc] * x[rr * w + cc];
                }
            out[r * w + c] = s;
        }
    return out;
}

inline double inner(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(inner(a, a)); }

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double mse(const Image& a, const Image& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

inline double psnr_ref(const Image& a, const Image& b) { return 10.0 * std::log10(1.0 / mse(a, b)); }

}  // namespace testsupport
