#include "nublur/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace nublur::metrics {

namespace {

void check_weights(std::span<const double> weights, int width, int height) {
    if (weights.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("weight map has " + std::to_string(weights.size()) + " entries, expected " +
                                    std::to_string(static_cast<std::size_t>(width) * height));
    }
}

}  // namespace

std::vector<double> segment_weights(const SegmentLabels& labels) {
    std::unordered_map<std::uint32_t, std::size_t> counts;
    for (auto l : labels.data()) ++counts[l];
    std::vector<double> w;
    w.reserve(labels.data().size());
    for (auto l : labels.data()) w.push_back(1.0 / static_cast<double>(counts[l]));
    return w;
}

std::vector<double> uniform_weights(int width, int height) {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

double reblur_loss(const Image& v, const Image& v_gt, std::span<const double> weights) {
    require_same_shape(v, v_gt, "reblur_loss");
    check_weights(weights, v.width(), v.height());
    double total = 0.0;
    for (int c = 0; c < v.channels(); ++c) {
        const auto a = v.plane(c);
        const auto b = v_gt.plane(c);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            total += weights[i] * d * d;
        }
    }
    return total;
}

double kernel_loss(const BlurField& field, const DenseKernelField& gt, std::span<const double> weights, int p) {
    if (p != 1 && p != 2) throw std::invalid_argument("kernel_loss: p must be 1 or 2");
    if (field.side() != gt.side()) {
        throw std::invalid_argument("kernel_loss: kernel side " + std::to_string(field.side()) +
                                    " does not match ground truth side " + std::to_string(gt.side()));
    }
    if (field.width() != gt.width() || field.height() != gt.height()) {
        throw std::invalid_argument("kernel_loss: field and ground truth sizes differ");
    }
    check_weights(weights, field.width(), field.height());
    const std::size_t ks = static_cast<std::size_t>(field.side()) * field.side();
    std::vector<double> k(ks);
    double total = 0.0;
    for (int r = 0; r < field.height(); ++r) {
        for (int c = 0; c < field.width(); ++c) {
            std::fill(k.begin(), k.end(), 0.0);
            for (int b = 0; b < field.count(); ++b) {
                const double m = field.mixing().at(b, r, c);
                if (m == 0.0) continue;
                const auto kb = field.basis().kernel(b);
                for (std::size_t j = 0; j < ks; ++j) k[j] += m * kb[j];
            }
            const auto g = gt.kernel(r, c);
            double norm = 0.0;
            for (std::size_t j = 0; j < ks; ++j) {
                const double d = k[j] - g[j];
                norm += p == 1 ? std::abs(d) : d * d;
            }
            if (p == 2) norm = std::sqrt(norm);
            total += weights[static_cast<std::size_t>(r) * field.width() + c] * norm;
        }
    }
    return total;
}

double psnr(const Image& a, const Image& b, double peak) {
    require_same_shape(a, b, "psnr");
    double sse = 0.0;
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        sse += d * d;
    }
    const double mse = sse / static_cast<double>(x.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace nublur::metrics
