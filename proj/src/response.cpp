#include "nublur/response.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nublur {

namespace {

// log(1 + e^t), branching at t = 0 so exp never overflows.
template <typename F>
Image map_image(const Image& in, F f) {
    Image out(in.width(), in.height(), in.channels());
    auto src = in.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
    return out;
}

}  // namespace

double saturate(double v, const ResponseParams& params) {
    const double t = params.a * (v - 1.0);
    // Above the knee v - t/a is exactly 1; dropping it avoids cancellation.
    if (t > 0.0) return 1.0 - std::log1p(std::exp(-t)) / params.a;
    return v - std::log1p(std::exp(t)) / params.a;
}

double saturate_deriv(double v, const ResponseParams& params) {
    const double t = params.a * (v - 1.0);
    if (t > 0.0) {
        const double e = std::exp(-t);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(t));
}

Image saturate(const Image& v, const ResponseParams& params) {
    return map_image(v, [&](double x) { return saturate(x, params); });
}

Image saturate_deriv(const Image& v, const ResponseParams& params) {
    return map_image(v, [&](double x) { return saturate_deriv(x, params); });
}

double gamma_encode(double x, double gamma) { return x <= 0.0 ? 0.0 : std::pow(x, 1.0 / gamma); }

double gamma_decode(double x, double gamma) { return x <= 0.0 ? 0.0 : std::pow(x, gamma); }

Image gamma_encode(const Image& u, double gamma) {
    if (gamma == 1.0) return map_image(u, [](double x) { return std::max(x, 0.0); });
    return map_image(u, [gamma](double x) { return gamma_encode(x, gamma); });
}

Image gamma_decode(const Image& v, double gamma) {
    if (gamma == 1.0) return map_image(v, [](double x) { return std::max(x, 0.0); });
    return map_image(v, [gamma](double x) { return gamma_decode(x, gamma); });
}

Image forward_capture(const BlurField& field, const Image& u, double noise_sigma, const ResponseParams& params,
                      CaptureMode mode, std::mt19937_64& rng) {
    params.validate();
    if (noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
    Image v = apply(field, u);
    if (noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, noise_sigma);
        for (double& x : v.data()) x += noise(rng);
    }
    v = gamma_encode(v, params.gamma);
    if (mode == CaptureMode::smooth) return saturate(v, params);
    for (double& x : v.data()) x = std::clamp(x, 0.0, 1.0);
    return v;
}

}  // namespace nublur
