#pragma once

#include <random>

#include "nublur/blur_operator.hpp"
#include "nublur/image.hpp"
#include "nublur/types.hpp"

namespace nublur {

// Smooth sensor saturation R(v) = v - log(1 + exp(a (v - 1))) / a and its
// derivative R'(v) = 1 / (1 + exp(a (v - 1))), evaluated without overflow.

double saturate(double v, const ResponseParams& params);
double saturate_deriv(double v, const ResponseParams& params);
Image saturate(const Image& v, const ResponseParams& params);
Image saturate_deriv(const Image& v, const ResponseParams& params);

/// x^(1/gamma) after clamping negatives to zero.
double gamma_encode(double x, double gamma);
/// x^gamma after clamping negatives to zero.
double gamma_decode(double x, double gamma);
Image gamma_encode(const Image& u, double gamma);
Image gamma_decode(const Image& v, double gamma);

enum class CaptureMode { smooth, hard_clip };

/// Blur, add N(0, noise_sigma^2) in linear space, clamp at zero, gamma-encode,
/// then saturate smoothly or clip to [0, 1].
Image forward_capture(const BlurField& field, const Image& u, double noise_sigma, const ResponseParams& params,
                      CaptureMode mode, std::mt19937_64& rng);

}  // namespace nublur
