#include "nublur/rl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nublur/conv.hpp"
#include "nublur/response.hpp"
#include "nublur/simd/kernels.hpp"

namespace nublur {

namespace {

std::vector<double> gaussian_taps(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        taps[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += taps[i + radius];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

// Separable periodic filtering of one plane.
void blur_plane_periodic(std::span<double> plane, int width, int height, const std::vector<double>& taps) {
    const int radius = static_cast<int>(taps.size()) / 2;
    std::vector<double> tmp(plane.size());
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int cc = ((c + k) % width + width) % width;
                s += taps[k + radius] * plane[static_cast<std::size_t>(r) * width + cc];
            }
            tmp[static_cast<std::size_t>(r) * width + c] = s;
        }
    }
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int rr = ((r + k) % height + height) % height;
                s += taps[k + radius] * tmp[static_cast<std::size_t>(rr) * width + c];
            }
            plane[static_cast<std::size_t>(r) * width + c] = s;
        }
    }
}

Image elementwise_product(const Image& a, const Image& b) {
    Image out(a.width(), a.height(), a.channels());
    simd::active().mul(a.data().data(), b.data().data(), out.data().data(), a.size());
    return out;
}

Image one_minus(const Image& m) {
    Image out(m.width(), m.height(), m.channels());
    auto src = m.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = 1.0 - src[i];
    return out;
}

double reblur_residual(const Image& blurred, const Image& v, const ResponseParams& params, bool saturation) {
    const auto& simd = simd::active();
    if (!saturation) return simd.sum_sq_diff(blurred.data().data(), v.data().data(), v.size());
    const Image r = saturate(blurred, params);
    return simd.sum_sq_diff(r.data().data(), v.data().data(), v.size());
}

// A step counts as an improvement only if it beats the previous loss by more
// than relative 1e-9, with an absolute floor far above squared roundoff.
bool improved(double loss, double prev, std::size_t n) {
    return loss < prev - (1e-9 * prev + 1e-20 * static_cast<double>(n));
}

}  // namespace

RLState make_state(Image init, const Image& observed, const ResponseParams& params, int z_dilation) {
    require_same_shape(init, observed, "make_state");
    RLState st;
    st.z_mask = compute_z_mask(observed, params, z_dilation);
    st.sat_mask = Image(init.width(), init.height(), init.channels());
    st.estimate = std::move(init);
    return st;
}

RLState rl_step_basic(const RLState& state, const BlurOperator& op, const Image& v) {
    require_same_shape(state.estimate, v, "rl_step_basic");
    const auto& simd = simd::active();
    const Image hu = state.blurred.empty() ? op.apply(state.estimate) : state.blurred;
    Image ratio(v.width(), v.height(), v.channels());
    simd.div_floor(v.data().data(), hu.data().data(), kRatioFloor, ratio.data().data(), v.size());
    const Image back = op.apply_adjoint(ratio);
    RLState next;
    next.estimate = elementwise_product(state.estimate, back);
    next.iteration = state.iteration + 1;
    next.last_reblur_loss = state.last_reblur_loss;
    next.sat_mask = state.sat_mask;
    next.z_mask = state.z_mask;
    return next;
}

Image split_saturated(const Image& estimate, const ResponseParams& params, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("saturation mask sigma must be > 0");
    Image mask(estimate.width(), estimate.height(), estimate.channels());
    auto src = estimate.data();
    auto dst = mask.data();
    bool any = false;
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = src[i] >= params.sat_threshold ? 1.0 : 0.0;
        any = any || dst[i] != 0.0;
    }
    if (!any) return mask;
    const auto taps = gaussian_taps(sigma);
    for (int c = 0; c < mask.channels(); ++c) blur_plane_periodic(mask.plane(c), mask.width(), mask.height(), taps);
    for (double& m : mask.data()) m = std::clamp(m, 0.0, 1.0);
    return mask;
}

Image compute_z_mask(const Image& v, const ResponseParams& params, int dilation) {
    if (dilation < 0) throw std::invalid_argument("z dilation must be >= 0");
    Image z(v.width(), v.height(), v.channels());
    for (int ch = 0; ch < v.channels(); ++ch) {
        for (int r = 0; r < v.height(); ++r) {
            for (int c = 0; c < v.width(); ++c) {
                z.at(ch, r, c) = v.at(ch, r, c) >= params.sat_threshold ? 0.0 : 1.0;
            }
        }
    }
    if (dilation == 0) return z;
    Image grown = z;
    for (int ch = 0; ch < v.channels(); ++ch) {
        for (int r = 0; r < v.height(); ++r) {
            for (int c = 0; c < v.width(); ++c) {
                if (z.at(ch, r, c) != 0.0) continue;
                for (int dr = -dilation; dr <= dilation; ++dr) {
                    const int rr = r + dr;
                    if (rr < 0 || rr >= v.height()) continue;
                    for (int dc = -dilation; dc <= dilation; ++dc) {
                        const int cc = c + dc;
                        if (cc >= 0 && cc < v.width()) grown.at(ch, rr, cc) = 0.0;
                    }
                }
            }
        }
    }
    return grown;
}

SaturatedParts rl_saturated_parts(const Image& estimate, const BlurOperator& op, const Image& v, const Image& z,
                                  const ResponseParams& params, double sigma, ResponseKind response,
                                  const Image* blurred) {
    require_same_shape(estimate, v, "rl_step_saturated");
    require_same_shape(z, v, "rl_step_saturated (z mask)");
    const auto& simd = simd::active();
    const std::size_t n = v.size();

    SaturatedParts parts;
    parts.sat_mask = split_saturated(estimate, params, sigma);
    parts.blurred = (blurred && !blurred->empty()) ? *blurred : op.apply(estimate);

    Image r, rp;
    if (response == ResponseKind::smooth) {
        r = saturate(parts.blurred, params);
        rp = saturate_deriv(parts.blurred, params);
    } else {
        r = parts.blurred;
        rp = Image::filled(v.width(), v.height(), v.channels(), 1.0);
    }

    Image mult_u(v.width(), v.height(), v.channels());
    Image mult_s(v.width(), v.height(), v.channels());
    simd.sat_ratio(v.data().data(), rp.data().data(), r.data().data(), z.data().data(), kRatioFloor,
                   mult_u.data().data(), n);
    simd.sat_ratio(v.data().data(), rp.data().data(), r.data().data(), nullptr, kRatioFloor, mult_s.data().data(), n);

    const Image back_u = op.apply_adjoint(mult_u);
    const Image back_s = op.apply_adjoint(mult_s);

    const Image est_s = elementwise_product(parts.sat_mask, estimate);
    const Image est_u = elementwise_product(one_minus(parts.sat_mask), estimate);
    parts.unsaturated = elementwise_product(est_u, back_u);
    parts.saturated = elementwise_product(est_s, back_s);
    return parts;
}

RLState rl_step_saturated(const RLState& state, const BlurOperator& op, const Image& v,
                          const ResponseParams& params, double sigma, ResponseKind response) {
    SaturatedParts parts = rl_saturated_parts(state.estimate, op, v, state.z_mask, params, sigma, response,
                                              &state.blurred);
    RLState next;
    next.estimate = std::move(parts.unsaturated);
    auto acc = next.estimate.data();
    auto sat = parts.saturated.data();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += sat[i];
    next.iteration = state.iteration + 1;
    next.last_reblur_loss = state.last_reblur_loss;
    next.sat_mask = std::move(parts.sat_mask);
    next.z_mask = state.z_mask;
    return next;
}

Image tv_gradient(const Image& u, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("tv epsilon must be > 0");
    const int w = u.width(), h = u.height();
    Image out(w, h, u.channels());
    std::vector<double> px(u.plane_size()), py(u.plane_size());
    for (int ch = 0; ch < u.channels(); ++ch) {
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                const double gx = c + 1 < w ? u.at(ch, r, c + 1) - u.at(ch, r, c) : 0.0;
                const double gy = r + 1 < h ? u.at(ch, r + 1, c) - u.at(ch, r, c) : 0.0;
                const double mag = std::max(std::sqrt(gx * gx + gy * gy), epsilon);
                px[static_cast<std::size_t>(r) * w + c] = gx / mag;
                py[static_cast<std::size_t>(r) * w + c] = gy / mag;
            }
        }
        // Transpose of the forward difference applied to the normalized field.
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                const std::size_t i = static_cast<std::size_t>(r) * w + c;
                double g = 0.0;
                if (c > 0) g += px[i - 1];
                if (c + 1 < w) g -= px[i];
                if (r > 0) g += py[i - w];
                if (r + 1 < h) g -= py[i];
                out.at(ch, r, c) = g;
            }
        }
    }
    return out;
}

Image rl_regularized_combine(const Image& u_unreg, const Image& u_prev, double lambda_tv, double epsilon,
                             double denom_floor) {
    if (lambda_tv < 0.0) throw std::invalid_argument("lambda_tv must be >= 0");
    if (lambda_tv == 0.0) return u_unreg;
    require_same_shape(u_unreg, u_prev, "rl_regularized_combine");
    const Image g = tv_gradient(u_prev, epsilon);
    Image out(u_unreg.width(), u_unreg.height(), u_unreg.channels());
    simd::active().tv_combine(u_unreg.data().data(), g.data().data(), lambda_tv, denom_floor, out.data().data(),
                              out.size());
    return out;
}

double poisson_nll(const Image& v, const Image& v_hat) {
    require_same_shape(v, v_hat, "poisson_nll");
    auto a = v.data();
    auto b = v_hat.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += b[i] - a[i] * std::log(std::max(b[i], kRatioFloor));
    return sum;
}

DeblurResult deblur(const Image& v, const BlurField& field, const RLConfig& config, const ResponseParams& params) {
    config.validate();
    params.validate();
    if (v.width() != field.width() || v.height() != field.height()) {
        throw std::invalid_argument("deblur: image does not match blur field");
    }

    const Image z = compute_z_mask(v, params, config.z_dilation);
    Image work = config.work_in_linear ? gamma_decode(v, params.gamma) : gamma_decode(v, 1.0);

    const int margin = (field.side() + 1) / 2;
    const Image observed = conv::pad_edge(work, margin);
    const BlurOperator op(pad_field(field, margin));

    RLState state;
    state.estimate = observed;
    state.z_mask = conv::pad_edge(z, margin);
    state.sat_mask = Image(observed.width(), observed.height(), observed.channels());
    state.blurred = op.apply(state.estimate);
    state.last_reblur_loss = reblur_residual(state.blurred, observed, params, config.use_saturation_model);

    DeblurResult result;
    result.losses.push_back(state.last_reblur_loss);
    result.stop = StopReason::max_iters;
    for (int it = 0; it < config.max_iters; ++it) {
        RLState next = config.use_saturation_model
                           ? rl_step_saturated(state, op, observed, params, config.sat_mask_sigma)
                           : rl_step_basic(state, op, observed);
        if (config.lambda_tv > 0.0) {
            next.estimate = rl_regularized_combine(next.estimate, state.estimate, config.lambda_tv,
                                                   config.tv_epsilon, config.denom_floor);
        }
        next.blurred = op.apply(next.estimate);
        const double loss = reblur_residual(next.blurred, observed, params, config.use_saturation_model);
        if (!improved(loss, state.last_reblur_loss, observed.size())) {
            result.stop = StopReason::no_improvement;
            break;
        }
        next.last_reblur_loss = loss;
        state = std::move(next);
        result.losses.push_back(loss);
    }

    result.iterations = state.iteration;
    Image out = conv::crop(state.estimate, margin);
    if (config.work_in_linear) out = gamma_encode(out, params.gamma);
    for (double& x : out.data()) x = std::max(x, 0.0);
    result.image = std::move(out);
    return result;
}

}  // namespace nublur
