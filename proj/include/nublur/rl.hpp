#pragma once

// Richardson-Lucy deconvolution under a low-rank spatially varying blur.
//
// Three update flavours share one state type:
//   basic      u <- u * H^T(v / Hu)
//   saturated  the latent image is split into a bright part S and the rest U
//              (smoothed threshold mask); each part gets its own multiplier
//              built from the smooth response R and its derivative R', and
//              U additionally ignores clipped observations through z.
//   TV         the unregularized result is divided by 1 + lambda * dTV(u_prev).

#include <limits>
#include <vector>

#include "nublur/blur_operator.hpp"
#include "nublur/image.hpp"
#include "nublur/types.hpp"

namespace nublur {

struct RLState {
    Image estimate;
    int iteration = 0;
    double last_reblur_loss = std::numeric_limits<double>::infinity();
    Image sat_mask;  // smoothed indicator of the bright region, same shape as estimate
    Image z_mask;    // 0 where the observation lost information, 1 elsewhere
    Image blurred;   // H * estimate when known; empty otherwise
};

/// Starts from `init` (usually the observation) with z computed from `observed`.
RLState make_state(Image init, const Image& observed, const ResponseParams& params, int z_dilation = 0);

/// Floor applied to H u and R(H u) in every division.
inline constexpr double kRatioFloor = 1e-12;

RLState rl_step_basic(const RLState& state, const BlurOperator& op, const Image& v);

/// Threshold at params.sat_threshold, Gaussian smoothing of width sigma
/// (truncated at 3 sigma, periodic), clamped to [0, 1]. Same shape as input.
Image split_saturated(const Image& estimate, const ResponseParams& params, double sigma);

/// z = 0 where v >= sat_threshold, 1 elsewhere; optionally grown by
/// `dilation` pixels (Chebyshev distance) within each channel.
Image compute_z_mask(const Image& v, const ResponseParams& params, int dilation = 0);

/// Response used inside the saturated update. `identity` sets R(x) = x and
/// R'(x) = 1, which turns both multipliers into the basic RL ratio.
enum class ResponseKind { smooth, identity };

struct SaturatedParts {
    Image unsaturated;  // u_U^{t+1}
    Image saturated;    // u_S^{t+1}
    Image sat_mask;     // mask used for the split
    Image blurred;      // H u^t
};

SaturatedParts rl_saturated_parts(const Image& estimate, const BlurOperator& op, const Image& v, const Image& z,
                                  const ResponseParams& params, double sigma,
                                  ResponseKind response = ResponseKind::smooth, const Image* blurred = nullptr);

/// Recomputes the split from the current estimate and returns u_S + u_U.
RLState rl_step_saturated(const RLState& state, const BlurOperator& op, const Image& v,
                          const ResponseParams& params, double sigma,
                          ResponseKind response = ResponseKind::smooth);

/// Gradient of the Huber-smoothed total variation sum phi_eps(|grad u|),
/// i.e. -div(grad u / max(|grad u|, eps)) with forward differences and
/// Neumann boundaries. Per channel.
Image tv_gradient(const Image& u, double epsilon);

/// u_unreg / max(1 + lambda * tv_gradient(u_prev), denom_floor).
Image rl_regularized_combine(const Image& u_unreg, const Image& u_prev, double lambda_tv, double epsilon,
                             double denom_floor);

/// sum(v_hat - v log v_hat), with v_hat floored at 1e-12 inside the log.
double poisson_nll(const Image& v, const Image& v_hat);

enum class StopReason { max_iters, no_improvement };

struct DeblurResult {
    Image image;
    /// Reblur loss of each accepted iterate; entry 0 is the initial guess.
    std::vector<double> losses;
    int iterations = 0;
    StopReason stop = StopReason::max_iters;
};

/// Full pipeline: optional gamma decode, edge padding by ceil(K/2), RL
/// iterations until the reblur loss stops decreasing or max_iters, crop,
/// optional re-encode, clamp at zero. The observation should lie in [0, 1].
DeblurResult deblur(const Image& v, const BlurField& field, const RLConfig& config, const ResponseParams& params);

}  // namespace nublur
