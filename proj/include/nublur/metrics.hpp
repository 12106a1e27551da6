#pragma once

#include <span>
#include <vector>

#include "nublur/blur_operator.hpp"
#include "nublur/image.hpp"
#include "nublur/types.hpp"

namespace nublur::metrics {

/// w_i = 1 / (pixels sharing label_i), row-major H*W.
std::vector<double> segment_weights(const SegmentLabels& labels);
/// 1 / (H W) everywhere; the same as one global segment.
std::vector<double> uniform_weights(int width, int height);

/// sum_i w_i (v_i - g_i)^2, summed over channels.
double reblur_loss(const Image& v, const Image& v_gt, std::span<const double> weights);

/// sum_i w_i ||k_i - k_i^gt||_p over flattened kernels; p is 1 or 2.
double kernel_loss(const BlurField& field, const DenseKernelField& gt, std::span<const double> weights, int p);

/// +inf when the images are identical.
double psnr(const Image& a, const Image& b, double peak = 1.0);

}  // namespace nublur::metrics
