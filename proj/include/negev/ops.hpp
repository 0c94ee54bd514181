#pragma once

#include <functional>

#include "negev/tensor.hpp"

namespace negev {

/// 2-D cross-correlation over a [C_in,H,W] input with a [C_out,C_in,kH,kW]
/// kernel and per-output-channel bias. Output is [C_out,H',W'] with
/// H' = floor((H + 2*pad - kH)/stride) + 1. Gradients are defined w.r.t.
/// input, kernel and bias.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int stride = 1, int pad = 0);

/// Elementwise max(0, x). The subgradient at exactly 0 is 0.
Tensor relu(const Tensor& input);

/// Non-overlapping 2x2 max pooling over a [C,H,W] input with even H and W.
/// The gradient routes to the argmax element only; ties break to the first
/// element in row-major window order.
Tensor maxpool2(const Tensor& input);

/// Nearest-neighbour 2x upsampling: every pixel becomes a 2x2 block.
Tensor upsample_nearest2(const Tensor& input);

/// Affine map weight[K,D] * input[D] + bias[K].
Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias);

/// Per-channel spatial mean of a [C,H,W] input.
Tensor global_avg_pool(const Tensor& input);

/// Per-pixel softmax across the channel axis of a [2,H,W] input. Output
/// channels sum to 1 at every pixel.
Tensor pixel_softmax(const Tensor& input);

/// Channel-wise concatenation of two [Ca,H,W] / [Cb,H,W] tensors.
Tensor concat_channels(const Tensor& a, const Tensor& b);

/// factor * input, elementwise.
Tensor scale(const Tensor& input, double factor);

/// Elementwise sum of two same-shape tensors.
Tensor add(const Tensor& a, const Tensor& b);

/// -log softmax(scores)[label], numerically stabilised.
Tensor softmax_cross_entropy(const Tensor& scores, int label);

/// Central-difference gradient of an arbitrary scalar function at `point`:
/// (f(x+e) - f(x-e)) / (2*eps) per coordinate. The evaluations must be
/// finite or a NumericError is thrown. Test oracle; builds no graph.
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& loss_fn,
                        const Tensor& point, double eps = 1e-5);

}  // namespace negev
