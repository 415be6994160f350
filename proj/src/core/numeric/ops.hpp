#pragma once

#include <cstddef>

#include "numeric/tensor.hpp"

// Differentiable primitives. Every op records its backward rule only when at
// least one input requires a gradient, so inference builds no graph.
namespace ponlab::nn {

enum class PadMode { kZero, kReplicate };

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);

// exp(clamp(x, lo, hi)); gradient is zero where the clamp is active.
Tensor exp_clamped(const Tensor& x, double lo = -10.0, double hi = 10.0);
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope = 0.01);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);

/// 1-D convolution (cross-correlation, stride 1).
/// x: [C_in, N] or [B, C_in, N]; weight: [C_out, C_in, K]; bias: [C_out] or undefined.
/// Output length is N + 2*pad - K + 1.
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t pad,
              PadMode mode);

/// Affine map over the last axis. x: [in] or [B, in]; weight: [out, in]; bias: [out] or undefined.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Centered moving average over the last axis with replicate padding.
/// Kernel must be odd and no longer than the axis.
Tensor avg_pool_smooth(const Tensor& x, std::size_t kernel);

/// Elements start, start+step, ... along the last axis.
Tensor take_strided(const Tensor& x, std::size_t start, std::size_t step);

/// Inverse of the even/odd split: out[2i] = even[i], out[2i+1] = odd[i] (last axis).
Tensor interleave(const Tensor& even, const Tensor& odd);

Tensor sum(const Tensor& x);
Tensor mse_loss(const Tensor& pred, const Tensor& target);

}  // namespace ponlab::nn
