#pragma once

#include <span>

#include "vige/tensor.hpp"

namespace vige::ops {

// Elementwise; shapes must match exactly (no implicit broadcasting).
TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(Tape& tape, const TensorPtr& x, double factor);

TensorPtr sum(Tape& tape, const TensorPtr& x);                        // -> scalar
TensorPtr dot(Tape& tape, const TensorPtr& a, const TensorPtr& b);    // vectors -> scalar

// [p x q] * [q x r] -> [p x r]; a rank-1 right operand [q] yields [p].
// Backward: grad_a = g * b^T, grad_b = a^T * g.
TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b);

// The single sanctioned broadcast: bias vector over the leading axis of a
// [C x H x W] map, or plain vector+vector addition.
TensorPtr bias_add(Tape& tape, const TensorPtr& x, const TensorPtr& bias);

// max(x, slope*x) with slope in [0,1); gradient follows the forward branch.
TensorPtr leaky_relu(Tape& tape, const TensorPtr& x, double slope);

// Cross-correlation (no kernel flip): x [C_in x H x W], kernels
// [C_out x C_in x k x k], zero padding.
TensorPtr conv2d(Tape& tape, const TensorPtr& x, const TensorPtr& kernels, int stride,
                 int padding);

// Non-overlapping-style spatial max pool over [C x H x W]; gradient routes to
// the first maximizer in row-major window order.
TensorPtr max_pool2d(Tape& tape, const TensorPtr& x, int window, int stride);

// Elementwise max over a set of same-shape frames; gradient goes to the first
// (lowest-index) maximizing frame.
TensorPtr set_max_pool(Tape& tape, std::span<const TensorPtr> frames);

// [C x H x W] -> [C], per-channel spatial mean.
TensorPtr global_avg_pool(Tape& tape, const TensorPtr& x);

// Per-channel (max + mean) over rows [row_begin, row_end) of a [C x H x W]
// map; the pooling unit of the horizontal pyramid.
TensorPtr band_maxmean_pool(Tape& tape, const TensorPtr& x, std::int64_t row_begin,
                            std::int64_t row_end);

TensorPtr concat(Tape& tape, const TensorPtr& a, const TensorPtr& b);           // vectors
TensorPtr concat_channels(Tape& tape, const TensorPtr& a, const TensorPtr& b);  // [C,H,W]

// B same-length vectors -> [B x d] matrix.
TensorPtr stack_rows(Tape& tape, std::span<const TensorPtr> rows);

// Output spatial size of one conv/pool stage; the closed-form shape rule.
std::int64_t conv_out_dim(std::int64_t in, std::int64_t kernel, std::int64_t stride,
                          std::int64_t padding);

}  // namespace vige::ops
