#pragma once

#include <vector>

#include "uncseg/label_mask.hpp"
#include "uncseg/tensor.hpp"

namespace uncseg {

// 2D convolution, zero padding. input [N,Cin,H,W], kernel [Cout,Cin,kh,kw],
// bias [Cout] (pass an undefined Tensor to disable). kh/kw must be odd.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int stride = 1, int pad = 0);

// 2x2 max pooling, stride 2. Spatial dims must be even.
Tensor maxpool2(const Tensor& input);

// Nearest-neighbour 2x upsampling.
Tensor nearest_upsample2(const Tensor& input);

Tensor relu(const Tensor& input);

// Channelwise softmax over axis 1 of [N,C,H,W], max-subtracted.
Tensor softmax_channels(const Tensor& logits);

// Mean per-pixel cross entropy of probabilities against integer labels.
// log is clamped at p >= 1e-12.
Tensor cross_entropy(const Tensor& probs, const std::vector<LabelMask>& labels);

Tensor add(const Tensor& a, const Tensor& b);          // elementwise
Tensor mul(const Tensor& a, const Tensor& b);          // elementwise
Tensor scale(const Tensor& a, float s);
Tensor sum(const Tensor& a);                           // scalar
Tensor concat_channels(const Tensor& a, const Tensor& b);

constexpr double kLogProbFloor = 1e-12;

}  // namespace uncseg
