#pragma once

#include <cstdint>
#include <utility>

#include "dca/tensor.hpp"

namespace dca {

// 2-D convolution parameters. Weight layout [C_out, C_in/groups, k, k];
// bias is optional (leave undefined for conv->GELU->BN blocks).
template <typename T>
struct Conv2dParamsT {
    TensorT<T> weight;
    TensorT<T> bias;
    int64_t stride = 1;
    int64_t dilation = 1;
    int64_t padding = 0;
    int64_t groups = 1;

    int64_t out_channels() const { return weight.dim(0); }
    int64_t kernel() const { return weight.dim(2); }
};

using Conv2dParams = Conv2dParamsT<float>;

// floor((extent + 2*padding - dilation*(k-1) - 1) / stride) + 1; throws when
// the result would be empty.
std::pair<int64_t, int64_t> conv2d_output_hw(int64_t h, int64_t w, int64_t kernel, int64_t stride,
                                             int64_t dilation, int64_t padding);

// Cross-correlation with zero padding, grouped/strided/dilated. Differentiable
// w.r.t. input, weight and bias.
template <typename T>
TensorT<T> conv2d(const TensorT<T>& input, const Conv2dParamsT<T>& p);

// x * Phi(x) with the exact Gaussian CDF.
template <typename T>
TensorT<T> gelu(const TensorT<T>& x);

template <typename T>
TensorT<T> sigmoid(const TensorT<T>& x);

enum class BatchNormMode { training, inference };

template <typename T>
struct BatchNormParamsT {
    TensorT<T> gamma;         // [C], trainable
    TensorT<T> beta;          // [C], trainable
    TensorT<T> running_mean;  // [C], buffer
    TensorT<T> running_var;   // [C], buffer
    T eps = static_cast<T>(1e-5);
    T momentum = static_cast<T>(0.1);
    BatchNormMode mode = BatchNormMode::training;

    int64_t channels() const { return gamma.dim(0); }
};

using BatchNormParams = BatchNormParamsT<float>;

// Training mode normalizes by per-channel batch statistics (biased variance)
// and updates running stats in place: running <- (1-momentum)*running +
// momentum*batch. Inference mode normalizes by the running stats.
template <typename T>
TensorT<T> batch_norm(const TensorT<T>& x, BatchNormParamsT<T>& p);

// Bilinear x2 upsampling with half-pixel sample centers and edge clamping.
template <typename T>
TensorT<T> upsample_bilinear_x2(const TensorT<T>& x);

// Reverses the W axis.
template <typename T>
TensorT<T> horizontal_flip(const TensorT<T>& x);

}  // namespace dca
