#pragma once

#include <array>

#include "dca/params.hpp"

namespace dca {

// Depthwise separable dilated convolution: four depthwise 3x3 branches at
// dilations 1,3,5,7 (padding = dilation so resolution is preserved),
// channel-concatenated and fused back to C by a 1x1 pointwise conv. Every
// conv is followed by GELU and batch norm.
inline constexpr std::array<int64_t, 4> kDsdcDilations = {1, 3, 5, 7};

template <typename T>
struct DsdcParamsT {
    std::array<ConvBlockT<T>, 4> depthwise;
    ConvBlockT<T> pointwise;
    int64_t channels = 0;

    void set_mode(BatchNormMode mode) {
        for (auto& b : depthwise) b.set_mode(mode);
        pointwise.set_mode(mode);
    }
};

using DsdcParams = DsdcParamsT<float>;

template <typename T>
DsdcParamsT<T> make_dsdc(ParamRegistryT<T>& reg, const std::string& prefix, int64_t channels,
                         std::mt19937_64& rng);

template <typename T>
TensorT<T> dsdc_forward(const TensorT<T>& feature, DsdcParamsT<T>& p);

// One layer of the attention branch: [1x1 projection of the encoded feature]
// -> concat with the previous output -> 4x4 stride-2 downsample -> two 3x3
// convs -> DSDC. Output channels match the encoder channels at the new
// stride, which is what makes the later elementwise product well-typed.
template <typename T>
struct AttentionLayerParamsT {
    bool has_projection = false;
    ConvBlockT<T> projection;  // 1x1, encoded C -> C/2
    ConvBlockT<T> downsample;  // 4x4 stride 2
    ConvBlockT<T> conv1;       // 3x3
    ConvBlockT<T> conv2;       // 3x3
    DsdcParamsT<T> dsdc;

    void set_mode(BatchNormMode mode) {
        if (has_projection) projection.set_mode(mode);
        downsample.set_mode(mode);
        conv1.set_mode(mode);
        conv2.set_mode(mode);
        dsdc.set_mode(mode);
    }
};

using AttentionLayerParams = AttentionLayerParamsT<float>;

// First layer: prev = RGB, encoded undefined, has_encoded=false.
template <typename T>
AttentionLayerParamsT<T> make_attention_layer(ParamRegistryT<T>& reg, const std::string& prefix,
                                              int64_t prev_channels, int64_t encoded_channels,
                                              int64_t out_channels, std::mt19937_64& rng);

template <typename T>
TensorT<T> attention_layer(const TensorT<T>& prev, const TensorT<T>& encoded,
                           AttentionLayerParamsT<T>& p);

// Eq-level core of the method: DSDC the encoded feature, then multiply
// elementwise with the attention map.
template <typename T>
TensorT<T> dilated_cross_attention(const TensorT<T>& encoded, const TensorT<T>& attention_map,
                                   DsdcParamsT<T>& dsdc);

// One decoder fusion: upsample the previous decoder output 2x, cross-attend
// the encoded feature, concat, and reduce channels with two 3x3 convs. With
// DCA disabled the raw encoded feature is concatenated instead.
template <typename T>
struct DecoderStageParamsT {
    bool has_dsdc = false;
    DsdcParamsT<T> dsdc;
    ConvBlockT<T> conv1;
    ConvBlockT<T> conv2;

    void set_mode(BatchNormMode mode) {
        if (has_dsdc) dsdc.set_mode(mode);
        conv1.set_mode(mode);
        conv2.set_mode(mode);
    }
};

using DecoderStageParams = DecoderStageParamsT<float>;

template <typename T>
DecoderStageParamsT<T> make_decoder_stage(ParamRegistryT<T>& reg, const std::string& prefix,
                                          int64_t prev_channels, int64_t encoded_channels,
                                          int64_t out_channels, bool with_dsdc,
                                          std::mt19937_64& rng);

template <typename T>
TensorT<T> decoder_stage(const TensorT<T>& prev_dec, const TensorT<T>& encoded,
                         const TensorT<T>& attention_map, DecoderStageParamsT<T>& p);

}  // namespace dca
