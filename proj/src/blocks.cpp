#include "dca/blocks.hpp"

namespace dca {

template <typename T>
DsdcParamsT<T> make_dsdc(ParamRegistryT<T>& reg, const std::string& prefix, int64_t channels,
                         std::mt19937_64& rng) {
    DsdcParamsT<T> p;
    p.channels = channels;
    for (size_t i = 0; i < kDsdcDilations.size(); ++i) {
        const int64_t d = kDsdcDilations[i];
        p.depthwise[i] = make_conv_block(reg, prefix + ".dw" + std::to_string(d), channels,
                                         channels, 3, 1, d, d, channels, rng);
    }
    p.pointwise = make_conv_block(reg, prefix + ".pw", 4 * channels, channels, 1, 1, 1, 0, 1, rng);
    return p;
}

template <typename T>
TensorT<T> dsdc_forward(const TensorT<T>& feature, DsdcParamsT<T>& p) {
    DCA_CHECK(feature.defined() && feature.rank() == 4, ShapeError, "dsdc_forward: NCHW input");
    DCA_CHECK(feature.dim(1) == p.channels, ShapeError,
              "dsdc_forward: expected C=" + std::to_string(p.channels) + ", got " +
                  std::to_string(feature.dim(1)));
    std::vector<TensorT<T>> branches;
    branches.reserve(p.depthwise.size());
    for (auto& block : p.depthwise) branches.push_back(conv_block_forward(feature, block));
    return conv_block_forward(concat_channels(branches), p.pointwise);
}

template <typename T>
AttentionLayerParamsT<T> make_attention_layer(ParamRegistryT<T>& reg, const std::string& prefix,
                                              int64_t prev_channels, int64_t encoded_channels,
                                              int64_t out_channels, std::mt19937_64& rng) {
    AttentionLayerParamsT<T> p;
    int64_t in_channels = prev_channels;
    if (encoded_channels > 0) {
        const int64_t proj_channels = std::max<int64_t>(1, encoded_channels / 2);
        p.has_projection = true;
        p.projection = make_conv_block(reg, prefix + ".proj", encoded_channels, proj_channels, 1,
                                       1, 1, 0, 1, rng);
        in_channels += proj_channels;
    }
    p.downsample =
        make_conv_block(reg, prefix + ".down", in_channels, out_channels, 4, 2, 1, 1, 1, rng);
    p.conv1 = make_conv_block(reg, prefix + ".conv1", out_channels, out_channels, 3, 1, 1, 1, 1, rng);
    p.conv2 = make_conv_block(reg, prefix + ".conv2", out_channels, out_channels, 3, 1, 1, 1, 1, rng);
    p.dsdc = make_dsdc(reg, prefix + ".dsdc", out_channels, rng);
    return p;
}

template <typename T>
TensorT<T> attention_layer(const TensorT<T>& prev, const TensorT<T>& encoded,
                           AttentionLayerParamsT<T>& p) {
    DCA_CHECK(prev.defined() && prev.rank() == 4, ShapeError, "attention_layer: NCHW input");
    TensorT<T> x = prev;
    if (p.has_projection) {
        DCA_CHECK(encoded.defined(), ShapeError,
                  "attention_layer: encoded feature required for this layer");
        DCA_CHECK(encoded.dim(0) == prev.dim(0) && encoded.dim(2) == prev.dim(2) &&
                      encoded.dim(3) == prev.dim(3),
                  ShapeError, "attention_layer: prev and encoded must share N,H,W; got " +
                                  shape_str(prev.shape()) + " vs " + shape_str(encoded.shape()));
        x = concat_channels({prev, conv_block_forward(encoded, p.projection)});
    }
    x = conv_block_forward(x, p.downsample);
    x = conv_block_forward(x, p.conv1);
    x = conv_block_forward(x, p.conv2);
    return dsdc_forward(x, p.dsdc);
}

template <typename T>
TensorT<T> dilated_cross_attention(const TensorT<T>& encoded, const TensorT<T>& attention_map,
                                   DsdcParamsT<T>& dsdc) {
    TensorT<T> dilated = dsdc_forward(encoded, dsdc);
    DCA_CHECK(dilated.shape() == attention_map.shape(), ShapeError,
              "dilated_cross_attention: feature/attention shape mismatch, " +
                  shape_str(dilated.shape()) + " vs " + shape_str(attention_map.shape()));
    return elementwise_mul(dilated, attention_map);
}

template <typename T>
DecoderStageParamsT<T> make_decoder_stage(ParamRegistryT<T>& reg, const std::string& prefix,
                                          int64_t prev_channels, int64_t encoded_channels,
                                          int64_t out_channels, bool with_dsdc,
                                          std::mt19937_64& rng) {
    DecoderStageParamsT<T> p;
    p.has_dsdc = with_dsdc;
    if (with_dsdc) p.dsdc = make_dsdc(reg, prefix + ".dsdc", encoded_channels, rng);
    p.conv1 = make_conv_block(reg, prefix + ".conv1", encoded_channels + prev_channels,
                              out_channels, 3, 1, 1, 1, 1, rng);
    p.conv2 = make_conv_block(reg, prefix + ".conv2", out_channels, out_channels, 3, 1, 1, 1, 1, rng);
    return p;
}

template <typename T>
TensorT<T> decoder_stage(const TensorT<T>& prev_dec, const TensorT<T>& encoded,
                         const TensorT<T>& attention_map, DecoderStageParamsT<T>& p) {
    DCA_CHECK(prev_dec.defined() && encoded.defined(), ShapeError, "decoder_stage: inputs required");
    DCA_CHECK(prev_dec.dim(2) * 2 == encoded.dim(2) && prev_dec.dim(3) * 2 == encoded.dim(3),
              ShapeError,
              "decoder_stage: previous decoder output must be at half resolution, got " +
                  shape_str(prev_dec.shape()) + " vs " + shape_str(encoded.shape()));
    TensorT<T> up = upsample_bilinear_x2(prev_dec);
    TensorT<T> cross =
        p.has_dsdc ? dilated_cross_attention(encoded, attention_map, p.dsdc) : encoded;
    TensorT<T> x = concat_channels({cross, up});
    x = conv_block_forward(x, p.conv1);
    return conv_block_forward(x, p.conv2);
}

#define DCA_INSTANTIATE_BLOCKS(T)                                                             \
    template DsdcParamsT<T> make_dsdc<T>(ParamRegistryT<T>&, const std::string&, int64_t,     \
                                         std::mt19937_64&);                                   \
    template TensorT<T> dsdc_forward<T>(const TensorT<T>&, DsdcParamsT<T>&);                  \
    template AttentionLayerParamsT<T> make_attention_layer<T>(                                \
        ParamRegistryT<T>&, const std::string&, int64_t, int64_t, int64_t, std::mt19937_64&); \
    template TensorT<T> attention_layer<T>(const TensorT<T>&, const TensorT<T>&,              \
                                           AttentionLayerParamsT<T>&);                        \
    template TensorT<T> dilated_cross_attention<T>(const TensorT<T>&, const TensorT<T>&,      \
                                                   DsdcParamsT<T>&);                          \
    template DecoderStageParamsT<T> make_decoder_stage<T>(ParamRegistryT<T>&,                 \
                                                          const std::string&, int64_t,        \
                                                          int64_t, int64_t, bool,             \
                                                          std::mt19937_64&);                  \
    template TensorT<T> decoder_stage<T>(const TensorT<T>&, const TensorT<T>&,                \
                                         const TensorT<T>&, DecoderStageParamsT<T>&);

DCA_INSTANTIATE_BLOCKS(float)
DCA_INSTANTIATE_BLOCKS(double)

#undef DCA_INSTANTIATE_BLOCKS

}  // namespace dca
