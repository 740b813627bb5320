#pragma once

#include <array>
#include <memory>

#include "dca/blocks.hpp"
#include "dca/config.hpp"

namespace dca {

// Full depth network: a 5-stage strided-conv pyramid encoder (stand-in for a
// pre-trained backbone, same stride pattern), a full-resolution refinement
// path, a 4-layer attention branch, 4 decoder fusion stages, and a
// sigmoid-bounded depth head. All parameters live in `registry` under dotted
// names, which also fixes the checkpoint layout.
template <typename T>
class DepthModelT {
public:
    struct EncoderStage {
        ConvBlockT<T> down;  // 4x4 stride 2
        ConvBlockT<T> conv;  // 3x3
    };

    explicit DepthModelT(const ModelConfig& cfg);

    DepthModelT(const DepthModelT&) = delete;
    DepthModelT& operator=(const DepthModelT&) = delete;
    DepthModelT(DepthModelT&&) = default;
    DepthModelT& operator=(DepthModelT&&) = default;

    const ModelConfig& config() const { return config_; }
    ParamRegistryT<T>& registry() { return registry_; }
    const ParamRegistryT<T>& registry() const { return registry_; }

    void set_training(bool training);
    bool training() const { return training_; }

    std::array<EncoderStage, 5> encoder;
    ConvBlockT<T> refine1, refine2;
    std::vector<AttentionLayerParamsT<T>> attention;  // layers at output strides 2,4,8,16
    std::array<DecoderStageParamsT<T>, 4> decoder;    // output strides 16,8,4,2
    ConvBlockT<T> head1, head2;
    Conv2dParamsT<T> head_out;  // 1x1 to a single channel, with bias

private:
    ModelConfig config_;
    ParamRegistryT<T> registry_;
    bool training_ = true;
};

using DepthModel = DepthModelT<float>;

// Encoded features at strides 2,4,8,16,32.
template <typename T>
std::array<TensorT<T>, 5> encoder_forward(const TensorT<T>& rgb, DepthModelT<T>& model);

// Depth map in (0, max_depth), same resolution as the input.
template <typename T>
TensorT<T> model_forward(const TensorT<T>& rgb, DepthModelT<T>& model);

// 0.5 * (f(x) + flip(f(flip(x)))). Requires inference mode.
template <typename T>
TensorT<T> predict_flip_averaged(const TensorT<T>& rgb, DepthModelT<T>& model);

struct ParamCountReport {
    std::vector<std::pair<std::string, int64_t>> groups;  // encoder/decoder/attention/refine/head
    int64_t dca_module = 0;  // attention branch + decoder DSDC blocks
    int64_t total = 0;
};

template <typename T>
ParamCountReport param_count(const DepthModelT<T>& model);

}  // namespace dca
