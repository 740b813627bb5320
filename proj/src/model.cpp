#include "dca/model.hpp"

namespace dca {

template <typename T>
DepthModelT<T>::DepthModelT(const ModelConfig& cfg) : config_(cfg) {
    validate_model_config(cfg);
    std::mt19937_64 rng(cfg.seed);
    const auto& e = cfg.enc_channels;
    const auto& d = cfg.dec_channels;

    int64_t c_in = 3;
    for (int i = 0; i < 5; ++i) {
        const std::string prefix = "encoder.stage" + std::to_string(i + 1);
        encoder[i].down = make_conv_block(registry_, prefix + ".down", c_in, e[i], 4, 2, 1, 1, 1, rng);
        encoder[i].conv = make_conv_block(registry_, prefix + ".conv", e[i], e[i], 3, 1, 1, 1, 1, rng);
        c_in = e[i];
    }

    refine1 = make_conv_block(registry_, "refine.conv1", 3, cfg.refine_channels, 3, 1, 1, 1, 1, rng);
    refine2 = make_conv_block(registry_, "refine.conv2", cfg.refine_channels, cfg.refine_channels,
                              3, 1, 1, 1, 1, rng);

    if (cfg.dca_enabled) {
        attention.reserve(4);
        // layer 1 consumes the RGB image; layer l >= 2 fuses the previous map
        // with the encoded feature one stride up
        attention.push_back(make_attention_layer(registry_, "attention.layer1", 3, 0, e[0], rng));
        for (int l = 2; l <= 4; ++l)
            attention.push_back(make_attention_layer(registry_,
                                                     "attention.layer" + std::to_string(l),
                                                     e[l - 2], e[l - 2], e[l - 1], rng));
    }

    // decoder stage k fuses the encoded feature at stride 2^(5-k)
    const int64_t strides[4] = {16, 8, 4, 2};
    for (int k = 0; k < 4; ++k) {
        const int64_t enc_c = e[3 - k];
        const int64_t prev_c = (k == 0) ? e[4] : d[k];
        decoder[k] = make_decoder_stage(registry_,
                                        "decoder.stage" + std::to_string(strides[k]), prev_c,
                                        enc_c, d[k + 1], cfg.dca_enabled, rng);
    }

    const int64_t head_in = d[4] + cfg.refine_channels;
    head1 = make_conv_block(registry_, "head.conv1", head_in, d[4], 3, 1, 1, 1, 1, rng);
    head2 = make_conv_block(registry_, "head.conv2", d[4], d[4], 3, 1, 1, 1, 1, rng);
    head_out.weight = kaiming_uniform_conv_weight<T>({1, d[4], 1, 1}, rng);
    head_out.bias = TensorT<T>::zeros({1});
    registry_.add("head.out.weight", head_out.weight, true);
    registry_.add("head.out.bias", head_out.bias, true);
}

template <typename T>
void DepthModelT<T>::set_training(bool training) {
    training_ = training;
    const BatchNormMode mode = training ? BatchNormMode::training : BatchNormMode::inference;
    for (auto& stage : encoder) {
        stage.down.set_mode(mode);
        stage.conv.set_mode(mode);
    }
    refine1.set_mode(mode);
    refine2.set_mode(mode);
    for (auto& layer : attention) layer.set_mode(mode);
    for (auto& stage : decoder) stage.set_mode(mode);
    head1.set_mode(mode);
    head2.set_mode(mode);
}

template <typename T>
std::array<TensorT<T>, 5> encoder_forward(const TensorT<T>& rgb, DepthModelT<T>& model) {
    DCA_CHECK(rgb.defined() && rgb.rank() == 4 && rgb.dim(1) == 3, ShapeError,
              "encoder_forward: input must be [N,3,H,W]");
    DCA_CHECK(rgb.dim(2) % 32 == 0 && rgb.dim(3) % 32 == 0, ShapeError,
              "encoder_forward: H and W must be divisible by 32, got " + shape_str(rgb.shape()));
    std::array<TensorT<T>, 5> features;
    TensorT<T> x = rgb;
    for (int i = 0; i < 5; ++i) {
        x = conv_block_forward(x, model.encoder[i].down);
        x = conv_block_forward(x, model.encoder[i].conv);
        features[i] = x;
    }
    return features;
}

template <typename T>
TensorT<T> model_forward(const TensorT<T>& rgb, DepthModelT<T>& model) {
    auto features = encoder_forward(rgb, model);

    TensorT<T> refined = conv_block_forward(rgb, model.refine1);
    refined = conv_block_forward(refined, model.refine2);

    std::array<TensorT<T>, 4> attention_maps;  // strides 2,4,8,16
    if (model.config().dca_enabled) {
        TensorT<T> a = attention_layer(rgb, TensorT<T>(), model.attention[0]);
        attention_maps[0] = a;
        for (int l = 1; l < 4; ++l) {
            a = attention_layer(a, features[l - 1], model.attention[l]);
            attention_maps[l] = a;
        }
    }

    TensorT<T> dec = features[4];
    for (int k = 0; k < 4; ++k)
        dec = decoder_stage(dec, features[3 - k], attention_maps[3 - k], model.decoder[k]);

    TensorT<T> x = concat_channels({upsample_bilinear_x2(dec), refined});
    x = conv_block_forward(x, model.head1);
    x = conv_block_forward(x, model.head2);
    x = conv2d(x, model.head_out);
    return scalar_mul(sigmoid(x), static_cast<T>(model.config().max_depth));
}

template <typename T>
TensorT<T> predict_flip_averaged(const TensorT<T>& rgb, DepthModelT<T>& model) {
    DCA_CHECK(!model.training(), ConfigError,
              "predict_flip_averaged requires inference mode (call set_training(false))");
    NoGradGuard no_grad;
    TensorT<T> plain = model_forward(rgb, model);
    TensorT<T> flipped = horizontal_flip(model_forward(horizontal_flip(rgb), model));
    return scalar_mul(add(plain, flipped), static_cast<T>(0.5));
}

template <typename T>
ParamCountReport param_count(const DepthModelT<T>& model) {
    ParamCountReport report;
    const char* group_names[5] = {"encoder", "decoder", "attention", "refine", "head"};
    std::array<int64_t, 5> totals{};
    for (const auto& entry : model.registry().entries()) {
        if (!entry.trainable) continue;
        const int64_t n = entry.tensor.numel();
        report.total += n;
        for (int g = 0; g < 5; ++g) {
            if (entry.name.starts_with(std::string(group_names[g]) + ".")) {
                totals[g] += n;
                break;
            }
        }
        if (entry.name.starts_with("attention.") || entry.name.find(".dsdc.") != std::string::npos)
            report.dca_module += n;
    }
    for (int g = 0; g < 5; ++g) report.groups.emplace_back(group_names[g], totals[g]);
    return report;
}

template class DepthModelT<float>;
template class DepthModelT<double>;

#define DCA_INSTANTIATE_MODEL(T)                                                            \
    template std::array<TensorT<T>, 5> encoder_forward<T>(const TensorT<T>&, DepthModelT<T>&); \
    template TensorT<T> model_forward<T>(const TensorT<T>&, DepthModelT<T>&);               \
    template TensorT<T> predict_flip_averaged<T>(const TensorT<T>&, DepthModelT<T>&);       \
    template ParamCountReport param_count<T>(const DepthModelT<T>&);

DCA_INSTANTIATE_MODEL(float)
DCA_INSTANTIATE_MODEL(double)

#undef DCA_INSTANTIATE_MODEL

}  // namespace dca
