#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "dca/gradcheck.hpp"
#include "dca/model.hpp"

using dca::DepthModelT;
using dca::ModelConfig;
using dca::Tensor;
using dca::TensorT;

namespace {

template <typename T>
TensorT<T> random_tensor(const dca::Shape& shape, uint64_t seed, T lo = T(0), T hi = T(1)) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(static_cast<double>(lo), static_cast<double>(hi));
    std::vector<T> vals(static_cast<size_t>(dca::shape_numel(shape)));
    for (auto& v : vals) v = static_cast<T>(dist(rng));
    return TensorT<T>::from_values(shape, std::move(vals));
}

ModelConfig micro_config(bool dca = true) {
    ModelConfig cfg;
    cfg.input_h = 32;
    cfg.input_w = 32;
    cfg.enc_channels = {2, 2, 3, 3, 4};
    cfg.dec_channels = {4, 3, 3, 2, 2};
    cfg.refine_channels = 2;
    cfg.dca_enabled = dca;
    cfg.seed = 7;
    return cfg;
}

// Averages every rank-4 weight with its W-mirror so all spatial kernels are
// left-right symmetric.
template <typename T>
void symmetrize_kernels(DepthModelT<T>& model) {
    for (const auto& entry : model.registry().entries()) {
        if (!entry.trainable || entry.tensor.rank() != 4) continue;
        auto tensor = entry.tensor;
        auto data = tensor.mutable_data();
        const int64_t k = tensor.dim(3);
        const int64_t rows = tensor.numel() / k;
        for (int64_t r = 0; r < rows; ++r) {
            T* row = data.data() + r * k;
            for (int64_t i = 0; i < k / 2; ++i) {
                const T avg = (row[i] + row[k - 1 - i]) / T(2);
                row[i] = avg;
                row[k - 1 - i] = avg;
            }
        }
    }
}

}  // namespace

TEST_CASE("encoder_forward stride arithmetic") {
    ModelConfig cfg;
    cfg.input_h = 64;
    cfg.input_w = 96;
    DepthModelT<float> model(cfg);
    Tensor rgb = random_tensor<float>({1, 3, 64, 96}, 1);
    auto features = dca::encoder_forward(rgb, model);
    for (int i = 0; i < 5; ++i) {
        const int64_t s = 2LL << i;
        CHECK(features[i].shape() ==
              dca::Shape{1, cfg.enc_channels[i], 64 / s, 96 / s});
    }
}

TEST_CASE("encoder_forward rejects indivisible resolutions") {
    DepthModelT<float> model(micro_config());
    CHECK_THROWS_AS(dca::encoder_forward(random_tensor<float>({1, 3, 48, 32}, 2), model),
                    dca::ShapeError);
}

TEST_CASE("encoder zero weights give zero features") {
    DepthModelT<float> model(micro_config());
    for (const auto& entry : model.registry().entries()) {
        if (entry.name.ends_with(".weight")) {
            auto t = entry.tensor;
            auto d = t.mutable_data();
            std::fill(d.begin(), d.end(), 0.0f);
        }
    }
    Tensor rgb = random_tensor<float>({2, 3, 32, 32}, 3);
    auto features = dca::encoder_forward(rgb, model);
    for (const auto& f : features)
        for (float v : f.data()) CHECK(v == 0.0f);
}

TEST_CASE("same seed gives bit-identical parameters and forward") {
    ModelConfig cfg = micro_config();
    DepthModelT<float> a(cfg), b(cfg);
    REQUIRE(a.registry().entries().size() == b.registry().entries().size());
    for (size_t i = 0; i < a.registry().entries().size(); ++i) {
        const auto& ea = a.registry().entries()[i];
        const auto& eb = b.registry().entries()[i];
        CHECK(ea.name == eb.name);
        REQUIRE(ea.tensor.numel() == eb.tensor.numel());
        for (int64_t j = 0; j < ea.tensor.numel(); ++j)
            CHECK(ea.tensor.data()[j] == eb.tensor.data()[j]);
    }
    Tensor rgb = random_tensor<float>({2, 3, 32, 32}, 4);
    dca::NoGradGuard ng;
    Tensor ya = dca::model_forward(rgb, a);
    Tensor yb = dca::model_forward(rgb, b);
    for (int64_t i = 0; i < ya.numel(); ++i) CHECK(ya.data()[i] == yb.data()[i]);
}

TEST_CASE("model_forward output range and resolution") {
    DepthModelT<float> model(micro_config());
    Tensor rgb = random_tensor<float>({2, 3, 32, 32}, 5);
    dca::NoGradGuard ng;
    Tensor depth = dca::model_forward(rgb, model);
    REQUIRE(depth.shape() == dca::Shape{2, 1, 32, 32});
    for (float v : depth.data()) {
        CHECK(v > 0.0f);
        CHECK(v < 10.0f);
    }
}

TEST_CASE("dca_enabled=false skips the attention branch") {
    DepthModelT<float> base(micro_config(false));
    Tensor rgb = random_tensor<float>({2, 3, 32, 32}, 6);
    dca::NoGradGuard ng;
    Tensor depth = dca::model_forward(rgb, base);
    CHECK(depth.shape() == dca::Shape{2, 1, 32, 32});
    CHECK(base.attention.empty());
}

TEST_CASE("parameter name sets differ exactly by attention and DSDC blocks") {
    DepthModelT<float> with(micro_config(true));
    DepthModelT<float> without(micro_config(false));
    std::set<std::string> names_with, names_without;
    for (const auto& e : with.registry().entries()) names_with.insert(e.name);
    for (const auto& e : without.registry().entries()) names_without.insert(e.name);
    for (const auto& name : names_without) {
        CHECK(names_with.count(name) == 1);
    }
    for (const auto& name : names_with) {
        const bool dca_name =
            name.starts_with("attention.") || name.find(".dsdc.") != std::string::npos;
        if (names_without.count(name) == 0) {
            CHECK(dca_name);
        } else {
            CHECK_FALSE(dca_name);
        }
    }
}

TEST_CASE("param_count closed form and ablation accounting") {
    // single 3x3 conv, 3 -> 4 channels, with bias
    dca::Conv2dParamsT<float> conv;
    conv.weight = Tensor::zeros({4, 3, 3, 3});
    conv.bias = Tensor::zeros({4});
    CHECK(conv.weight.numel() + conv.bias.numel() == 112);

    DepthModelT<float> with(micro_config(true));
    DepthModelT<float> without(micro_config(false));
    auto report_with = dca::param_count(with);
    auto report_without = dca::param_count(without);
    CHECK(report_without.dca_module == 0);
    CHECK(report_with.dca_module > 0);
    CHECK(report_with.total - report_without.total == report_with.dca_module);

    int64_t group_sum = 0;
    for (const auto& [name, count] : report_with.groups) group_sum += count;
    CHECK(group_sum == report_with.total);
    CHECK(report_with.total == with.registry().trainable_count());
}

TEST_CASE("full model gradient check on a micro config") {
    using D = TensorT<double>;
    ModelConfig cfg = micro_config();
    DepthModelT<double> model(cfg);
    D rgb = random_tensor<double>({2, 3, 32, 32}, 8);

    auto f = [&model](D& t) { return dca::mean(dca::model_forward(t, model)); };
    CHECK(dca::finite_diff_check(f, rgb, 1e-5, 16, 1) < 1e-4);

    // a few parameter tensors spread across the blocks
    const std::vector<std::string> picks = {
        "encoder.stage1.down.weight", "attention.layer2.dsdc.dw3.weight",
        "decoder.stage8.dsdc.pw.weight", "decoder.stage2.conv1.bn.gamma", "head.out.bias"};
    for (const auto& name : picks) {
        const TensorT<double>* param = model.registry().find(name);
        REQUIRE(param != nullptr);
        TensorT<double> tensor = *param;
        auto g = [&model, &rgb](D&) { return dca::mean(dca::model_forward(rgb, model)); };
        CHECK(dca::finite_diff_check(g, tensor, 1e-5, 6, 2) < 1e-4);
    }
}

TEST_CASE("predict_flip_averaged is symmetric on symmetric input") {
    DepthModelT<float> model(micro_config());
    model.set_training(false);
    const int64_t h = 32, w = 32;
    std::vector<float> vals(3 * h * w);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    for (int64_t c = 0; c < 3; ++c)
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w / 2; ++x) {
                const float v = dist(rng);
                vals[(c * h + y) * w + x] = v;
                vals[(c * h + y) * w + (w - 1 - x)] = v;
            }
    Tensor rgb = Tensor::from_values({1, 3, h, w}, vals);
    Tensor depth = dca::predict_flip_averaged(rgb, model);
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x) {
            const float a = depth.data()[y * w + x];
            const float b = depth.data()[y * w + (w - 1 - x)];
            CHECK(std::abs(a - b) < 1e-5f);
        }
}

TEST_CASE("flip-equivariant weights make flip averaging a no-op") {
    DepthModelT<float> model(micro_config());
    symmetrize_kernels(model);
    model.set_training(false);
    Tensor rgb = random_tensor<float>({1, 3, 32, 32}, 10);
    Tensor averaged = dca::predict_flip_averaged(rgb, model);
    dca::NoGradGuard ng;
    Tensor plain = dca::model_forward(rgb, model);
    for (int64_t i = 0; i < plain.numel(); ++i)
        CHECK(std::abs(averaged.data()[i] - plain.data()[i]) < 1e-5f);
}

TEST_CASE("predict_flip_averaged keeps the sigmoid range and checks mode") {
    DepthModelT<float> model(micro_config());
    Tensor rgb = random_tensor<float>({1, 3, 32, 32}, 11);
    CHECK_THROWS_AS(dca::predict_flip_averaged(rgb, model), dca::ConfigError);
    model.set_training(false);
    Tensor depth = dca::predict_flip_averaged(rgb, model);
    for (float v : depth.data()) {
        CHECK(v > 0.0f);
        CHECK(v < 10.0f);
    }
}

TEST_CASE("model config file round trip and validation") {
    ModelConfig cfg = micro_config();
    std::string text = dca::model_config_to_string(cfg);
    ModelConfig parsed = dca::parse_model_config(text);
    CHECK(parsed.input_h == cfg.input_h);
    CHECK(parsed.enc_channels == cfg.enc_channels);
    CHECK(parsed.dec_channels == cfg.dec_channels);
    CHECK(parsed.dca_enabled == cfg.dca_enabled);
    CHECK(parsed.seed == cfg.seed);

    CHECK_THROWS_AS(dca::parse_model_config("bogus_key = 3\n"), dca::ConfigError);
    CHECK_THROWS_AS(dca::parse_model_config("input_h = 33\n"), dca::ConfigError);
    ModelConfig bad = cfg;
    bad.dec_channels[0] = cfg.enc_channels[4] + 1;
    CHECK_THROWS_AS(dca::validate_model_config(bad), dca::ConfigError);
}
