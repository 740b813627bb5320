#include "dca/optimizer.hpp"

#include <cmath>

namespace dca {

AdamW::AdamW(ParamRegistry& registry, AdamWConfig cfg) : cfg_(cfg) {
    DCA_CHECK(cfg.lr >= 0 && cfg.beta1 >= 0 && cfg.beta1 < 1 && cfg.beta2 >= 0 && cfg.beta2 < 1 &&
                  cfg.eps > 0 && cfg.weight_decay >= 0,
              ConfigError, "adamw: bad hyperparameters");
    for (const auto& entry : registry.entries()) {
        if (!entry.trainable) continue;
        Slot slot;
        slot.name = entry.name;
        slot.param = entry.tensor;
        slot.m = Tensor::zeros(entry.tensor.shape());
        slot.v = Tensor::zeros(entry.tensor.shape());
        slots_.push_back(std::move(slot));
    }
}

void AdamW::step() {
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (auto& slot : slots_) {
        DCA_CHECK(slot.param.has_grad(), GraphError,
                  "adamw_step: missing gradient for parameter '" + slot.name + "'");
        auto theta = slot.param.mutable_data();
        const auto grad = slot.param.grad();
        auto m = slot.m.mutable_data();
        auto v = slot.v.mutable_data();
        for (size_t i = 0; i < theta.size(); ++i) {
            const double g = static_cast<double>(grad[i]);
            const double mi = cfg_.beta1 * static_cast<double>(m[i]) + (1.0 - cfg_.beta1) * g;
            const double vi = cfg_.beta2 * static_cast<double>(v[i]) + (1.0 - cfg_.beta2) * g * g;
            m[i] = static_cast<float>(mi);
            v[i] = static_cast<float>(vi);
            const double m_hat = mi / bc1;
            const double v_hat = vi / bc2;
            double value = static_cast<double>(theta[i]);
            value -= cfg_.lr * cfg_.weight_decay * value;
            value -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
            theta[i] = static_cast<float>(value);
        }
    }
}

void AdamW::zero_grad() {
    for (auto& slot : slots_) slot.param.clear_grad();
}

double lr_at_epoch(int64_t epoch, double base_lr, double decay) {
    DCA_CHECK(epoch >= 0, ConfigError, "lr_at_epoch: epoch must be non-negative");
    return base_lr * std::pow(decay, static_cast<double>(epoch));
}

}  // namespace dca
