#pragma once

#include "dca/params.hpp"

namespace dca {

struct AdamWConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// Adam with bias correction plus decoupled weight decay: the decay term
// theta <- theta - lr*wd*theta is applied separately from the adaptive step.
class AdamW {
public:
    struct Slot {
        std::string name;
        Tensor param;
        Tensor m;
        Tensor v;
    };

    AdamW(ParamRegistry& registry, AdamWConfig cfg);

    // One update from the gradients currently on the parameters; every
    // trainable parameter must have one.
    void step();
    void zero_grad();

    void set_lr(double lr) { cfg_.lr = lr; }
    double lr() const { return cfg_.lr; }
    int64_t step_count() const { return step_; }
    void set_step_count(int64_t step) { step_ = step; }
    const AdamWConfig& config() const { return cfg_; }

    std::vector<Slot>& slots() { return slots_; }
    const std::vector<Slot>& slots() const { return slots_; }

private:
    AdamWConfig cfg_;
    std::vector<Slot> slots_;
    int64_t step_ = 0;
};

// base_lr * decay^epoch
double lr_at_epoch(int64_t epoch, double base_lr, double decay);

}  // namespace dca
