#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "dca/nn_ops.hpp"
#include "dca/tensor.hpp"

namespace dca {

// Ordered table of named tensors. Trainable entries are what the optimizer
// walks; buffers (batch-norm running stats) are persisted but never updated
// by gradients. Order is construction order, which fixes the checkpoint
// layout.
template <typename T>
class ParamRegistryT {
public:
    struct Entry {
        std::string name;
        TensorT<T> tensor;
        bool trainable;
    };

    void add(const std::string& name, TensorT<T> tensor, bool trainable) {
        DCA_CHECK(index_.find(name) == index_.end(), ConfigError,
                  "duplicate parameter name: " + name);
        index_[name] = entries_.size();
        entries_.push_back({name, std::move(tensor), trainable});
        if (trainable) entries_.back().tensor.set_requires_grad(true);
    }

    const std::vector<Entry>& entries() const { return entries_; }

    const TensorT<T>* find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? nullptr : &entries_[it->second].tensor;
    }

    int64_t trainable_count() const {
        int64_t total = 0;
        for (const auto& e : entries_)
            if (e.trainable) total += e.tensor.numel();
        return total;
    }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, size_t> index_;
};

using ParamRegistry = ParamRegistryT<float>;

// conv -> GELU -> batch norm; the unit every layer of this network is built
// from. Convs feeding a BN carry no bias.
template <typename T>
struct ConvBlockT {
    Conv2dParamsT<T> conv;
    BatchNormParamsT<T> bn;

    void set_mode(BatchNormMode mode) { bn.mode = mode; }
};

template <typename T>
TensorT<T> conv_block_forward(const TensorT<T>& x, ConvBlockT<T>& block) {
    return batch_norm(gelu(conv2d(x, block.conv)), block.bn);
}

template <typename T>
TensorT<T> kaiming_uniform_conv_weight(const Shape& shape, std::mt19937_64& rng) {
    const int64_t fan_in = shape[1] * shape[2] * shape[3];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<T> values(static_cast<size_t>(shape_numel(shape)));
    for (auto& v : values) v = static_cast<T>(dist(rng));
    return TensorT<T>::from_values(shape, std::move(values));
}

template <typename T>
ConvBlockT<T> make_conv_block(ParamRegistryT<T>& reg, const std::string& prefix, int64_t c_in,
                              int64_t c_out, int64_t kernel, int64_t stride, int64_t dilation,
                              int64_t padding, int64_t groups, std::mt19937_64& rng) {
    ConvBlockT<T> block;
    block.conv.weight =
        kaiming_uniform_conv_weight<T>({c_out, c_in / groups, kernel, kernel}, rng);
    block.conv.stride = stride;
    block.conv.dilation = dilation;
    block.conv.padding = padding;
    block.conv.groups = groups;
    block.bn.gamma = TensorT<T>::ones({c_out});
    block.bn.beta = TensorT<T>::zeros({c_out});
    block.bn.running_mean = TensorT<T>::zeros({c_out});
    block.bn.running_var = TensorT<T>::ones({c_out});
    reg.add(prefix + ".weight", block.conv.weight, true);
    reg.add(prefix + ".bn.gamma", block.bn.gamma, true);
    reg.add(prefix + ".bn.beta", block.bn.beta, true);
    reg.add(prefix + ".bn.running_mean", block.bn.running_mean, false);
    reg.add(prefix + ".bn.running_var", block.bn.running_var, false);
    return block;
}

}  // namespace dca
