#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dca/common.hpp"

namespace dca {

// Dimension list; rank 1..4, NCHW for rank 4, row-major with W fastest.
using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

// One recorded node of the dynamic computation graph. A tensor owns its node;
// non-leaf nodes carry the inputs they differentiate into plus a closure that
// pushes the upstream gradient one level down. The graph is freed after
// backward.
template <typename T>
struct NodeT {
    Shape shape;
    std::vector<T> data;
    bool requires_grad = false;
    std::vector<T> grad;  // empty means "absent"
    const char* op = "leaf";
    std::vector<std::shared_ptr<NodeT<T>>> parents;
    std::function<void(const std::vector<T>&)> backward_fn;

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    bool interior() const { return static_cast<bool>(backward_fn); }
    // Gradients are accumulated only into grad-requiring leaves and interior
    // nodes; a detached leaf keeps grad absent.
    bool wants_grad() const { return requires_grad || interior(); }

    void accumulate_grad(const T* values, int64_t count);
};

}  // namespace detail

// Dense tensor with an optional gradient slot. Copies are shallow (shared
// storage); contents are treated as immutable while a forward graph that
// references them is alive. `mutable_data` exists for leaf parameters, which
// are single-writer between steps.
template <typename T>
class TensorT {
public:
    using Node = detail::NodeT<T>;

    TensorT() = default;

    static TensorT zeros(const Shape& shape) { return full(shape, T(0)); }
    static TensorT ones(const Shape& shape) { return full(shape, T(1)); }
    static TensorT full(const Shape& shape, T value);
    static TensorT from_values(const Shape& shape, std::vector<T> values);
    static TensorT scalar(T value) { return from_values({1}, {value}); }

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int64_t rank() const { return static_cast<int64_t>(node_->shape.size()); }
    int64_t dim(int64_t axis) const { return node_->shape[axis]; }
    int64_t numel() const { return node_->numel(); }

    std::span<const T> data() const { return {node_->data.data(), node_->data.size()}; }
    // Leaf mutation only (parameter updates, finite-difference probes).
    std::span<T> mutable_data() { return {node_->data.data(), node_->data.size()}; }

    T item() const;

    bool requires_grad() const { return node_->requires_grad; }
    TensorT& set_requires_grad(bool value) {
        node_->requires_grad = value;
        return *this;
    }

    bool has_grad() const { return !node_->grad.empty(); }
    std::span<const T> grad() const { return {node_->grad.data(), node_->grad.size()}; }
    void clear_grad() { node_->grad.clear(); }

    // Same contents, fresh leaf node (no graph, no grad).
    TensorT detached_copy() const;

    std::shared_ptr<Node> node() const { return node_; }
    static TensorT from_node(std::shared_ptr<Node> node) {
        TensorT t;
        t.node_ = std::move(node);
        return t;
    }

private:
    std::shared_ptr<Node> node_;
};

using Tensor = TensorT<float>;

namespace detail {

// Builds an op result. Records the graph when grads are enabled and at least
// one input is tracked; otherwise the closure is dropped and the result is a
// plain leaf.
template <typename T>
TensorT<T> make_result(const char* op, Shape shape, std::vector<T> data,
                       const std::vector<TensorT<T>>& inputs,
                       std::function<void(const std::vector<T>&)> backward_fn);

template <typename T>
void check_finite(const std::vector<T>& data, const char* op);

}  // namespace detail

// --- elementwise / structural ops -------------------------------------------

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b);

template <typename T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b);

// out[i] = a[i] * b[i]; shapes must match exactly (no broadcasting).
template <typename T>
TensorT<T> elementwise_mul(const TensorT<T>& a, const TensorT<T>& b);

template <typename T>
TensorT<T> scalar_mul(const TensorT<T>& a, T factor);

template <typename T>
TensorT<T> sum(const TensorT<T>& x);

template <typename T>
TensorT<T> mean(const TensorT<T>& x);

// Concatenates rank-4 tensors along C. Parts must agree on N, H, W.
template <typename T>
TensorT<T> concat_channels(const std::vector<TensorT<T>>& parts);

template <typename T>
TensorT<T> concat_channels(std::initializer_list<TensorT<T>> parts) {
    return concat_channels(std::vector<TensorT<T>>(parts));
}

// Channels [begin, begin+count) of a rank-4 tensor.
template <typename T>
TensorT<T> slice_channels(const TensorT<T>& x, int64_t begin, int64_t count);

// Reverse-mode sweep from a scalar loss. Populates grad on every
// grad-requiring leaf reachable from the loss, summing over paths, then frees
// the recorded graph.
template <typename T>
void backward(const TensorT<T>& loss);

}  // namespace dca
