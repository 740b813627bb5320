#include "dca/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace dca {

namespace {
thread_local bool g_grad_enabled = true;
bool g_finite_checks = false;
}  // namespace

bool grad_enabled() { return g_grad_enabled; }
void set_grad_enabled(bool enabled) { g_grad_enabled = enabled; }
bool finite_checks_enabled() { return g_finite_checks; }
void set_finite_checks_enabled(bool enabled) { g_finite_checks = enabled; }

int64_t shape_numel(const Shape& shape) {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream out;
    out << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) out << ",";
        out << shape[i];
    }
    out << "]";
    return out.str();
}

namespace {

void validate_shape(const Shape& shape) {
    DCA_CHECK(!shape.empty() && shape.size() <= 4, ShapeError,
              "tensor rank must be 1..4, got " + shape_str(shape));
    for (int64_t d : shape)
        DCA_CHECK(d >= 1, ShapeError, "tensor dimensions must be >= 1, got " + shape_str(shape));
}

}  // namespace

namespace detail {

template <typename T>
void NodeT<T>::accumulate_grad(const T* values, int64_t count) {
    if (grad.empty()) grad.assign(data.size(), T(0));
    for (int64_t i = 0; i < count; ++i) grad[i] += values[i];
}

template <typename T>
void check_finite(const std::vector<T>& data, const char* op) {
    if (!finite_checks_enabled()) return;
    for (const T& v : data) {
        if (!std::isfinite(static_cast<double>(v)))
            throw NumericalError(std::string("non-finite value produced by op '") + op + "'");
    }
}

template <typename T>
TensorT<T> make_result(const char* op, Shape shape, std::vector<T> data,
                       const std::vector<TensorT<T>>& inputs,
                       std::function<void(const std::vector<T>&)> backward_fn) {
    check_finite(data, op);
    auto node = std::make_shared<NodeT<T>>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    node->op = op;
    bool tracked = false;
    if (grad_enabled()) {
        for (const auto& input : inputs) {
            if (input.node()->wants_grad()) {
                tracked = true;
                break;
            }
        }
    }
    if (tracked) {
        node->parents.reserve(inputs.size());
        for (const auto& input : inputs) node->parents.push_back(input.node());
        node->backward_fn = std::move(backward_fn);
    }
    return TensorT<T>::from_node(std::move(node));
}

template struct NodeT<float>;
template struct NodeT<double>;
template void check_finite<float>(const std::vector<float>&, const char*);
template void check_finite<double>(const std::vector<double>&, const char*);
template TensorT<float> make_result<float>(const char*, Shape, std::vector<float>,
                                           const std::vector<TensorT<float>>&,
                                           std::function<void(const std::vector<float>&)>);
template TensorT<double> make_result<double>(const char*, Shape, std::vector<double>,
                                             const std::vector<TensorT<double>>&,
                                             std::function<void(const std::vector<double>&)>);

}  // namespace detail

// --- TensorT ----------------------------------------------------------------

template <typename T>
TensorT<T> TensorT<T>::full(const Shape& shape, T value) {
    validate_shape(shape);
    auto node = std::make_shared<Node>();
    node->shape = shape;
    node->data.assign(static_cast<size_t>(shape_numel(shape)), value);
    return from_node(std::move(node));
}

template <typename T>
TensorT<T> TensorT<T>::from_values(const Shape& shape, std::vector<T> values) {
    validate_shape(shape);
    DCA_CHECK(static_cast<int64_t>(values.size()) == shape_numel(shape), ShapeError,
              "value list length " + std::to_string(values.size()) + " does not match shape " +
                  shape_str(shape));
    auto node = std::make_shared<Node>();
    node->shape = shape;
    node->data = std::move(values);
    return from_node(std::move(node));
}

template <typename T>
T TensorT<T>::item() const {
    DCA_CHECK(numel() == 1, ShapeError, "item() requires a single-element tensor");
    return node_->data[0];
}

template <typename T>
TensorT<T> TensorT<T>::detached_copy() const {
    auto node = std::make_shared<Node>();
    node->shape = node_->shape;
    node->data = node_->data;
    return from_node(std::move(node));
}

// --- ops ----------------------------------------------------------------

namespace {

template <typename T>
void check_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* op) {
    DCA_CHECK(a.shape() == b.shape(), ShapeError,
              std::string(op) + ": shapes must match exactly, got " + shape_str(a.shape()) +
                  " vs " + shape_str(b.shape()));
}

}  // namespace

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
    check_same_shape(a, b, "add");
    const auto av = a.data();
    const auto bv = b.data();
    std::vector<T> out(av.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
    auto an = a.node();
    auto bn = b.node();
    return detail::make_result<T>("add", a.shape(), std::move(out), {a, b},
                                  [an, bn](const std::vector<T>& gy) {
                                      if (an->wants_grad()) an->accumulate_grad(gy.data(), gy.size());
                                      if (bn->wants_grad()) bn->accumulate_grad(gy.data(), gy.size());
                                  });
}

template <typename T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
    check_same_shape(a, b, "sub");
    const auto av = a.data();
    const auto bv = b.data();
    std::vector<T> out(av.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
    auto an = a.node();
    auto bn = b.node();
    return detail::make_result<T>("sub", a.shape(), std::move(out), {a, b},
                                  [an, bn](const std::vector<T>& gy) {
                                      if (an->wants_grad()) an->accumulate_grad(gy.data(), gy.size());
                                      if (bn->wants_grad()) {
                                          std::vector<T> neg(gy.size());
                                          for (size_t i = 0; i < gy.size(); ++i) neg[i] = -gy[i];
                                          bn->accumulate_grad(neg.data(), neg.size());
                                      }
                                  });
}

template <typename T>
TensorT<T> elementwise_mul(const TensorT<T>& a, const TensorT<T>& b) {
    check_same_shape(a, b, "elementwise_mul");
    const auto av = a.data();
    const auto bv = b.data();
    std::vector<T> out(av.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    auto an = a.node();
    auto bn = b.node();
    return detail::make_result<T>(
        "elementwise_mul", a.shape(), std::move(out), {a, b},
        [an, bn](const std::vector<T>& gy) {
            if (an->wants_grad()) {
                std::vector<T> ga(gy.size());
                for (size_t i = 0; i < gy.size(); ++i) ga[i] = gy[i] * bn->data[i];
                an->accumulate_grad(ga.data(), ga.size());
            }
            if (bn->wants_grad()) {
                std::vector<T> gb(gy.size());
                for (size_t i = 0; i < gy.size(); ++i) gb[i] = gy[i] * an->data[i];
                bn->accumulate_grad(gb.data(), gb.size());
            }
        });
}

template <typename T>
TensorT<T> scalar_mul(const TensorT<T>& a, T factor) {
    const auto av = a.data();
    std::vector<T> out(av.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * factor;
    auto an = a.node();
    return detail::make_result<T>("scalar_mul", a.shape(), std::move(out), {a},
                                  [an, factor](const std::vector<T>& gy) {
                                      if (!an->wants_grad()) return;
                                      std::vector<T> ga(gy.size());
                                      for (size_t i = 0; i < gy.size(); ++i) ga[i] = gy[i] * factor;
                                      an->accumulate_grad(ga.data(), ga.size());
                                  });
}

template <typename T>
TensorT<T> sum(const TensorT<T>& x) {
    const auto xv = x.data();
    double acc = 0.0;
    for (T v : xv) acc += static_cast<double>(v);
    auto xn = x.node();
    return detail::make_result<T>("sum", {1}, {static_cast<T>(acc)}, {x},
                                  [xn](const std::vector<T>& gy) {
                                      if (!xn->wants_grad()) return;
                                      std::vector<T> gx(xn->data.size(), gy[0]);
                                      xn->accumulate_grad(gx.data(), gx.size());
                                  });
}

template <typename T>
TensorT<T> mean(const TensorT<T>& x) {
    const auto xv = x.data();
    double acc = 0.0;
    for (T v : xv) acc += static_cast<double>(v);
    const T inv = static_cast<T>(1.0 / static_cast<double>(xv.size()));
    auto xn = x.node();
    return detail::make_result<T>("mean", {1}, {static_cast<T>(acc / static_cast<double>(xv.size()))},
                                  {x}, [xn, inv](const std::vector<T>& gy) {
                                      if (!xn->wants_grad()) return;
                                      std::vector<T> gx(xn->data.size(), gy[0] * inv);
                                      xn->accumulate_grad(gx.data(), gx.size());
                                  });
}

namespace {

// Copies channels [c_begin, c_begin+c_count) of src (viewed with src_channels)
// into dst at dst channel offset, or the reverse when `scatter`.
template <typename T>
void copy_channel_block(const T* src, T* dst, int64_t batch, int64_t src_channels,
                        int64_t dst_channels, int64_t c_src, int64_t c_dst, int64_t c_count,
                        int64_t plane) {
    for (int64_t n = 0; n < batch; ++n) {
        const T* s = src + (n * src_channels + c_src) * plane;
        T* d = dst + (n * dst_channels + c_dst) * plane;
        std::copy(s, s + c_count * plane, d);
    }
}

}  // namespace

template <typename T>
TensorT<T> concat_channels(const std::vector<TensorT<T>>& parts) {
    DCA_CHECK(!parts.empty(), ShapeError, "concat_channels: need at least one part");
    const Shape& first = parts.front().shape();
    DCA_CHECK(first.size() == 4, ShapeError, "concat_channels: parts must be rank-4 NCHW");
    int64_t total_c = 0;
    for (const auto& part : parts) {
        const Shape& s = part.shape();
        DCA_CHECK(s.size() == 4 && s[0] == first[0] && s[2] == first[2] && s[3] == first[3],
                  ShapeError,
                  "concat_channels: batch/spatial dims must match, got " + shape_str(s) + " vs " +
                      shape_str(first));
        total_c += s[1];
    }
    const int64_t batch = first[0];
    const int64_t plane = first[2] * first[3];
    Shape out_shape{batch, total_c, first[2], first[3]};
    std::vector<T> out(static_cast<size_t>(shape_numel(out_shape)));
    int64_t c_off = 0;
    for (const auto& part : parts) {
        const int64_t c = part.shape()[1];
        copy_channel_block(part.data().data(), out.data(), batch, c, total_c, 0, c_off, c, plane);
        c_off += c;
    }

    std::vector<std::shared_ptr<detail::NodeT<T>>> nodes;
    nodes.reserve(parts.size());
    for (const auto& part : parts) nodes.push_back(part.node());
    return detail::make_result<T>(
        "concat_channels", out_shape, std::move(out), parts,
        [nodes, batch, total_c, plane](const std::vector<T>& gy) {
            int64_t off = 0;
            for (const auto& node : nodes) {
                const int64_t c = node->shape[1];
                if (node->wants_grad()) {
                    std::vector<T> gpart(node->data.size());
                    for (int64_t n = 0; n < batch; ++n) {
                        const T* s = gy.data() + (n * total_c + off) * plane;
                        std::copy(s, s + c * plane, gpart.data() + n * c * plane);
                    }
                    node->accumulate_grad(gpart.data(), gpart.size());
                }
                off += c;
            }
        });
}

template <typename T>
TensorT<T> slice_channels(const TensorT<T>& x, int64_t begin, int64_t count) {
    const Shape& s = x.shape();
    DCA_CHECK(s.size() == 4, ShapeError, "slice_channels: input must be rank-4 NCHW");
    DCA_CHECK(begin >= 0 && count >= 1 && begin + count <= s[1], ShapeError,
              "slice_channels: channel range [" + std::to_string(begin) + "," +
                  std::to_string(begin + count) + ") out of bounds for C=" + std::to_string(s[1]));
    const int64_t batch = s[0];
    const int64_t channels = s[1];
    const int64_t plane = s[2] * s[3];
    Shape out_shape{batch, count, s[2], s[3]};
    std::vector<T> out(static_cast<size_t>(shape_numel(out_shape)));
    copy_channel_block(x.data().data(), out.data(), batch, channels, count, begin, 0, count, plane);
    auto xn = x.node();
    return detail::make_result<T>(
        "slice_channels", out_shape, std::move(out), {x},
        [xn, begin, count, batch, channels, plane](const std::vector<T>& gy) {
            if (!xn->wants_grad()) return;
            std::vector<T> gx(xn->data.size(), T(0));
            for (int64_t n = 0; n < batch; ++n) {
                const T* src = gy.data() + n * count * plane;
                T* dst = gx.data() + (n * channels + begin) * plane;
                std::copy(src, src + count * plane, dst);
            }
            xn->accumulate_grad(gx.data(), gx.size());
        });
}

template <typename T>
void backward(const TensorT<T>& loss) {
    DCA_CHECK(loss.defined(), GraphError, "backward: undefined loss tensor");
    DCA_CHECK(loss.numel() == 1, GraphError,
              "backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    auto root = loss.node();
    if (!root->interior()) {
        DCA_CHECK(root->requires_grad, GraphError,
                  "backward: loss is not connected to a recorded graph");
        root->grad.assign(1, T(1));
        return;
    }

    // Reverse topological order via iterative post-order DFS; each node is
    // visited exactly once even when it feeds several consumers.
    std::vector<detail::NodeT<T>*> order;
    std::unordered_set<detail::NodeT<T>*> visited;
    struct StackItem {
        detail::NodeT<T>* node;
        size_t next_parent;
    };
    std::vector<StackItem> stack;
    stack.push_back({root.get(), 0});
    visited.insert(root.get());
    while (!stack.empty()) {
        StackItem& top = stack.back();
        if (top.next_parent < top.node->parents.size()) {
            detail::NodeT<T>* parent = top.node->parents[top.next_parent++].get();
            if (visited.insert(parent).second) stack.push_back({parent, 0});
        } else {
            order.push_back(top.node);
            stack.pop_back();
        }
    }

    root->grad.assign(1, T(1));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::NodeT<T>* node = *it;
        if (node->backward_fn && !node->grad.empty()) node->backward_fn(node->grad);
    }
    // The graph is per-forward-pass; release closures and edges now.
    for (detail::NodeT<T>* node : order) {
        node->backward_fn = nullptr;
        node->parents.clear();
    }
}

// --- explicit instantiations -------------------------------------------------

#define DCA_INSTANTIATE_TENSOR(T)                                                       \
    template class TensorT<T>;                                                          \
    template TensorT<T> add<T>(const TensorT<T>&, const TensorT<T>&);                   \
    template TensorT<T> sub<T>(const TensorT<T>&, const TensorT<T>&);                   \
    template TensorT<T> elementwise_mul<T>(const TensorT<T>&, const TensorT<T>&);       \
    template TensorT<T> scalar_mul<T>(const TensorT<T>&, T);                            \
    template TensorT<T> sum<T>(const TensorT<T>&);                                      \
    template TensorT<T> mean<T>(const TensorT<T>&);                                     \
    template TensorT<T> concat_channels<T>(const std::vector<TensorT<T>>&);             \
    template TensorT<T> slice_channels<T>(const TensorT<T>&, int64_t, int64_t);         \
    template void backward<T>(const TensorT<T>&);

DCA_INSTANTIATE_TENSOR(float)
DCA_INSTANTIATE_TENSOR(double)

#undef DCA_INSTANTIATE_TENSOR

}  // namespace dca
