#include "dca/nn_ops.hpp"

#include <Eigen/Core>
#include <cmath>

namespace dca {

std::pair<int64_t, int64_t> conv2d_output_hw(int64_t h, int64_t w, int64_t kernel, int64_t stride,
                                             int64_t dilation, int64_t padding) {
    const int64_t span = dilation * (kernel - 1) + 1;
    const int64_t ho = (h + 2 * padding - span) / stride + 1;
    const int64_t wo = (w + 2 * padding - span) / stride + 1;
    DCA_CHECK(h + 2 * padding >= span && w + 2 * padding >= span && ho >= 1 && wo >= 1, ShapeError,
              "conv2d: kernel span " + std::to_string(span) + " exceeds padded input " +
                  std::to_string(h) + "x" + std::to_string(w));
    return {ho, wo};
}

namespace {

template <typename T>
using MatrixRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ConvDims {
    int64_t n, c_in, h, w;
    int64_t c_out, c_group, k;
    int64_t stride, dilation, padding, groups;
    int64_t ho, wo;
    int64_t group_out() const { return c_out / groups; }
    int64_t col_rows() const { return c_in * k * k; }
};

template <typename T>
ConvDims conv_dims(const TensorT<T>& input, const Conv2dParamsT<T>& p) {
    DCA_CHECK(input.defined() && input.rank() == 4, ShapeError, "conv2d: input must be NCHW");
    DCA_CHECK(p.weight.defined() && p.weight.rank() == 4, ShapeError,
              "conv2d: weight must be [C_out, C_in/groups, k, k]");
    DCA_CHECK(p.weight.dim(2) == p.weight.dim(3), ShapeError, "conv2d: kernel must be square");
    DCA_CHECK(p.stride >= 1 && p.dilation >= 1 && p.padding >= 0 && p.groups >= 1, ShapeError,
              "conv2d: bad stride/dilation/padding/groups");

    ConvDims d;
    d.n = input.dim(0);
    d.c_in = input.dim(1);
    d.h = input.dim(2);
    d.w = input.dim(3);
    d.c_out = p.weight.dim(0);
    d.c_group = p.weight.dim(1);
    d.k = p.weight.dim(2);
    d.stride = p.stride;
    d.dilation = p.dilation;
    d.padding = p.padding;
    d.groups = p.groups;
    DCA_CHECK(d.c_in % d.groups == 0 && d.c_out % d.groups == 0, ShapeError,
              "conv2d: channels not divisible by groups");
    DCA_CHECK(d.c_group == d.c_in / d.groups, ShapeError,
              "conv2d: weight C_in/groups mismatch, expected " +
                  std::to_string(d.c_in / d.groups) + " got " + std::to_string(d.c_group));
    if (p.bias.defined())
        DCA_CHECK(p.bias.rank() == 1 && p.bias.dim(0) == d.c_out, ShapeError,
                  "conv2d: bias must be [C_out]");
    std::tie(d.ho, d.wo) = conv2d_output_hw(d.h, d.w, d.k, d.stride, d.dilation, d.padding);
    return d;
}

// Unrolls one batch element into [C_in*k*k, Ho*Wo].
template <typename T>
void im2col(const T* x, const ConvDims& d, T* col) {
    const int64_t plane = d.ho * d.wo;
    for (int64_t c = 0; c < d.c_in; ++c) {
        const T* xc = x + c * d.h * d.w;
        for (int64_t ki = 0; ki < d.k; ++ki) {
            for (int64_t kj = 0; kj < d.k; ++kj) {
                T* row = col + ((c * d.k + ki) * d.k + kj) * plane;
                for (int64_t oh = 0; oh < d.ho; ++oh) {
                    const int64_t ih = oh * d.stride - d.padding + ki * d.dilation;
                    T* out = row + oh * d.wo;
                    if (ih < 0 || ih >= d.h) {
                        std::fill(out, out + d.wo, T(0));
                        continue;
                    }
                    const T* xrow = xc + ih * d.w;
                    for (int64_t ow = 0; ow < d.wo; ++ow) {
                        const int64_t iw = ow * d.stride - d.padding + kj * d.dilation;
                        out[ow] = (iw >= 0 && iw < d.w) ? xrow[iw] : T(0);
                    }
                }
            }
        }
    }
}

// Scatter-adds a column buffer back onto one batch element of the input grad.
template <typename T>
void col2im_add(const T* col, const ConvDims& d, T* gx) {
    const int64_t plane = d.ho * d.wo;
    for (int64_t c = 0; c < d.c_in; ++c) {
        T* gc = gx + c * d.h * d.w;
        for (int64_t ki = 0; ki < d.k; ++ki) {
            for (int64_t kj = 0; kj < d.k; ++kj) {
                const T* row = col + ((c * d.k + ki) * d.k + kj) * plane;
                for (int64_t oh = 0; oh < d.ho; ++oh) {
                    const int64_t ih = oh * d.stride - d.padding + ki * d.dilation;
                    if (ih < 0 || ih >= d.h) continue;
                    T* grow = gc + ih * d.w;
                    const T* in = row + oh * d.wo;
                    for (int64_t ow = 0; ow < d.wo; ++ow) {
                        const int64_t iw = ow * d.stride - d.padding + kj * d.dilation;
                        if (iw >= 0 && iw < d.w) grow[iw] += in[ow];
                    }
                }
            }
        }
    }
}

template <typename T>
bool is_depthwise(const ConvDims& d) {
    return d.groups == d.c_in && d.c_out == d.c_in && d.c_group == 1;
}

// Direct path for depthwise kernels; the im2col route degenerates to
// per-channel vector products and is slower there.
template <typename T>
void depthwise_forward(const T* x, const T* w, const ConvDims& d, T* y) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t n = 0; n < d.n; ++n) {
        for (int64_t c = 0; c < d.c_in; ++c) {
            const T* xc = x + (n * d.c_in + c) * d.h * d.w;
            const T* wc = w + c * d.k * d.k;
            T* yc = y + (n * d.c_out + c) * d.ho * d.wo;
            for (int64_t oh = 0; oh < d.ho; ++oh) {
                for (int64_t ow = 0; ow < d.wo; ++ow) {
                    T acc = 0;
                    for (int64_t ki = 0; ki < d.k; ++ki) {
                        const int64_t ih = oh * d.stride - d.padding + ki * d.dilation;
                        if (ih < 0 || ih >= d.h) continue;
                        for (int64_t kj = 0; kj < d.k; ++kj) {
                            const int64_t iw = ow * d.stride - d.padding + kj * d.dilation;
                            if (iw < 0 || iw >= d.w) continue;
                            acc += xc[ih * d.w + iw] * wc[ki * d.k + kj];
                        }
                    }
                    yc[oh * d.wo + ow] = acc;
                }
            }
        }
    }
}

template <typename T>
void depthwise_backward(const T* x, const T* w, const T* gy, const ConvDims& d, T* gx, T* gw) {
    // gx and gw may independently be null when that grad is not needed.
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t n = 0; n < d.n; ++n) {
        for (int64_t c = 0; c < d.c_in; ++c) {
            const T* xc = x + (n * d.c_in + c) * d.h * d.w;
            const T* wc = w + c * d.k * d.k;
            const T* gyc = gy + (n * d.c_out + c) * d.ho * d.wo;
            T* gxc = gx ? gx + (n * d.c_in + c) * d.h * d.w : nullptr;
            // per-(n,c) weight grad slot; reduced serially below
            T* gwc = gw ? gw + (n * d.c_in + c) * d.k * d.k : nullptr;
            for (int64_t oh = 0; oh < d.ho; ++oh) {
                for (int64_t ow = 0; ow < d.wo; ++ow) {
                    const T g = gyc[oh * d.wo + ow];
                    for (int64_t ki = 0; ki < d.k; ++ki) {
                        const int64_t ih = oh * d.stride - d.padding + ki * d.dilation;
                        if (ih < 0 || ih >= d.h) continue;
                        for (int64_t kj = 0; kj < d.k; ++kj) {
                            const int64_t iw = ow * d.stride - d.padding + kj * d.dilation;
                            if (iw < 0 || iw >= d.w) continue;
                            if (gxc) gxc[ih * d.w + iw] += g * wc[ki * d.k + kj];
                            if (gwc) gwc[ki * d.k + kj] += g * xc[ih * d.w + iw];
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void conv_forward_im2col(const T* x, const T* w, const ConvDims& d, T* y) {
    const int64_t plane = d.ho * d.wo;
    const int64_t group_rows = d.c_group * d.k * d.k;
#pragma omp parallel
    {
        std::vector<T> col(static_cast<size_t>(d.col_rows() * plane));
#pragma omp for schedule(static)
        for (int64_t n = 0; n < d.n; ++n) {
            im2col(x + n * d.c_in * d.h * d.w, d, col.data());
            for (int64_t g = 0; g < d.groups; ++g) {
                Eigen::Map<const MatrixRM<T>> wmap(w + g * d.group_out() * group_rows,
                                                   d.group_out(), group_rows);
                Eigen::Map<const MatrixRM<T>> cmap(col.data() + g * group_rows * plane, group_rows,
                                                   plane);
                Eigen::Map<MatrixRM<T>> ymap(y + (n * d.c_out + g * d.group_out()) * plane,
                                             d.group_out(), plane);
                ymap.noalias() = wmap * cmap;
            }
        }
    }
}

}  // namespace

template <typename T>
TensorT<T> conv2d(const TensorT<T>& input, const Conv2dParamsT<T>& p) {
    const ConvDims d = conv_dims(input, p);
    const int64_t plane = d.ho * d.wo;
    Shape out_shape{d.n, d.c_out, d.ho, d.wo};
    std::vector<T> out(static_cast<size_t>(shape_numel(out_shape)));

    if (is_depthwise<T>(d)) {
        depthwise_forward(input.data().data(), p.weight.data().data(), d, out.data());
    } else {
        conv_forward_im2col(input.data().data(), p.weight.data().data(), d, out.data());
    }
    if (p.bias.defined()) {
        const auto b = p.bias.data();
        for (int64_t n = 0; n < d.n; ++n)
            for (int64_t c = 0; c < d.c_out; ++c) {
                T* dst = out.data() + (n * d.c_out + c) * plane;
                for (int64_t i = 0; i < plane; ++i) dst[i] += b[c];
            }
    }

    auto xn = input.node();
    auto wn = p.weight.node();
    auto bn = p.bias.defined() ? p.bias.node() : nullptr;
    std::vector<TensorT<T>> inputs{input, p.weight};
    if (p.bias.defined()) inputs.push_back(p.bias);

    auto backward_fn = [xn, wn, bn, d](const std::vector<T>& gy) {
        const int64_t plane = d.ho * d.wo;
        const bool need_gx = xn->wants_grad();
        const bool need_gw = wn->wants_grad();
        std::vector<T> gx(need_gx ? xn->data.size() : 0, T(0));
        std::vector<T> gw(need_gw ? wn->data.size() : 0, T(0));

        if (need_gx || need_gw) {
            if (is_depthwise<T>(d)) {
                std::vector<T> gw_per_n(need_gw ? static_cast<size_t>(d.n) * wn->data.size() : 0,
                                        T(0));
                depthwise_backward(xn->data.data(), wn->data.data(), gy.data(), d,
                                   need_gx ? gx.data() : nullptr,
                                   need_gw ? gw_per_n.data() : nullptr);
                if (need_gw) {
                    for (int64_t n = 0; n < d.n; ++n)
                        for (size_t i = 0; i < gw.size(); ++i)
                            gw[i] += gw_per_n[static_cast<size_t>(n) * gw.size() + i];
                }
            } else {
                const int64_t group_rows = d.c_group * d.k * d.k;
                std::vector<T> gw_per_n(need_gw ? static_cast<size_t>(d.n) * wn->data.size() : 0,
                                        T(0));
#pragma omp parallel
                {
                    std::vector<T> col(static_cast<size_t>(d.col_rows() * plane));
                    std::vector<T> gcol(need_gx ? static_cast<size_t>(d.col_rows() * plane) : 0);
#pragma omp for schedule(static)
                    for (int64_t n = 0; n < d.n; ++n) {
                        im2col(xn->data.data() + n * d.c_in * d.h * d.w, d, col.data());
                        for (int64_t g = 0; g < d.groups; ++g) {
                            Eigen::Map<const MatrixRM<T>> wmap(
                                wn->data.data() + g * d.group_out() * group_rows, d.group_out(),
                                group_rows);
                            Eigen::Map<const MatrixRM<T>> gymap(
                                gy.data() + (n * d.c_out + g * d.group_out()) * plane,
                                d.group_out(), plane);
                            Eigen::Map<const MatrixRM<T>> cmap(col.data() + g * group_rows * plane,
                                                               group_rows, plane);
                            if (need_gx) {
                                Eigen::Map<MatrixRM<T>> gcmap(
                                    gcol.data() + g * group_rows * plane, group_rows, plane);
                                gcmap.noalias() = wmap.transpose() * gymap;
                            }
                            if (need_gw) {
                                Eigen::Map<MatrixRM<T>> gwmap(
                                    gw_per_n.data() + n * static_cast<int64_t>(wn->data.size()) +
                                        g * d.group_out() * group_rows,
                                    d.group_out(), group_rows);
                                gwmap.noalias() = gymap * cmap.transpose();
                            }
                        }
                        if (need_gx) col2im_add(gcol.data(), d, gx.data() + n * d.c_in * d.h * d.w);
                    }
                }
                if (need_gw) {
                    // fixed n-order reduction keeps results run-to-run identical
                    for (int64_t n = 0; n < d.n; ++n)
                        for (size_t i = 0; i < gw.size(); ++i)
                            gw[i] += gw_per_n[static_cast<size_t>(n) * gw.size() + i];
                }
            }
        }

        if (need_gx) xn->accumulate_grad(gx.data(), gx.size());
        if (need_gw) wn->accumulate_grad(gw.data(), gw.size());
        if (bn && bn->wants_grad()) {
            std::vector<T> gb(static_cast<size_t>(d.c_out), T(0));
            for (int64_t n = 0; n < d.n; ++n)
                for (int64_t c = 0; c < d.c_out; ++c) {
                    const T* src = gy.data() + (n * d.c_out + c) * plane;
                    double acc = 0.0;
                    for (int64_t i = 0; i < plane; ++i) acc += static_cast<double>(src[i]);
                    gb[static_cast<size_t>(c)] += static_cast<T>(acc);
                }
            bn->accumulate_grad(gb.data(), gb.size());
        }
    };

    return detail::make_result<T>("conv2d", std::move(out_shape), std::move(out), inputs,
                                  std::move(backward_fn));
}

template <typename T>
TensorT<T> gelu(const TensorT<T>& x) {
    const auto xv = x.data();
    std::vector<T> out(xv.size());
    for (size_t i = 0; i < out.size(); ++i) {
        const T cdf = T(0.5) * (T(1) + std::erf(xv[i] * static_cast<T>(M_SQRT1_2)));
        out[i] = xv[i] * cdf;
    }
    auto xn = x.node();
    return detail::make_result<T>(
        "gelu", x.shape(), std::move(out), {x}, [xn](const std::vector<T>& gy) {
            if (!xn->wants_grad()) return;
            const T inv_sqrt_2pi = static_cast<T>(0.3989422804014326779);
            std::vector<T> gx(gy.size());
            for (size_t i = 0; i < gy.size(); ++i) {
                const T v = xn->data[i];
                const T cdf = T(0.5) * (T(1) + std::erf(v * static_cast<T>(M_SQRT1_2)));
                const T pdf = inv_sqrt_2pi * std::exp(T(-0.5) * v * v);
                gx[i] = gy[i] * (cdf + v * pdf);
            }
            xn->accumulate_grad(gx.data(), gx.size());
        });
}

template <typename T>
TensorT<T> sigmoid(const TensorT<T>& x) {
    const auto xv = x.data();
    std::vector<T> out(xv.size());
    for (size_t i = 0; i < out.size(); ++i) {
        const T v = xv[i];
        if (v >= T(0)) {
            out[i] = T(1) / (T(1) + std::exp(-v));
        } else {
            const T e = std::exp(v);
            out[i] = e / (T(1) + e);
        }
    }
    auto xn = x.node();
    std::vector<T> saved = out;
    return detail::make_result<T>("sigmoid", x.shape(), std::move(out), {x},
                                  [xn, saved = std::move(saved)](const std::vector<T>& gy) {
                                      if (!xn->wants_grad()) return;
                                      std::vector<T> gx(gy.size());
                                      for (size_t i = 0; i < gy.size(); ++i)
                                          gx[i] = gy[i] * saved[i] * (T(1) - saved[i]);
                                      xn->accumulate_grad(gx.data(), gx.size());
                                  });
}

template <typename T>
TensorT<T> batch_norm(const TensorT<T>& x, BatchNormParamsT<T>& p) {
    DCA_CHECK(x.defined() && x.rank() == 4, ShapeError, "batch_norm: input must be NCHW");
    const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    DCA_CHECK(c == p.channels(), ShapeError,
              "batch_norm: C=" + std::to_string(c) + " does not match parameter length " +
                  std::to_string(p.channels()));
    const int64_t plane = h * w;
    const int64_t per_channel = n * plane;
    const auto xv = x.data();
    const auto gamma = p.gamma.data();
    const auto beta = p.beta.data();

    std::vector<T> mean_c(static_cast<size_t>(c)), invstd_c(static_cast<size_t>(c));
    const bool training = p.mode == BatchNormMode::training;
    if (training) {
        DCA_CHECK(per_channel >= 2, ShapeError,
                  "batch_norm: training mode needs at least 2 values per channel");
        auto rm = p.running_mean.mutable_data();
        auto rv = p.running_var.mutable_data();
        for (int64_t ci = 0; ci < c; ++ci) {
            double s = 0.0, s2 = 0.0;
            for (int64_t bi = 0; bi < n; ++bi) {
                const T* src = xv.data() + (bi * c + ci) * plane;
                for (int64_t i = 0; i < plane; ++i) {
                    s += static_cast<double>(src[i]);
                    s2 += static_cast<double>(src[i]) * static_cast<double>(src[i]);
                }
            }
            const double mu = s / static_cast<double>(per_channel);
            const double var = std::max(0.0, s2 / static_cast<double>(per_channel) - mu * mu);
            mean_c[ci] = static_cast<T>(mu);
            invstd_c[ci] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(p.eps)));
            rm[ci] = (T(1) - p.momentum) * rm[ci] + p.momentum * static_cast<T>(mu);
            rv[ci] = (T(1) - p.momentum) * rv[ci] + p.momentum * static_cast<T>(var);
        }
    } else {
        const auto rm = p.running_mean.data();
        const auto rv = p.running_var.data();
        for (int64_t ci = 0; ci < c; ++ci) {
            mean_c[ci] = rm[ci];
            invstd_c[ci] = static_cast<T>(
                1.0 / std::sqrt(static_cast<double>(rv[ci]) + static_cast<double>(p.eps)));
        }
    }

    std::vector<T> out(xv.size());
    for (int64_t bi = 0; bi < n; ++bi)
        for (int64_t ci = 0; ci < c; ++ci) {
            const T* src = xv.data() + (bi * c + ci) * plane;
            T* dst = out.data() + (bi * c + ci) * plane;
            const T mu = mean_c[ci], is = invstd_c[ci], g = gamma[ci], b = beta[ci];
            for (int64_t i = 0; i < plane; ++i) dst[i] = (src[i] - mu) * is * g + b;
        }

    auto xn = x.node();
    auto gn = p.gamma.node();
    auto bn = p.beta.node();
    auto backward_fn = [xn, gn, bn, mean_c, invstd_c, n, c, plane, training,
                        per_channel](const std::vector<T>& gy) {
        const bool need_gx = xn->wants_grad();
        std::vector<T> gx(need_gx ? xn->data.size() : 0);
        std::vector<T> ggamma(static_cast<size_t>(c), T(0));
        std::vector<T> gbeta(static_cast<size_t>(c), T(0));
        for (int64_t ci = 0; ci < c; ++ci) {
            const T mu = mean_c[ci], is = invstd_c[ci];
            double sum_gy = 0.0, sum_gy_xhat = 0.0;
            for (int64_t bi = 0; bi < n; ++bi) {
                const T* gsrc = gy.data() + (bi * c + ci) * plane;
                const T* xsrc = xn->data.data() + (bi * c + ci) * plane;
                for (int64_t i = 0; i < plane; ++i) {
                    const double xhat = static_cast<double>((xsrc[i] - mu) * is);
                    sum_gy += static_cast<double>(gsrc[i]);
                    sum_gy_xhat += static_cast<double>(gsrc[i]) * xhat;
                }
            }
            ggamma[ci] = static_cast<T>(sum_gy_xhat);
            gbeta[ci] = static_cast<T>(sum_gy);
            if (!need_gx) continue;
            const T g = gn->data[ci];
            if (training) {
                const T mean_gy = static_cast<T>(sum_gy / static_cast<double>(per_channel));
                const T mean_gy_xhat =
                    static_cast<T>(sum_gy_xhat / static_cast<double>(per_channel));
                for (int64_t bi = 0; bi < n; ++bi) {
                    const T* gsrc = gy.data() + (bi * c + ci) * plane;
                    const T* xsrc = xn->data.data() + (bi * c + ci) * plane;
                    T* gdst = gx.data() + (bi * c + ci) * plane;
                    for (int64_t i = 0; i < plane; ++i) {
                        const T xhat = (xsrc[i] - mu) * is;
                        gdst[i] = g * is * (gsrc[i] - mean_gy - xhat * mean_gy_xhat);
                    }
                }
            } else {
                for (int64_t bi = 0; bi < n; ++bi) {
                    const T* gsrc = gy.data() + (bi * c + ci) * plane;
                    T* gdst = gx.data() + (bi * c + ci) * plane;
                    for (int64_t i = 0; i < plane; ++i) gdst[i] = g * is * gsrc[i];
                }
            }
        }
        if (need_gx) xn->accumulate_grad(gx.data(), gx.size());
        if (gn->wants_grad()) gn->accumulate_grad(ggamma.data(), ggamma.size());
        if (bn->wants_grad()) bn->accumulate_grad(gbeta.data(), gbeta.size());
    };

    return detail::make_result<T>("batch_norm", x.shape(), std::move(out),
                                  {x, p.gamma, p.beta}, std::move(backward_fn));
}

namespace {

// Per-axis source indices and blend weights for x2 half-pixel upsampling.
struct UpsampleAxis {
    std::vector<int64_t> lo, hi;
    std::vector<double> w_hi;
};

UpsampleAxis upsample_axis(int64_t in_extent) {
    UpsampleAxis axis;
    const int64_t out_extent = in_extent * 2;
    axis.lo.resize(out_extent);
    axis.hi.resize(out_extent);
    axis.w_hi.resize(out_extent);
    for (int64_t o = 0; o < out_extent; ++o) {
        const double s = (static_cast<double>(o) + 0.5) / 2.0 - 0.5;
        double floor_s = std::floor(s);
        double frac = s - floor_s;
        int64_t i0 = static_cast<int64_t>(floor_s);
        int64_t i1 = i0 + 1;
        if (i0 < 0) i0 = 0;
        if (i1 > in_extent - 1) i1 = in_extent - 1;
        if (i0 > in_extent - 1) i0 = in_extent - 1;
        axis.lo[o] = i0;
        axis.hi[o] = i1;
        axis.w_hi[o] = frac;
    }
    return axis;
}

}  // namespace

template <typename T>
TensorT<T> upsample_bilinear_x2(const TensorT<T>& x) {
    DCA_CHECK(x.defined() && x.rank() == 4, ShapeError, "upsample: input must be NCHW");
    const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const UpsampleAxis ay = upsample_axis(h);
    const UpsampleAxis ax = upsample_axis(w);
    Shape out_shape{n, c, 2 * h, 2 * w};
    std::vector<T> out(static_cast<size_t>(shape_numel(out_shape)));
    const auto xv = x.data();
    for (int64_t nc = 0; nc < n * c; ++nc) {
        const T* src = xv.data() + nc * h * w;
        T* dst = out.data() + nc * 4 * h * w;
        for (int64_t oy = 0; oy < 2 * h; ++oy) {
            const int64_t y0 = ay.lo[oy], y1 = ay.hi[oy];
            const T wy1 = static_cast<T>(ay.w_hi[oy]), wy0 = T(1) - wy1;
            for (int64_t ox = 0; ox < 2 * w; ++ox) {
                const int64_t x0 = ax.lo[ox], x1 = ax.hi[ox];
                const T wx1 = static_cast<T>(ax.w_hi[ox]), wx0 = T(1) - wx1;
                dst[oy * 2 * w + ox] = wy0 * (wx0 * src[y0 * w + x0] + wx1 * src[y0 * w + x1]) +
                                       wy1 * (wx0 * src[y1 * w + x0] + wx1 * src[y1 * w + x1]);
            }
        }
    }
    auto xn = x.node();
    return detail::make_result<T>(
        "upsample_bilinear_x2", std::move(out_shape), std::move(out), {x},
        [xn, ay, ax, n, c, h, w](const std::vector<T>& gy) {
            if (!xn->wants_grad()) return;
            std::vector<T> gx(xn->data.size(), T(0));
            for (int64_t nc = 0; nc < n * c; ++nc) {
                const T* src = gy.data() + nc * 4 * h * w;
                T* dst = gx.data() + nc * h * w;
                for (int64_t oy = 0; oy < 2 * h; ++oy) {
                    const int64_t y0 = ay.lo[oy], y1 = ay.hi[oy];
                    const T wy1 = static_cast<T>(ay.w_hi[oy]), wy0 = T(1) - wy1;
                    for (int64_t ox = 0; ox < 2 * w; ++ox) {
                        const int64_t x0 = ax.lo[ox], x1 = ax.hi[ox];
                        const T wx1 = static_cast<T>(ax.w_hi[ox]), wx0 = T(1) - wx1;
                        const T g = src[oy * 2 * w + ox];
                        dst[y0 * w + x0] += wy0 * wx0 * g;
                        dst[y0 * w + x1] += wy0 * wx1 * g;
                        dst[y1 * w + x0] += wy1 * wx0 * g;
                        dst[y1 * w + x1] += wy1 * wx1 * g;
                    }
                }
            }
            xn->accumulate_grad(gx.data(), gx.size());
        });
}

namespace {

template <typename T>
std::vector<T> flip_w(const T* src, int64_t planes, int64_t w) {
    std::vector<T> out(static_cast<size_t>(planes * w));
    for (int64_t p = 0; p < planes; ++p) {
        const T* s = src + p * w;
        T* d = out.data() + p * w;
        for (int64_t i = 0; i < w; ++i) d[i] = s[w - 1 - i];
    }
    return out;
}

}  // namespace

template <typename T>
TensorT<T> horizontal_flip(const TensorT<T>& x) {
    DCA_CHECK(x.defined() && x.rank() == 4, ShapeError, "horizontal_flip: input must be NCHW");
    const int64_t w = x.dim(3);
    const int64_t planes = x.numel() / w;
    std::vector<T> out = flip_w(x.data().data(), planes, w);
    auto xn = x.node();
    return detail::make_result<T>("horizontal_flip", x.shape(), std::move(out), {x},
                                  [xn, planes, w](const std::vector<T>& gy) {
                                      if (!xn->wants_grad()) return;
                                      std::vector<T> gx = flip_w(gy.data(), planes, w);
                                      xn->accumulate_grad(gx.data(), gx.size());
                                  });
}

#define DCA_INSTANTIATE_NN(T)                                                   \
    template TensorT<T> conv2d<T>(const TensorT<T>&, const Conv2dParamsT<T>&);  \
    template TensorT<T> gelu<T>(const TensorT<T>&);                             \
    template TensorT<T> sigmoid<T>(const TensorT<T>&);                          \
    template TensorT<T> batch_norm<T>(const TensorT<T>&, BatchNormParamsT<T>&); \
    template TensorT<T> upsample_bilinear_x2<T>(const TensorT<T>&);             \
    template TensorT<T> horizontal_flip<T>(const TensorT<T>&);

DCA_INSTANTIATE_NN(float)
DCA_INSTANTIATE_NN(double)

#undef DCA_INSTANTIATE_NN

}  // namespace dca
