#pragma once

// Test-side oracles, independent of the library's implementation paths.

#include <random>
#include <vector>

#include "dca/nn_ops.hpp"

namespace oracle {

template <typename T>
dca::TensorT<T> random_tensor(const dca::Shape& shape, uint64_t seed, T lo = T(-1), T hi = T(1)) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(static_cast<double>(lo), static_cast<double>(hi));
    std::vector<T> vals(static_cast<size_t>(dca::shape_numel(shape)));
    for (auto& v : vals) v = static_cast<T>(dist(rng));
    return dca::TensorT<T>::from_values(shape, std::move(vals));
}

// Brute-force sliding-window cross-correlation with zero padding.
template <typename T>
std::vector<T> conv2d_reference(const dca::TensorT<T>& x, const dca::Conv2dParamsT<T>& p,
                                int64_t ho, int64_t wo) {
    const int64_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int64_t cout = p.weight.dim(0), cg = p.weight.dim(1), k = p.weight.dim(2);
    const int64_t cin_g = cin / p.groups;
    const int64_t cout_g = cout / p.groups;
    std::vector<T> out(static_cast<size_t>(n * cout * ho * wo), T(0));
    auto xv = x.data();
    auto wv = p.weight.data();
    for (int64_t ni = 0; ni < n; ++ni)
        for (int64_t co = 0; co < cout; ++co) {
            const int64_t g = co / cout_g;
            for (int64_t oh = 0; oh < ho; ++oh)
                for (int64_t ow = 0; ow < wo; ++ow) {
                    double acc = p.bias.defined() ? static_cast<double>(p.bias.data()[co]) : 0.0;
                    for (int64_t ci = 0; ci < cg; ++ci)
                        for (int64_t ki = 0; ki < k; ++ki)
                            for (int64_t kj = 0; kj < k; ++kj) {
                                const int64_t ih = oh * p.stride - p.padding + ki * p.dilation;
                                const int64_t iw = ow * p.stride - p.padding + kj * p.dilation;
                                if (ih < 0 || ih >= h || iw < 0 || iw >= w) continue;
                                const int64_t xi = ((ni * cin + g * cin_g + ci) * h + ih) * w + iw;
                                const int64_t wi = ((co * cg + ci) * k + ki) * k + kj;
                                acc += static_cast<double>(xv[xi]) * static_cast<double>(wv[wi]);
                            }
                    out[((ni * cout + co) * ho + oh) * wo + ow] = static_cast<T>(acc);
                }
        }
    return out;
}

}  // namespace oracle
