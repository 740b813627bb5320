#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dca/tensor.hpp"

namespace dca {

// Compares the reverse-mode gradient of a scalar-valued function against
// central finite differences, coordinate by coordinate, and returns the worst
// relative error. Meant to run on the double instantiation of the op stack;
// 32-bit central differences are too noisy for tight tolerances.
//
// `max_coords` > 0 checks a random subset of coordinates (used for large
// composites where a full sweep is too expensive); <= 0 sweeps all of them.
template <typename T, typename F>
double finite_diff_check(F&& f, TensorT<T>& x, double eps = 1e-5, int64_t max_coords = -1,
                         uint64_t coord_seed = 0) {
    const bool had_requires_grad = x.requires_grad();
    x.set_requires_grad(true);
    x.clear_grad();

    TensorT<T> loss = f(x);
    DCA_CHECK(loss.numel() == 1, GraphError, "finite_diff_check: f must return a scalar");
    backward(loss);
    DCA_CHECK(x.has_grad(), GraphError, "finite_diff_check: x received no gradient");
    std::vector<double> analytic(x.grad().begin(), x.grad().end());

    std::vector<int64_t> coords;
    const int64_t n = x.numel();
    if (max_coords > 0 && max_coords < n) {
        std::mt19937_64 rng(coord_seed);
        std::uniform_int_distribution<int64_t> pick(0, n - 1);
        coords.reserve(static_cast<size_t>(max_coords));
        for (int64_t i = 0; i < max_coords; ++i) coords.push_back(pick(rng));
        std::sort(coords.begin(), coords.end());
        coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    } else {
        coords.resize(static_cast<size_t>(n));
        for (int64_t i = 0; i < n; ++i) coords[static_cast<size_t>(i)] = i;
    }

    double max_err = 0.0;
    {
        NoGradGuard no_grad;
        auto values = x.mutable_data();
        for (int64_t i : coords) {
            const T original = values[static_cast<size_t>(i)];
            values[static_cast<size_t>(i)] = original + static_cast<T>(eps);
            const double f_plus = static_cast<double>(f(x).item());
            values[static_cast<size_t>(i)] = original - static_cast<T>(eps);
            const double f_minus = static_cast<double>(f(x).item());
            values[static_cast<size_t>(i)] = original;

            const double numeric = (f_plus - f_minus) / (2.0 * eps);
            const double denom = std::max(1e-8, std::abs(analytic[static_cast<size_t>(i)]) +
                                                    std::abs(numeric));
            max_err = std::max(max_err, std::abs(analytic[static_cast<size_t>(i)] - numeric) / denom);
        }
    }

    x.set_requires_grad(had_requires_grad);
    return max_err;
}

}  // namespace dca
