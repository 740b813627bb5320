#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dca/tensor.hpp"

namespace dca {

// Pixels whose ground truth lies in (min_depth, max_depth]. Losses and
// metrics are restricted to it; a frame with no valid pixels is unusable.
struct ValidMask {
    Shape shape;  // [N,1,H,W]
    std::vector<uint8_t> mask;
    int64_t count = 0;

    static ValidMask all(const Shape& shape);

    template <typename T>
    static ValidMask from_gt(const TensorT<T>& gt, double min_depth, double max_depth);

    bool at(int64_t i) const { return mask[static_cast<size_t>(i)] != 0; }
};

// Eq-7 weighting plus the scale-invariant loss constants.
struct LossWeights {
    double lambda1 = 0.0;
    double lambda2 = 1.0;
    double lambda3 = 0.1;
    double alpha = 10.0;
    double lambda_si = 0.85;

    static LossWeights vari() { return {0.0, 1.0, 0.1, 10.0, 0.85}; }
    static LossWeights nyu() { return {1.0, 0.02, 0.1, 10.0, 0.85}; }
    void validate() const;
};

// Mean absolute error over valid pixels.
template <typename T>
TensorT<T> l1_loss(const TensorT<T>& pred, const TensorT<T>& gt, const ValidMask& mask);

// alpha * sqrt( (1/T) sum g^2 - (lambda/T^2) (sum g)^2 ), g = ln(pred) - ln(gt).
// The radicand is clamped at zero (it can round negative when g is
// near-constant); the gradient at the clamp is defined as zero.
template <typename T>
TensorT<T> si_loss(const TensorT<T>& pred, const TensorT<T>& gt, const ValidMask& mask,
                   double alpha, double lambda);

// Mean absolute difference of forward differences along H and W over pixel
// pairs whose both endpoints are valid; returns 0 when no pair contributes.
template <typename T>
TensorT<T> grad_loss(const TensorT<T>& pred, const TensorT<T>& gt, const ValidMask& mask);

template <typename T>
TensorT<T> total_loss(const TensorT<T>& pred, const TensorT<T>& gt, const ValidMask& mask,
                      const LossWeights& w);

struct MetricsReport {
    double delta1 = 0, delta2 = 0, delta3 = 0;
    double absrel = 0, rmse = 0, log10 = 0;
    int64_t valid_count = 0;

    static constexpr const char* kCsvHeader = "delta1,delta2,delta3,absrel,rmse,log10,valid_count";
    std::string csv_line() const;
};

// The six standard metrics. Predictions are clamped to
// [min_depth, max_depth] before evaluation.
template <typename T>
MetricsReport compute_metrics(const TensorT<T>& pred, const TensorT<T>& gt, const ValidMask& mask,
                              double max_depth = 10.0, double min_depth = kMinDepth);

// Mean pairwise relative difference between depth maps of the same viewpoint
// under different illuminations: |d_a - d_b| / ((d_a + d_b)/2), averaged over
// pixels, then over unordered pairs.
template <typename T>
struct ConsistencyReportT {
    struct PairDiff {
        int a = 0, b = 0;
        TensorT<T> map;      // per-pixel relative difference
        double mean = 0.0;
    };
    double score = 0.0;
    std::vector<PairDiff> pairs;
};

using ConsistencyReport = ConsistencyReportT<float>;

template <typename T>
ConsistencyReportT<T> consistency_score(const std::vector<TensorT<T>>& preds);

}  // namespace dca
