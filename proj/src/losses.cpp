#include "dca/losses.hpp"

#include <cmath>
#include <sstream>

namespace dca {

ValidMask ValidMask::all(const Shape& shape) {
    ValidMask m;
    m.shape = shape;
    m.mask.assign(static_cast<size_t>(shape_numel(shape)), 1);
    m.count = shape_numel(shape);
    return m;
}

template <typename T>
ValidMask ValidMask::from_gt(const TensorT<T>& gt, double min_depth, double max_depth) {
    ValidMask m;
    m.shape = gt.shape();
    m.mask.resize(static_cast<size_t>(gt.numel()));
    for (int64_t i = 0; i < gt.numel(); ++i) {
        const double v = static_cast<double>(gt.data()[i]);
        const bool valid = v > min_depth && v <= max_depth;
        m.mask[static_cast<size_t>(i)] = valid ? 1 : 0;
        if (valid) ++m.count;
    }
    return m;
}

template ValidMask ValidMask::from_gt<float>(const TensorT<float>&, double, double);
template ValidMask ValidMask::from_gt<double>(const TensorT<double>&, double, double);

void LossWeights::validate() const {
    DCA_CHECK(alpha > 0, ConfigError, "loss weights: alpha must be positive");
    DCA_CHECK(lambda_si >= 0 && lambda_si <= 1, ConfigError, "loss weights: lambda in [0,1]");
    DCA_CHECK(lambda1 >= 0 && lambda2 >= 0 && lambda3 >= 0, ConfigError,
              "loss weights: lambda_i must be non-negative");
}

namespace {

template <typename T>
void check_loss_inputs(const TensorT<T>& pred, const TensorT<T>& gt, const ValidMask& mask,
                       const char* op) {
    DCA_CHECK(pred.defined() && gt.defined(), ShapeError, std::string(op) + ": undefined input");
    DCA_CHECK(pred.shape() == gt.shape(), ShapeError,
              std::string(op) + ": pred/gt shape mismatch, " + shape_str(pred.shape()) + " vs " +
                  shape_str(gt.shape()));
    DCA_CHECK(mask.shape == pred.shape(), ShapeError,
              std::string(op) + ": mask shape mismatch");
}

template <typename T>
T sign_of(T v) {
    if (v > T(0)) return T(1);
    if (v < T(0)) return T(-1);
    return T(0);
}

}  // namespace

template <typename T>
TensorT<T> l1_loss(const TensorT<T>& pred, const TensorT<T>& gt, const ValidMask& mask) {
    check_loss_inputs(pred, gt, mask, "l1_loss");
    DCA_CHECK(mask.count >= 1, NumericalError, "l1_loss: no valid pixels");
    const auto pv = pred.data();
    const auto gv = gt.data();
    double acc = 0.0;
    for (int64_t i = 0; i < pred.numel(); ++i)
        if (mask.at(i)) acc += std::abs(static_cast<double>(pv[i]) - static_cast<double>(gv[i]));
    const double value = acc / static_cast<double>(mask.count);

    auto pn = pred.node();
    auto gn = gt.node();
    const T inv_count = static_cast<T>(1.0 / static_cast<double>(mask.count));
    return detail::make_result<T>(
        "l1_loss", {1}, {static_cast<T>(value)}, {pred},
        [pn, gn, mask, inv_count](const std::vector<T>& gy) {
            if (!pn->wants_grad()) return;
            std::vector<T> gp(pn->data.size(), T(0));
            for (size_t i = 0; i < gp.size(); ++i)
                if (mask.mask[i])
                    gp[i] = gy[0] * inv_count * sign_of(pn->data[i] - gn->data[i]);
            pn->accumulate_grad(gp.data(), gp.size());
        });
}

template <typename T>
TensorT<T> si_loss(const TensorT<T>& pred, const TensorT<T>& gt, const ValidMask& mask,
                   double alpha, double lambda) {
    check_loss_inputs(pred, gt, mask, "si_loss");
    DCA_CHECK(mask.count >= 1, NumericalError, "si_loss: no valid pixels");
    const auto pv = pred.data();
    const auto gv = gt.data();
    const double t_count = static_cast<double>(mask.count);
    double s1 = 0.0, s2 = 0.0;
    for (int64_t i = 0; i < pred.numel(); ++i) {
        if (!mask.at(i)) continue;
        DCA_CHECK(pv[i] > T(0) && gv[i] > T(0), NumericalError,
                  "si_loss: non-positive depth at a valid pixel");
        const double g = std::log(static_cast<double>(pv[i])) -
                         std::log(static_cast<double>(gv[i]));
        s1 += g;
        s2 += g * g;
    }
    const double radicand = s2 / t_count - lambda * (s1 * s1) / (t_count * t_count);
    const double value = alpha * std::sqrt(std::max(0.0, radicand));

    auto pn = pred.node();
    auto gn = gt.node();
    return detail::make_result<T>(
        "si_loss", {1}, {static_cast<T>(value)}, {pred},
        [pn, gn, mask, alpha, lambda, s1, radicand, t_count](const std::vector<T>& gy) {
            if (!pn->wants_grad()) return;
            std::vector<T> gp(pn->data.size(), T(0));
            if (radicand > 0.0) {
                const double root = std::sqrt(radicand);
                for (size_t i = 0; i < gp.size(); ++i) {
                    if (!mask.mask[i]) continue;
                    const double p = static_cast<double>(pn->data[i]);
                    const double g = std::log(p) - std::log(static_cast<double>(gn->data[i]));
                    const double dg = alpha / root * (g / t_count - lambda * s1 / (t_count * t_count));
                    gp[i] = static_cast<T>(static_cast<double>(gy[0]) * dg / p);
                }
            }
            pn->accumulate_grad(gp.data(), gp.size());
        });
}

template <typename T>
TensorT<T> grad_loss(const TensorT<T>& pred, const TensorT<T>& gt, const ValidMask& mask) {
    check_loss_inputs(pred, gt, mask, "grad_loss");
    DCA_CHECK(pred.rank() == 4, ShapeError, "grad_loss: input must be NCHW");
    const int64_t n = pred.dim(0), c = pred.dim(1), h = pred.dim(2), w = pred.dim(3);
    const auto pv = pred.data();
    const auto gv = gt.data();

    double acc = 0.0;
    int64_t pairs = 0;
    for (int64_t nc = 0; nc < n * c; ++nc) {
        const int64_t base = nc * h * w;
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x) {
                const int64_t i = base + y * w + x;
                if (!mask.at(i)) continue;
                if (y + 1 < h && mask.at(i + w)) {
                    const double dp = static_cast<double>(pv[i + w]) - pv[i];
                    const double dg = static_cast<double>(gv[i + w]) - gv[i];
                    acc += std::abs(dp - dg);
                    ++pairs;
                }
                if (x + 1 < w && mask.at(i + 1)) {
                    const double dp = static_cast<double>(pv[i + 1]) - pv[i];
                    const double dg = static_cast<double>(gv[i + 1]) - gv[i];
                    acc += std::abs(dp - dg);
                    ++pairs;
                }
            }
    }
    const double value = pairs > 0 ? acc / static_cast<double>(pairs) : 0.0;

    auto pn = pred.node();
    auto gn = gt.node();
    return detail::make_result<T>(
        "grad_loss", {1}, {static_cast<T>(value)}, {pred},
        [pn, gn, mask, n, c, h, w, pairs](const std::vector<T>& gy) {
            if (!pn->wants_grad() || pairs == 0) return;
            std::vector<T> gp(pn->data.size(), T(0));
            const T scale = gy[0] / static_cast<T>(pairs);
            for (int64_t nc = 0; nc < n * c; ++nc) {
                const int64_t base = nc * h * w;
                for (int64_t y = 0; y < h; ++y)
                    for (int64_t x = 0; x < w; ++x) {
                        const int64_t i = base + y * w + x;
                        if (!mask.at(i)) continue;
                        if (y + 1 < h && mask.at(i + w)) {
                            const T s = sign_of((pn->data[i + w] - pn->data[i]) -
                                                (gn->data[i + w] - gn->data[i]));
                            gp[i + w] += scale * s;
                            gp[i] -= scale * s;
                        }
                        if (x + 1 < w && mask.at(i + 1)) {
                            const T s = sign_of((pn->data[i + 1] - pn->data[i]) -
                                                (gn->data[i + 1] - gn->data[i]));
                            gp[i + 1] += scale * s;
                            gp[i] -= scale * s;
                        }
                    }
            }
            pn->accumulate_grad(gp.data(), gp.size());
        });
}

template <typename T>
TensorT<T> total_loss(const TensorT<T>& pred, const TensorT<T>& gt, const ValidMask& mask,
                      const LossWeights& w) {
    w.validate();
    TensorT<T> total = scalar_mul(l1_loss(pred, gt, mask), static_cast<T>(w.lambda1));
    total = add(total, scalar_mul(si_loss(pred, gt, mask, w.alpha, w.lambda_si),
                                  static_cast<T>(w.lambda2)));
    return add(total, scalar_mul(grad_loss(pred, gt, mask), static_cast<T>(w.lambda3)));
}

std::string MetricsReport::csv_line() const {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed;
    out << delta1 << "," << delta2 << "," << delta3 << "," << absrel << "," << rmse << ","
        << log10 << "," << valid_count;
    return out.str();
}

template <typename T>
MetricsReport compute_metrics(const TensorT<T>& pred, const TensorT<T>& gt, const ValidMask& mask,
                              double max_depth, double min_depth) {
    check_loss_inputs(pred, gt, mask, "compute_metrics");
    DCA_CHECK(mask.count >= 1, NumericalError, "compute_metrics: no valid pixels");
    const auto pv = pred.data();
    const auto gv = gt.data();
    int64_t d1 = 0, d2 = 0, d3 = 0;
    double absrel = 0.0, sq = 0.0, l10 = 0.0;
    for (int64_t i = 0; i < pred.numel(); ++i) {
        if (!mask.at(i)) continue;
        double y = std::clamp(static_cast<double>(pv[i]), min_depth, max_depth);
        const double ystar = static_cast<double>(gv[i]);
        const double ratio = std::max(y / ystar, ystar / y);
        if (ratio < 1.25) ++d1;
        if (ratio < 1.25 * 1.25) ++d2;
        if (ratio < 1.25 * 1.25 * 1.25) ++d3;
        absrel += std::abs(y - ystar) / ystar;
        sq += (y - ystar) * (y - ystar);
        l10 += std::abs(std::log10(y) - std::log10(ystar));
    }
    const double t = static_cast<double>(mask.count);
    MetricsReport report;
    report.delta1 = static_cast<double>(d1) / t;
    report.delta2 = static_cast<double>(d2) / t;
    report.delta3 = static_cast<double>(d3) / t;
    report.absrel = absrel / t;
    report.rmse = std::sqrt(sq / t);
    report.log10 = l10 / t;
    report.valid_count = mask.count;
    return report;
}

template <typename T>
ConsistencyReportT<T> consistency_score(const std::vector<TensorT<T>>& preds) {
    DCA_CHECK(preds.size() >= 2, ShapeError,
              "consistency_score: need at least 2 predictions, got " +
                  std::to_string(preds.size()));
    const Shape& shape = preds.front().shape();
    for (const auto& p : preds)
        DCA_CHECK(p.shape() == shape, ShapeError, "consistency_score: shape mismatch");

    ConsistencyReportT<T> report;
    double pair_sum = 0.0;
    for (size_t a = 0; a < preds.size(); ++a) {
        for (size_t b = a + 1; b < preds.size(); ++b) {
            const auto da = preds[a].data();
            const auto db = preds[b].data();
            std::vector<T> map(da.size());
            double acc = 0.0;
            for (size_t i = 0; i < da.size(); ++i) {
                const double va = static_cast<double>(da[i]);
                const double vb = static_cast<double>(db[i]);
                const double denom = (va + vb) / 2.0;
                const double rel = denom != 0.0 ? std::abs(va - vb) / denom : 0.0;
                map[i] = static_cast<T>(rel);
                acc += rel;
            }
            typename ConsistencyReportT<T>::PairDiff pd;
            pd.a = static_cast<int>(a);
            pd.b = static_cast<int>(b);
            pd.map = TensorT<T>::from_values(shape, std::move(map));
            pd.mean = acc / static_cast<double>(da.size());
            pair_sum += pd.mean;
            report.pairs.push_back(std::move(pd));
        }
    }
    report.score = pair_sum / static_cast<double>(report.pairs.size());
    return report;
}

#define DCA_INSTANTIATE_LOSSES(T)                                                              \
    template TensorT<T> l1_loss<T>(const TensorT<T>&, const TensorT<T>&, const ValidMask&);    \
    template TensorT<T> si_loss<T>(const TensorT<T>&, const TensorT<T>&, const ValidMask&,     \
                                   double, double);                                            \
    template TensorT<T> grad_loss<T>(const TensorT<T>&, const TensorT<T>&, const ValidMask&);  \
    template TensorT<T> total_loss<T>(const TensorT<T>&, const TensorT<T>&, const ValidMask&,  \
                                      const LossWeights&);                                     \
    template MetricsReport compute_metrics<T>(const TensorT<T>&, const TensorT<T>&,            \
                                              const ValidMask&, double, double);               \
    template ConsistencyReportT<T> consistency_score<T>(const std::vector<TensorT<T>>&);

DCA_INSTANTIATE_LOSSES(float)
DCA_INSTANTIATE_LOSSES(double)

#undef DCA_INSTANTIATE_LOSSES

}  // namespace dca
