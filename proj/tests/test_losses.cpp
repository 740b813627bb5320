#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dca/gradcheck.hpp"
#include "dca/losses.hpp"

using dca::Tensor;
using dca::TensorT;
using dca::ValidMask;

namespace {

template <typename T>
TensorT<T> random_depth(const dca::Shape& shape, uint64_t seed, T lo = T(0.5), T hi = T(8)) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(static_cast<double>(lo), static_cast<double>(hi));
    std::vector<T> vals(static_cast<size_t>(dca::shape_numel(shape)));
    for (auto& v : vals) v = static_cast<T>(dist(rng));
    return TensorT<T>::from_values(shape, std::move(vals));
}

// The absolute-value losses are piecewise linear; finite differences are only
// meaningful away from their kinks. Resamples pred until every per-pixel
// difference and every forward-difference pair stays clear of a sign change.
template <typename T>
TensorT<T> kink_free_pred(const TensorT<T>& gt, uint64_t seed, double margin = 0.02) {
    const dca::Shape& shape = gt.shape();
    const int64_t h = shape[2], w = shape[3];
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<T> vals(static_cast<size_t>(gt.numel()));
        for (int64_t i = 0; i < gt.numel(); ++i)
            vals[i] = gt.data()[i] + static_cast<T>(dist(rng));
        bool ok = true;
        auto diff = [&](int64_t i, int64_t j) {
            return (static_cast<double>(vals[j]) - vals[i]) -
                   (static_cast<double>(gt.data()[j]) - gt.data()[i]);
        };
        for (int64_t i = 0; ok && i < gt.numel(); ++i) {
            if (std::abs(static_cast<double>(vals[i]) - gt.data()[i]) < margin) ok = false;
            const int64_t y = (i / w) % h, x = i % w;
            if (ok && y + 1 < h && std::abs(diff(i, i + w)) < margin) ok = false;
            if (ok && x + 1 < w && std::abs(diff(i, i + 1)) < margin) ok = false;
        }
        if (ok) return TensorT<T>::from_values(shape, std::move(vals));
    }
    throw std::runtime_error("kink_free_pred: could not find a kink-free sample");
}

}  // namespace

TEST_CASE("l1_loss values") {
    const dca::Shape shape{1, 1, 2, 2};
    Tensor gt = Tensor::from_values(shape, {1.0f, 2.0f, 3.0f, 4.0f});
    ValidMask mask = ValidMask::all(shape);

    CHECK(dca::l1_loss(gt, gt, mask).item() == 0.0f);

    Tensor off = Tensor::from_values(shape, {1.5f, 2.5f, 3.5f, 4.5f});
    CHECK(dca::l1_loss(off, gt, mask).item() == doctest::Approx(0.5f));

    Tensor half = Tensor::from_values(shape, {2.0f, 2.0f, 4.0f, 4.0f});  // two off by 1
    CHECK(dca::l1_loss(half, gt, mask).item() == doctest::Approx(0.5f));

    ValidMask empty;
    empty.shape = shape;
    empty.mask.assign(4, 0);
    empty.count = 0;
    CHECK_THROWS_AS(dca::l1_loss(gt, gt, empty), dca::NumericalError);
}

TEST_CASE("l1_loss respects the mask") {
    const dca::Shape shape{1, 1, 1, 4};
    Tensor gt = Tensor::from_values(shape, {1.0f, 1.0f, 1.0f, 1.0f});
    Tensor pred = Tensor::from_values(shape, {2.0f, 1.0f, 1.0f, 5.0f});
    ValidMask mask = ValidMask::all(shape);
    mask.mask[3] = 0;
    mask.count = 3;
    CHECK(dca::l1_loss(pred, gt, mask).item() == doctest::Approx(1.0f / 3.0f));
}

TEST_CASE("si_loss closed forms") {
    const dca::Shape shape{1, 1, 3, 3};
    Tensor gt = random_depth<float>(shape, 1);
    ValidMask mask = ValidMask::all(shape);

    CHECK(dca::si_loss(gt, gt, mask, 10.0, 0.85).item() == doctest::Approx(0.0f));

    // pred = 2*gt: loss = alpha * sqrt(1-lambda) * ln 2
    std::vector<float> doubled(gt.data().begin(), gt.data().end());
    for (auto& v : doubled) v *= 2.0f;
    Tensor pred = Tensor::from_values(shape, doubled);
    const double expect = 10.0 * std::sqrt(0.15) * std::log(2.0);
    CHECK(std::abs(dca::si_loss(pred, gt, mask, 10.0, 0.85).item() - expect) < 1e-4);

    // scale-response law over several factors
    for (double c : {0.5, 2.0, std::exp(1.0)}) {
        std::vector<float> scaled(gt.data().begin(), gt.data().end());
        for (auto& v : scaled) v = static_cast<float>(v * c);
        Tensor p = Tensor::from_values(shape, scaled);
        const double law = 10.0 * std::sqrt(0.15) * std::abs(std::log(c));
        CHECK(std::abs(dca::si_loss(p, gt, mask, 10.0, 0.85).item() - law) < 1e-5);
    }

    Tensor bad = Tensor::from_values(shape, std::vector<float>(9, -1.0f));
    CHECK_THROWS_AS(dca::si_loss(bad, gt, mask, 10.0, 0.85), dca::NumericalError);
}

TEST_CASE("si_loss clamps the radicand at its minimum without NaN") {
    const dca::Shape shape{1, 1, 2, 2};
    Tensor gt = Tensor::from_values(shape, {1.0f, 2.0f, 3.0f, 4.0f});
    Tensor pred = gt.detached_copy();
    pred.set_requires_grad(true);
    ValidMask mask = ValidMask::all(shape);
    Tensor loss = dca::si_loss(pred, gt, mask, 10.0, 0.85);
    CHECK(loss.item() == 0.0f);
    dca::backward(loss);
    REQUIRE(pred.has_grad());
    for (float g : pred.grad()) CHECK(g == 0.0f);
}

TEST_CASE("grad_loss closed forms") {
    SUBCASE("constant offset vanishes") {
        const dca::Shape shape{1, 1, 3, 4};
        Tensor gt = random_depth<float>(shape, 2);
        std::vector<float> off(gt.data().begin(), gt.data().end());
        for (auto& v : off) v += 0.7f;
        Tensor pred = Tensor::from_values(shape, off);
        CHECK(dca::grad_loss(pred, gt, ValidMask::all(shape)).item() == doctest::Approx(0.0f));
    }

    SUBCASE("mirrored horizontal ramp") {
        const int64_t h = 4, w = 6;
        const dca::Shape shape{1, 1, h, w};
        std::vector<float> ramp(h * w), mirrored(h * w);
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x) {
                ramp[y * w + x] = static_cast<float>(x + 1);
                mirrored[y * w + x] = static_cast<float>(w - x);
            }
        Tensor gt = Tensor::from_values(shape, ramp);
        Tensor pred = Tensor::from_values(shape, mirrored);
        // each horizontal pair contributes |(-1) - (+1)| = 2; vertical pairs 0
        const int64_t wpairs = h * (w - 1), hpairs = (h - 1) * w;
        const double expect = 2.0 * wpairs / static_cast<double>(wpairs + hpairs);
        CHECK(dca::grad_loss(pred, gt, ValidMask::all(shape)).item() ==
              doctest::Approx(expect));
    }

    SUBCASE("single pixel has no pairs") {
        const dca::Shape shape{1, 1, 1, 1};
        Tensor gt = Tensor::from_values(shape, {2.0f});
        Tensor pred = Tensor::from_values(shape, {3.0f});
        CHECK(dca::grad_loss(pred, gt, ValidMask::all(shape)).item() == 0.0f);
    }

    SUBCASE("invariant under adding a constant to pred") {
        const dca::Shape shape{1, 1, 5, 5};
        Tensor gt = random_depth<float>(shape, 3);
        Tensor pred = random_depth<float>(shape, 4);
        ValidMask mask = ValidMask::all(shape);
        const float base = dca::grad_loss(pred, gt, mask).item();
        std::vector<float> shifted(pred.data().begin(), pred.data().end());
        for (auto& v : shifted) v += 2.5f;
        Tensor pred2 = Tensor::from_values(shape, shifted);
        CHECK(dca::grad_loss(pred2, gt, mask).item() == doctest::Approx(base).epsilon(1e-5));
    }
}

TEST_CASE("total_loss composes the weighted parts") {
    const dca::Shape shape{1, 1, 3, 3};
    Tensor gt = random_depth<float>(shape, 5);
    Tensor pred = random_depth<float>(shape, 6);
    ValidMask mask = ValidMask::all(shape);

    const float l1 = dca::l1_loss(pred, gt, mask).item();
    const float si = dca::si_loss(pred, gt, mask, 10.0, 0.85).item();
    const float gr = dca::grad_loss(pred, gt, mask).item();

    SUBCASE("vari profile ignores the L1 term") {
        CHECK(l1 > 0.0f);
        const float total = dca::total_loss(pred, gt, mask, dca::LossWeights::vari()).item();
        CHECK(total == doctest::Approx(si + 0.1f * gr).epsilon(1e-5));
    }

    SUBCASE("nyu profile weights all three") {
        const float total = dca::total_loss(pred, gt, mask, dca::LossWeights::nyu()).item();
        CHECK(total == doctest::Approx(l1 + 0.02f * si + 0.1f * gr).epsilon(1e-5));
    }

    SUBCASE("coincident prediction gives zero for any weights") {
        dca::LossWeights w{0.3, 0.4, 0.5, 10.0, 0.85};
        CHECK(dca::total_loss(gt, gt, mask, w).item() == doctest::Approx(0.0f));
    }
}

TEST_CASE("losses are differentiable w.r.t. pred") {
    using D = TensorT<double>;
    const dca::Shape shape{1, 1, 4, 5};
    for (uint64_t seed = 0; seed < 5; ++seed) {
        D gt = random_depth<double>(shape, 100 + seed);
        D pred = kink_free_pred(gt, 200 + seed);
        ValidMask mask = ValidMask::from_gt(gt, 1e-3, 10.0);
        mask.mask[2] = 0;  // exercise a masked-out pixel
        mask.count -= 1;

        auto f_l1 = [&](D& t) { return dca::l1_loss(t, gt, mask); };
        CHECK(dca::finite_diff_check(f_l1, pred, 1e-3) < 1e-4);

        auto f_si = [&](D& t) { return dca::si_loss(t, gt, mask, 10.0, 0.85); };
        CHECK(dca::finite_diff_check(f_si, pred, 1e-5) < 1e-4);

        auto f_grad = [&](D& t) { return dca::grad_loss(t, gt, mask); };
        CHECK(dca::finite_diff_check(f_grad, pred, 1e-3) < 1e-4);

        auto f_total = [&](D& t) {
            return dca::total_loss(t, gt, mask, dca::LossWeights::vari());
        };
        CHECK(dca::finite_diff_check(f_total, pred, 1e-3) < 1e-4);
    }
}

TEST_CASE("compute_metrics closed forms") {
    const dca::Shape shape{1, 1, 2, 3};

    SUBCASE("coincident prediction is perfect") {
        Tensor gt = random_depth<float>(shape, 7);
        auto report = dca::compute_metrics(gt, gt, ValidMask::all(shape));
        CHECK(report.delta1 == 1.0);
        CHECK(report.delta2 == 1.0);
        CHECK(report.delta3 == 1.0);
        CHECK(report.absrel == 0.0);
        CHECK(report.rmse == 0.0);
        CHECK(report.log10 == 0.0);
        CHECK(report.valid_count == 6);
    }

    SUBCASE("uniform 1.3x overshoot lands between delta1 and delta2") {
        Tensor gt = Tensor::full(shape, 2.0f);
        Tensor pred = Tensor::full(shape, 2.6f);
        auto report = dca::compute_metrics(pred, gt, ValidMask::all(shape));
        CHECK(report.delta1 == 0.0);
        CHECK(report.delta2 == 1.0);
        CHECK(report.delta3 == 1.0);
    }

    SUBCASE("constant fields") {
        Tensor gt = Tensor::full(shape, 3.0f);
        Tensor pred = Tensor::full(shape, 3.3f);
        auto report = dca::compute_metrics(pred, gt, ValidMask::all(shape));
        const double y = static_cast<double>(3.3f);
        CHECK(std::abs(report.absrel - (y - 3.0) / 3.0) < 1e-6);
        CHECK(std::abs(report.rmse - (y - 3.0)) < 1e-6);
        CHECK(std::abs(report.log10 - std::log10(y / 3.0)) < 1e-6);
        CHECK(std::abs(report.log10 - 0.0413927) < 1e-6);
    }

    SUBCASE("empty mask rejected") {
        Tensor gt = Tensor::full(shape, 3.0f);
        ValidMask empty;
        empty.shape = shape;
        empty.mask.assign(6, 0);
        CHECK_THROWS_AS(dca::compute_metrics(gt, gt, empty), dca::NumericalError);
    }
}

TEST_CASE("delta thresholds are monotone on random fields") {
    std::mt19937_64 rng(8);
    for (int it = 0; it < 100; ++it) {
        const dca::Shape shape{1, 1, 4, 4};
        Tensor gt = random_depth<float>(shape, rng());
        Tensor pred = random_depth<float>(shape, rng());
        auto report = dca::compute_metrics(pred, gt, ValidMask::all(shape));
        CHECK(report.delta1 <= report.delta2);
        CHECK(report.delta2 <= report.delta3);
        CHECK(report.delta3 <= 1.0);
        CHECK(report.absrel >= 0.0);
        CHECK(report.rmse >= 0.0);
        CHECK(report.log10 >= 0.0);
    }
}

TEST_CASE("metrics are invariant under joint spatial permutation") {
    const dca::Shape shape{1, 1, 3, 4};
    Tensor gt = random_depth<float>(shape, 9);
    Tensor pred = random_depth<float>(shape, 10);
    ValidMask mask = ValidMask::all(shape);
    mask.mask[5] = 0;
    mask.count = 11;
    auto base = dca::compute_metrics(pred, gt, mask);

    std::vector<int> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937{11});
    std::vector<float> pg(12), pp(12);
    ValidMask pmask = mask;
    for (int i = 0; i < 12; ++i) {
        pg[i] = gt.data()[perm[i]];
        pp[i] = pred.data()[perm[i]];
        pmask.mask[i] = mask.mask[perm[i]];
    }
    auto permuted = dca::compute_metrics(Tensor::from_values(shape, pp),
                                         Tensor::from_values(shape, pg), pmask);
    CHECK(permuted.delta1 == doctest::Approx(base.delta1));
    CHECK(permuted.absrel == doctest::Approx(base.absrel).epsilon(1e-9));
    CHECK(permuted.rmse == doctest::Approx(base.rmse).epsilon(1e-9));
    CHECK(permuted.log10 == doctest::Approx(base.log10).epsilon(1e-9));
}

TEST_CASE("metrics clamp predictions to the depth range") {
    const dca::Shape shape{1, 1, 1, 2};
    Tensor gt = Tensor::from_values(shape, {5.0f, 5.0f});
    Tensor pred = Tensor::from_values(shape, {500.0f, -3.0f});
    auto report = dca::compute_metrics(pred, gt, ValidMask::all(shape), 10.0);
    // clamped to 10 and 1e-3
    CHECK(report.absrel == doctest::Approx((5.0 / 5.0 + (5.0 - 1e-3) / 5.0) / 2.0));
}

TEST_CASE("consistency_score") {
    const dca::Shape shape{1, 1, 2, 2};

    SUBCASE("identical predictions score zero") {
        Tensor a = random_depth<float>(shape, 12);
        auto report = dca::consistency_score<float>({a, a.detached_copy(), a.detached_copy()});
        CHECK(report.score == 0.0);
        CHECK(report.pairs.size() == 3);
    }

    SUBCASE("uniform 1.1 ratio gives the closed form") {
        Tensor a = Tensor::full(shape, 2.0f);
        Tensor b = Tensor::full(shape, 2.2f);
        auto report = dca::consistency_score<float>({a, b});
        CHECK(std::abs(report.score - 0.2 / 2.1) < 1e-6);
        CHECK(std::abs(report.score - 0.09524) < 1e-5);
    }

    SUBCASE("permutation symmetric") {
        std::vector<Tensor> preds = {random_depth<float>(shape, 13), random_depth<float>(shape, 14),
                                     random_depth<float>(shape, 15)};
        auto base = dca::consistency_score(preds);
        std::vector<Tensor> shuffled = {preds[2], preds[0], preds[1]};
        auto moved = dca::consistency_score(shuffled);
        CHECK(moved.score == doctest::Approx(base.score).epsilon(1e-9));
    }

    SUBCASE("fewer than two predictions rejected") {
        CHECK_THROWS_AS(dca::consistency_score<float>({Tensor::ones(shape)}), dca::ShapeError);
    }
}
