#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dca/gradcheck.hpp"
#include "dca/tensor.hpp"

using dca::Tensor;
using dca::TensorT;

namespace {

std::vector<float> random_values(size_t n, uint64_t seed, float lo = -1.0f, float hi = 1.0f) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(lo, hi);
    std::vector<float> out(n);
    for (auto& v : out) v = dist(rng);
    return out;
}

}  // namespace

TEST_CASE("tensor_new fills and preserves values") {
    Tensor z = Tensor::full({1, 1, 2, 2}, 0.0f);
    CHECK(z.numel() == 4);
    for (float v : z.data()) CHECK(v == 0.0f);

    std::vector<float> vals = {1, 2, 3, 4, 5, 6};
    Tensor t = Tensor::from_values({2, 3}, vals);
    REQUIRE(t.numel() == 6);
    for (int i = 0; i < 6; ++i) CHECK(t.data()[i] == vals[i]);
    CHECK_FALSE(t.requires_grad());
    CHECK_FALSE(t.has_grad());
}

TEST_CASE("tensor_new rejects bad shapes") {
    CHECK_THROWS_AS(Tensor::from_values({1, 2, 2, 2}, std::vector<float>(7, 0.0f)),
                    dca::ShapeError);
    CHECK_THROWS_AS(Tensor::zeros({0, 2}), dca::ShapeError);
    CHECK_THROWS_AS(Tensor::zeros({}), dca::ShapeError);
}

TEST_CASE("elementwise_mul identities") {
    Tensor a = Tensor::from_values({2, 3}, random_values(6, 1));
    Tensor ones = Tensor::ones({2, 3});
    Tensor out = dca::elementwise_mul(a, ones);
    for (int i = 0; i < 6; ++i) CHECK(out.data()[i] == a.data()[i]);

    Tensor zeros = Tensor::zeros({2, 3});
    Tensor b = Tensor::from_values({2, 3}, random_values(6, 2));
    Tensor out2 = dca::elementwise_mul(zeros, b);
    for (float v : out2.data()) CHECK(v == 0.0f);

    CHECK_THROWS_AS(dca::elementwise_mul(a, Tensor::zeros({3, 2})), dca::ShapeError);
}

TEST_CASE("elementwise_mul hand product rule") {
    Tensor a = Tensor::from_values({2}, {1.0f, 2.0f});
    Tensor b = Tensor::from_values({2}, {3.0f, 4.0f});
    a.set_requires_grad(true);
    b.set_requires_grad(true);
    Tensor out = dca::elementwise_mul(a, b);
    CHECK(out.data()[0] == 3.0f);
    CHECK(out.data()[1] == 8.0f);
    dca::backward(dca::sum(out));  // upstream grad [1,1]
    REQUIRE(a.has_grad());
    REQUIRE(b.has_grad());
    CHECK(a.grad()[0] == 3.0f);
    CHECK(a.grad()[1] == 4.0f);
    CHECK(b.grad()[0] == 1.0f);
    CHECK(b.grad()[1] == 2.0f);
}

TEST_CASE("concat_channels layout and round trip") {
    SUBCASE("singleton concat is identity") {
        Tensor a = Tensor::from_values({1, 2, 2, 2}, random_values(8, 3));
        Tensor out = dca::concat_channels({a});
        REQUIRE(out.shape() == a.shape());
        for (int i = 0; i < 8; ++i) CHECK(out.data()[i] == a.data()[i]);
    }

    SUBCASE("channel blocks are placed in order") {
        Tensor a = Tensor::full({1, 2, 1, 2}, 1.0f);
        Tensor b = Tensor::full({1, 3, 1, 2}, 2.0f);
        Tensor out = dca::concat_channels({a, b});
        REQUIRE(out.shape() == dca::Shape{1, 5, 1, 2});
        for (int c = 0; c < 5; ++c)
            for (int w = 0; w < 2; ++w) CHECK(out.data()[c * 2 + w] == (c < 2 ? 1.0f : 2.0f));
    }

    SUBCASE("concat then slice is bit-exact") {
        std::vector<Tensor> parts;
        const int64_t k = 3;
        for (int p = 0; p < 4; ++p)
            parts.push_back(Tensor::from_values({2, k, 3, 4}, random_values(2 * k * 3 * 4, 10 + p)));
        Tensor cat = dca::concat_channels(parts);
        for (int p = 0; p < 4; ++p) {
            Tensor back = dca::slice_channels(cat, p * k, k);
            REQUIRE(back.shape() == parts[p].shape());
            for (int64_t i = 0; i < back.numel(); ++i)
                CHECK(back.data()[i] == parts[p].data()[i]);
        }
    }

    SUBCASE("spatial mismatch rejected") {
        Tensor a = Tensor::zeros({1, 2, 2, 2});
        Tensor b = Tensor::zeros({1, 2, 2, 3});
        CHECK_THROWS_AS(dca::concat_channels({a, b}), dca::ShapeError);
    }
}

TEST_CASE("concat_channels backward slices gradients to parts") {
    Tensor a = Tensor::from_values({1, 1, 1, 2}, {1.0f, 2.0f});
    Tensor b = Tensor::from_values({1, 2, 1, 2}, {3.0f, 4.0f, 5.0f, 6.0f});
    a.set_requires_grad(true);
    b.set_requires_grad(true);
    Tensor cat = dca::concat_channels({a, b});
    // loss = sum(cat * cat) so each slot's grad is 2*value.
    dca::backward(dca::sum(dca::elementwise_mul(cat, cat)));
    CHECK(a.grad()[0] == doctest::Approx(2.0f));
    CHECK(a.grad()[1] == doctest::Approx(4.0f));
    CHECK(b.grad()[2] == doctest::Approx(10.0f));
}

TEST_CASE("backward basics") {
    SUBCASE("sum gives all-ones gradient") {
        Tensor x = Tensor::from_values({1, 1, 2, 2}, random_values(4, 4));
        x.set_requires_grad(true);
        dca::backward(dca::sum(x));
        REQUIRE(x.has_grad());
        for (float g : x.grad()) CHECK(g == 1.0f);
    }

    SUBCASE("sum of squares chain rule") {
        Tensor x = Tensor::from_values({2}, {1.0f, 2.0f});
        x.set_requires_grad(true);
        dca::backward(dca::sum(dca::elementwise_mul(x, x)));
        CHECK(x.grad()[0] == 2.0f);
        CHECK(x.grad()[1] == 4.0f);
    }

    SUBCASE("two consumers accumulate") {
        Tensor x = Tensor::from_values({3}, {1.0f, -2.0f, 0.5f});
        x.set_requires_grad(true);
        Tensor loss = dca::add(dca::sum(x), dca::sum(x));
        dca::backward(loss);
        for (float g : x.grad()) CHECK(g == 2.0f);
    }

    SUBCASE("non-scalar loss rejected") {
        Tensor x = Tensor::zeros({2, 2});
        x.set_requires_grad(true);
        Tensor y = dca::scalar_mul(x, 2.0f);
        CHECK_THROWS_AS(dca::backward(y), dca::GraphError);
    }

    SUBCASE("detached leaf keeps grad absent") {
        Tensor x = Tensor::from_values({2}, {1.0f, 2.0f});
        Tensor y = Tensor::from_values({2}, {3.0f, 4.0f});
        x.set_requires_grad(true);
        dca::backward(dca::sum(dca::elementwise_mul(x, y)));
        CHECK(x.has_grad());
        CHECK_FALSE(y.has_grad());
    }

    SUBCASE("leaf-only scalar loss needs requires_grad") {
        Tensor s = Tensor::scalar(1.0f);
        CHECK_THROWS_AS(dca::backward(s), dca::GraphError);
    }
}

TEST_CASE("gradient sums over k paths") {
    std::mt19937_64 rng(77);
    for (int k = 1; k <= 5; ++k) {
        Tensor x = Tensor::from_values({4}, random_values(4, 100 + k));
        x.set_requires_grad(true);
        Tensor acc = dca::sum(x);
        for (int i = 1; i < k; ++i) acc = dca::add(acc, dca::sum(x));
        dca::backward(acc);
        for (float g : x.grad()) CHECK(g == doctest::Approx(static_cast<float>(k)));
    }
}

TEST_CASE("no_grad suppresses graph recording") {
    Tensor x = Tensor::from_values({2}, {1.0f, 2.0f});
    x.set_requires_grad(true);
    {
        dca::NoGradGuard guard;
        Tensor y = dca::sum(dca::elementwise_mul(x, x));
        CHECK_THROWS_AS(dca::backward(y), dca::GraphError);
    }
    Tensor y = dca::sum(dca::elementwise_mul(x, x));
    dca::backward(y);
    CHECK(x.has_grad());
}

TEST_CASE("finite check flag catches non-finite op output") {
    dca::set_finite_checks_enabled(true);
    Tensor big = Tensor::full({2}, 3e38f);
    CHECK_THROWS_AS(dca::add(big, big), dca::NumericalError);
    dca::set_finite_checks_enabled(false);
    CHECK_NOTHROW(dca::add(big, big));
}

TEST_CASE("finite_diff_check on exact linear and quadratic functions") {
    using DTensor = TensorT<double>;
    DTensor x = DTensor::from_values({2, 3}, {0.3, -0.8, 0.1, 0.9, -0.2, 0.5});

    double err_linear = dca::finite_diff_check([](DTensor& t) { return dca::sum(t); }, x);
    CHECK(err_linear < 1e-10);

    double err_quad = dca::finite_diff_check(
        [](DTensor& t) { return dca::sum(dca::elementwise_mul(t, t)); }, x, 1e-5);
    CHECK(err_quad < 1e-6);
}

TEST_CASE("finite_diff_check property over elementwise graphs") {
    using DTensor = TensorT<double>;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<double> vals(12);
        for (auto& v : vals) v = dist(rng);
        DTensor x = DTensor::from_values({3, 4}, vals);
        std::vector<double> cvals(12);
        for (auto& v : cvals) v = dist(rng);
        DTensor c = DTensor::from_values({3, 4}, cvals);
        auto f = [&c](DTensor& t) {
            return dca::mean(dca::elementwise_mul(dca::add(t, c), dca::scalar_mul(t, 2.0)));
        };
        CHECK(dca::finite_diff_check(f, x) < 1e-6);
    }
}
