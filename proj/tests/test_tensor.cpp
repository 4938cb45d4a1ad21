#include <doctest.h>

#include <cmath>

#include "sgqc/ops.hpp"
#include "support/testutil.hpp"

using namespace sgqc;
using namespace sgqc::test;

namespace {

// keeps relu inputs away from the kink so finite differences stay valid
template <typename T = double>
Tensor<T> random_away_from_zero(const Shape& shape, std::mt19937_64& rng) {
    Tensor<T> t = random_tensor<T>(shape, rng);
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] += t[i] >= T(0) ? T(0.15) : T(-0.15);
    return t;
}

}  // namespace

TEST_CASE("elementwise definitions") {
    Tensor<double> a({3}, {-1.0, 0.0, 2.0});
    Tensor<double> r = relu(a);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 0.0);
    CHECK(r[2] == 2.0);

    Tensor<double> s = sigmoid(Tensor<double>({1}, {0.0}));
    CHECK(s[0] == doctest::Approx(0.5).epsilon(1e-12));

    Tensor<double> m = mul(Tensor<double>({3}, {1, 2, 3}), Tensor<double>({3}, {4, 5, 6}));
    CHECK(m[0] == 4.0);
    CHECK(m[1] == 10.0);
    CHECK(m[2] == 18.0);

    Tensor<double> sum = add(Tensor<double>({2}, {1, 2}), Tensor<double>({2}, {10, 20}));
    CHECK(sum[0] == 11.0);
    CHECK(sum[1] == 22.0);
}

TEST_CASE("binary ops reject mismatched shapes, naming both") {
    Tensor<double> a({2, 3, 1});
    Tensor<double> b({2, 4, 1});
    try {
        add(a, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("(2x3x1)") != std::string::npos);
        CHECK(msg.find("(2x4x1)") != std::string::npos);
    }
}

TEST_CASE("non-finite op results are rejected at the boundary") {
    Tensor<double> huge({1}, {1e308});
    Tensor<double> ten({1}, {10.0});
    CHECK_THROWS_AS(mul(huge, ten), NumericError);
    CHECK_THROWS_AS(add(huge, huge), NumericError);
}

TEST_CASE("softmax uniform, shift invariance, closed form") {
    Tensor<double> u = softmax(Tensor<double>({3}, {0.0, 0.0, 0.0}));
    for (int i = 0; i < 3; ++i) CHECK(u[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    Tensor<double> big = softmax(Tensor<double>({3}, {1000.0, 1000.0, 1000.0}));
    for (int i = 0; i < 3; ++i) CHECK(big[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    Tensor<double> t = softmax(Tensor<double>({3}, {std::log(2.0), 0.0, 0.0}));
    CHECK(t[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(t[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(t[2] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax sums to one for large logit magnitudes") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        Tensor<double> logits = random_tensor({5}, rng, -1e4, 1e4);
        Tensor<double> p = softmax(logits);
        double sum = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(p[i] >= 0.0);
            sum += p[i];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("concat_channels stacks a before b and round-trips through split") {
    std::mt19937_64 rng(11);
    Tensor<double> a = random_tensor({2, 2, 1}, rng);
    Tensor<double> b = random_tensor({2, 2, 1}, rng);
    Tensor<double> y = concat_channels(a, b);
    REQUIRE(y.shape() == Shape{2, 2, 2});
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(y.at(i, j, 0) == a.at(i, j, 0));
            CHECK(y.at(i, j, 1) == b.at(i, j, 0));
        }

    Tensor<double> wide_a = random_tensor({99, 99, 1}, rng);
    Tensor<double> wide_b = random_tensor({99, 99, 1}, rng);
    CHECK(concat_channels(wide_a, wide_b).shape() == Shape{99, 99, 2});

    Tensor<double> c = random_tensor({4, 5, 3}, rng);
    Tensor<double> d = random_tensor({4, 5, 2}, rng);
    auto [ca, cb] = split_channels(concat_channels(c, d), 3);
    CHECK(ca.values() == c.values());
    CHECK(cb.values() == d.values());

    CHECK_THROWS_AS(concat_channels(Tensor<double>({2, 2, 1}), Tensor<double>({3, 2, 1})),
                    ShapeError);
}

TEST_CASE("gradients of elementwise primitives match finite differences") {
    std::mt19937_64 rng(23);
    const Shape shape{5, 4, 3};
    Tensor<double> cot = random_tensor(shape, rng);

    SUBCASE("relu") {
        Tensor<double> x = random_away_from_zero(shape, rng);
        Tensor<double> dx = relu_backward(x, cot);
        auto eval = [&] { return dot_loss(relu(x), cot); };
        CHECK(max_grad_error(eval, x.values(), dx.values()) < kFdTol);
    }
    SUBCASE("sigmoid") {
        Tensor<double> x = random_tensor(shape, rng);
        Tensor<double> dx = sigmoid_backward_from_output(sigmoid(x), cot);
        auto eval = [&] { return dot_loss(sigmoid(x), cot); };
        CHECK(max_grad_error(eval, x.values(), dx.values()) < kFdTol);
    }
    SUBCASE("add and mul") {
        Tensor<double> a = random_tensor(shape, rng);
        Tensor<double> b = random_tensor(shape, rng);
        auto eval_a = [&] { return dot_loss(mul(a, b), cot); };
        Tensor<double> da = mul(cot, b);
        CHECK(max_grad_error(eval_a, a.values(), da.values()) < kFdTol);

        auto eval_add = [&] { return dot_loss(add(a, b), cot); };
        CHECK(max_grad_error(eval_add, b.values(), cot.values()) < kFdTol);
    }
    SUBCASE("softmax") {
        Tensor<double> x = random_tensor({7}, rng);
        Tensor<double> cot1 = random_tensor({7}, rng);
        Tensor<double> y = softmax(x);
        Tensor<double> dx = softmax_backward(y, cot1);
        auto eval = [&] { return dot_loss(softmax(x), cot1); };
        CHECK(max_grad_error(eval, x.values(), dx.values()) < kFdTol);
    }
}
