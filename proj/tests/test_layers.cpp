#include <doctest.h>

#include <cmath>

#include "sgqc/layers.hpp"
#include "support/testutil.hpp"

using namespace sgqc;
using namespace sgqc::test;

namespace {

// Independent area-downsampling oracle: per output pixel, integrate the
// source over the box [i*sh,(i+1)*sh) x [j*sw,(j+1)*sw) by direct 2D overlap
// clipping against every candidate source cell, then divide by the box area.
Tensor<double> area_oracle(const Tensor<double>& x, int th, int tw) {
    const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
    const double sh = static_cast<double>(h) / th;
    const double sw = static_cast<double>(w) / tw;
    Tensor<double> y({th, tw, c});
    for (int i = 0; i < th; ++i) {
        for (int j = 0; j < tw; ++j) {
            const double r0 = i * sh, r1 = (i + 1) * sh;
            const double c0 = j * sw, c1 = (j + 1) * sw;
            for (int ch = 0; ch < c; ++ch) {
                double integral = 0.0;
                for (int r = static_cast<int>(std::floor(r0));
                     r < std::min(h, static_cast<int>(std::ceil(r1))); ++r) {
                    for (int cc = static_cast<int>(std::floor(c0));
                         cc < std::min(w, static_cast<int>(std::ceil(c1))); ++cc) {
                        const double dr = std::min(r1, r + 1.0) - std::max(r0, static_cast<double>(r));
                        const double dc = std::min(c1, cc + 1.0) - std::max(c0, static_cast<double>(cc));
                        if (dr > 0 && dc > 0) integral += dr * dc * x.at(r, cc, ch);
                    }
                }
                y.at(i, j, ch) = integral / (sh * sw);
            }
        }
    }
    return y;
}

ConvParams<double> random_conv(int kh, int kw, int cin, int cout, Padding pad,
                               std::mt19937_64& rng) {
    ConvParams<double> p = make_conv_params<double>(kh, kw, cin, cout, pad);
    p.kernel = random_tensor(p.kernel.shape(), rng);
    p.bias = random_tensor(p.bias.shape(), rng);
    return p;
}

}  // namespace

TEST_CASE("conv2d shapes: valid shrinks, same preserves") {
    std::mt19937_64 rng(3);
    Tensor<double> x = random_tensor({99, 99, 1}, rng);
    ConvParams<double> p = random_conv(3, 3, 1, 2, Padding::Valid, rng);
    CHECK(conv2d(x, p).shape() == Shape{97, 97, 2});

    for (int k : {1, 3, 5}) {
        ConvParams<double> same = random_conv(k, k, 2, 3, Padding::Same, rng);
        Tensor<double> xs = random_tensor({8, 11, 2}, rng);
        CHECK(conv2d(xs, same).shape() == Shape{8, 11, 3});
    }
}

TEST_CASE("conv2d identity kernel and hand-computed 1x1 case") {
    std::mt19937_64 rng(5);
    Tensor<double> x = random_tensor({6, 7, 1}, rng);
    ConvParams<double> ident = make_conv_params<double>(3, 3, 1, 1, Padding::Same);
    ident.kernel.at(1, 1, 0) = 1.0;  // center tap via 4-d index below
    // kernel layout is kh x kw x cin x cout; set center (1,1,0,0)
    ident.kernel = Tensor<double>({3, 3, 1, 1}, {0, 0, 0, 0, 1, 0, 0, 0, 0});
    Tensor<double> y = conv2d(x, ident);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-12));

    ConvParams<double> one = make_conv_params<double>(1, 1, 1, 1, Padding::Same);
    one.kernel[0] = 2.0;
    one.bias[0] = 1.0;
    Tensor<double> ones = Tensor<double>::full({2, 2, 1}, 1.0);
    Tensor<double> z = conv2d(ones, one);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("conv2d errors: channel mismatch and undersized valid input") {
    std::mt19937_64 rng(6);
    ConvParams<double> p = random_conv(3, 3, 2, 1, Padding::Valid, rng);
    CHECK_THROWS_AS(conv2d(Tensor<double>({5, 5, 1}), p), ShapeError);
    CHECK_THROWS_AS(conv2d(Tensor<double>({2, 5, 2}), p), ShapeError);
}

TEST_CASE("maxpool shapes follow the floor law") {
    std::mt19937_64 rng(9);
    Tensor<double> a = random_tensor({97, 97, 2}, rng);
    CHECK(maxpool(a).shape() == Shape{47, 47, 2});
    Tensor<double> b = random_tensor({6, 6, 16}, rng);
    CHECK(maxpool(b).shape() == Shape{1, 1, 16});

    for (int trial = 0; trial < 60; ++trial) {
        std::uniform_int_distribution<int> d(5, 128);
        const int h = d(rng), w = d(rng);
        Tensor<double> x = random_tensor({h, w, 1}, rng);
        CHECK(maxpool(x).shape() == Shape{(h - 5) / 2 + 1, (w - 5) / 2 + 1, 1});
    }
    CHECK_THROWS_AS(maxpool(Tensor<double>({4, 9, 1})), ShapeError);
}

TEST_CASE("maxpool of a constant is constant; ties route to first in scan order") {
    Tensor<double> x = Tensor<double>::full({7, 7, 2}, 3.25);
    Tensor<double> y = maxpool(x);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == 3.25);

    std::vector<int> argmax;
    Tensor<double> flat = Tensor<double>::full({5, 5, 1}, 1.0);
    maxpool(flat, 5, 2, &argmax);
    REQUIRE(argmax.size() == 1);
    CHECK(argmax[0] == 0);
    Tensor<double> dy({1, 1, 1}, {2.5});
    Tensor<double> dx = maxpool_backward(flat.shape(), argmax, dy);
    CHECK(dx[0] == 2.5);
    for (std::size_t i = 1; i < dx.size(); ++i) CHECK(dx[i] == 0.0);
}

TEST_CASE("area_downsample: constants, exact box means, mean preservation") {
    Tensor<double> c = Tensor<double>::full({10, 8, 1}, 0.7);
    Tensor<double> yc = area_downsample(c, 4, 3);
    for (std::size_t i = 0; i < yc.size(); ++i) CHECK(yc[i] == doctest::Approx(0.7).epsilon(1e-12));

    // 1d analogue as a 6x1 image at factor 3
    Tensor<double> line({6, 1, 1}, {1, 2, 3, 4, 5, 6});
    Tensor<double> yl = area_downsample(line, 2, 1);
    CHECK(yl[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(yl[1] == doctest::Approx(5.0).epsilon(1e-12));

    std::mt19937_64 rng(13);
    Tensor<double> img = random_tensor({299, 299, 1}, rng, 0.0, 1.0);
    Tensor<double> down = area_downsample(img, 99, 99);
    double mean_in = 0.0, mean_out = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) mean_in += img[i];
    for (std::size_t i = 0; i < down.size(); ++i) mean_out += down[i];
    mean_in /= static_cast<double>(img.size());
    mean_out /= static_cast<double>(down.size());
    CHECK(mean_out == doctest::Approx(mean_in).epsilon(1e-6));

    CHECK_THROWS_AS(area_downsample(Tensor<double>({10, 10, 1}), 10, 5), ShapeError);
    CHECK_THROWS_AS(area_downsample(Tensor<double>({10, 10, 1}), 12, 5), ShapeError);
}

TEST_CASE("area_downsample matches the brute-force coverage oracle on a ramp") {
    Tensor<double> ramp({299, 299, 1});
    for (int i = 0; i < 299; ++i)
        for (int j = 0; j < 299; ++j)
            ramp.at(i, j, 0) = (static_cast<double>(i) + 2.0 * j) / 299.0;
    Tensor<double> got = area_downsample(ramp, 99, 99);
    Tensor<double> want = area_oracle(ramp, 99, 99);
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i)
        worst = std::max(worst, std::abs(got[i] - want[i]));
    CHECK(worst < 1e-10);

    // fractional, non-uniform axes on random data
    std::mt19937_64 rng(17);
    Tensor<double> x = random_tensor({29, 17, 2}, rng);
    Tensor<double> a = area_downsample(x, 9, 5);
    Tensor<double> b = area_oracle(x, 9, 5);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10));
}

TEST_CASE("global_average_pool basics") {
    Tensor<double> x({2, 2, 1}, {1, 2, 3, 4});
    CHECK(global_average_pool(x)[0] == doctest::Approx(2.5).epsilon(1e-12));

    Tensor<double> c = Tensor<double>::full({5, 3, 4}, -1.25);
    Tensor<double> yc = global_average_pool(c);
    for (int ch = 0; ch < 4; ++ch) CHECK(yc[ch] == doctest::Approx(-1.25).epsilon(1e-12));

    std::mt19937_64 rng(19);
    Tensor<double> single = random_tensor({1, 1, 6}, rng);
    Tensor<double> ys = global_average_pool(single);
    for (int ch = 0; ch < 6; ++ch) CHECK(ys[ch] == single[ch]);
}

TEST_CASE("dense: identity, parameter count, relu clamp") {
    DenseParams<double> ident = make_dense_params<double>(4, 4, Activation::Linear);
    for (int i = 0; i < 4; ++i) ident.weights.at(0, i, 0) = 0;  // placeholder; set below
    ident.weights = Tensor<double>({4, 4}, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1});
    Tensor<double> x({4}, {0.5, -1.0, 2.0, 3.5});
    Tensor<double> y = dense(x, ident);
    for (int i = 0; i < 4; ++i) CHECK(y[i] == x[i]);

    DenseParams<double> p = make_dense_params<double>(16, 32, Activation::Relu);
    CHECK(p.weights.size() + p.bias.size() == 544);

    DenseParams<double> neg = make_dense_params<double>(3, 5, Activation::Relu);
    for (auto& v : neg.weights.values()) v = -1.0;
    Tensor<double> pos({3}, {1.0, 2.0, 3.0});
    Tensor<double> z = dense(pos, neg);
    for (int i = 0; i < 5; ++i) CHECK(z[i] == 0.0);

    CHECK_THROWS_AS(dense(Tensor<double>({5}), p), ShapeError);
}

TEST_CASE("layer gradients match finite differences") {
    std::mt19937_64 rng(29);

    SUBCASE("conv2d, same and valid, including kernel and bias") {
        for (Padding pad : {Padding::Same, Padding::Valid}) {
            Tensor<double> x = random_tensor({7, 6, 2}, rng);
            ConvParams<double> p = random_conv(3, 3, 2, 3, pad, rng);
            Tensor<double> cot = random_tensor(conv2d_output_shape(x.shape(), p), rng);
            std::vector<double> dk(p.kernel.size(), 0.0), db(p.bias.size(), 0.0);
            Tensor<double> dx = conv2d_backward(x, p, cot, dk, db);
            auto eval = [&] { return dot_loss(conv2d(x, p), cot); };
            CHECK(max_grad_error(eval, x.values(), dx.values()) < kFdTol);
            CHECK(max_grad_error(eval, p.kernel.values(), dk) < kFdTol);
            CHECK(max_grad_error(eval, p.bias.values(), db) < kFdTol);
        }
    }
    SUBCASE("conv2d 5x5 and 1x1 kernels") {
        for (int k : {1, 5}) {
            Tensor<double> x = random_tensor({7, 7, 1}, rng);
            ConvParams<double> p = random_conv(k, k, 1, 2, Padding::Same, rng);
            Tensor<double> cot = random_tensor(conv2d_output_shape(x.shape(), p), rng);
            std::vector<double> dk(p.kernel.size(), 0.0), db(p.bias.size(), 0.0);
            Tensor<double> dx = conv2d_backward(x, p, cot, dk, db);
            auto eval = [&] { return dot_loss(conv2d(x, p), cot); };
            CHECK(max_grad_error(eval, x.values(), dx.values()) < kFdTol);
            CHECK(max_grad_error(eval, p.kernel.values(), dk) < kFdTol);
        }
    }
    SUBCASE("maxpool") {
        Tensor<double> x = random_tensor({9, 7, 2}, rng);
        std::vector<int> argmax;
        Tensor<double> y = maxpool(x, 5, 2, &argmax);
        Tensor<double> cot = random_tensor(y.shape(), rng);
        Tensor<double> dx = maxpool_backward(x.shape(), argmax, cot);
        auto eval = [&] { return dot_loss(maxpool(x), cot); };
        CHECK(max_grad_error(eval, x.values(), dx.values()) < kFdTol);
    }
    SUBCASE("area_downsample") {
        Tensor<double> x = random_tensor({9, 7, 2}, rng);
        Tensor<double> cot = random_tensor({4, 3, 2}, rng);
        Tensor<double> dx = area_downsample_backward(x.shape(), cot);
        auto eval = [&] { return dot_loss(area_downsample(x, 4, 3), cot); };
        CHECK(max_grad_error(eval, x.values(), dx.values()) < kFdTol);
    }
    SUBCASE("global_average_pool") {
        Tensor<double> x = random_tensor({6, 5, 3}, rng);
        Tensor<double> cot = random_tensor({3}, rng);
        Tensor<double> dx = global_average_pool_backward(x.shape(), cot);
        auto eval = [&] { return dot_loss(global_average_pool(x), cot); };
        CHECK(max_grad_error(eval, x.values(), dx.values()) < kFdTol);
    }
    SUBCASE("dense, linear and relu") {
        for (Activation act : {Activation::Linear, Activation::Relu}) {
            Tensor<double> x = random_tensor({6}, rng);
            DenseParams<double> p = make_dense_params<double>(6, 5, act);
            p.weights = random_tensor(p.weights.shape(), rng);
            p.bias = random_tensor(p.bias.shape(), rng);
            Tensor<double> cot = random_tensor({5}, rng);
            Tensor<double> pre;
            dense(x, p, &pre);
            std::vector<double> dw(p.weights.size(), 0.0), db(p.bias.size(), 0.0);
            Tensor<double> dx = dense_backward(x, p, pre, cot, dw, db);
            auto eval = [&] { return dot_loss(dense(x, p), cot); };
            CHECK(max_grad_error(eval, x.values(), dx.values()) < kFdTol);
            CHECK(max_grad_error(eval, p.weights.values(), dw) < kFdTol);
            CHECK(max_grad_error(eval, p.bias.values(), db) < kFdTol);
        }
    }
}
