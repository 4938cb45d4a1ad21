#ifndef SGQC_OPS_HPP
#define SGQC_OPS_HPP

#include <algorithm>
#include <cmath>

#include "sgqc/tensor.hpp"

namespace sgqc {

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape(a, b, "add");
    Tensor<T> y(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] + b[i];
    check_finite(y, "add");
    return y;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape(a, b, "mul");
    Tensor<T> y(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] * b[i];
    check_finite(y, "mul");
    return y;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
    check_finite(y, "relu");
    return y;
}

// dL/dx given the pre-activation x. relu'(0) taken as 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& dy) {
    require_same_shape(x, dy, "relu_backward");
    Tensor<T> dx(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
    return dx;
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(x[i]))));
    check_finite(y, "sigmoid");
    return y;
}

// dL/dx from the already-computed output y = sigmoid(x).
template <typename T>
Tensor<T> sigmoid_backward_from_output(const Tensor<T>& y, const Tensor<T>& dy) {
    require_same_shape(y, dy, "sigmoid_backward");
    Tensor<T> dx(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * y[i] * (T(1) - y[i]);
    return dx;
}

// Numerically stable softmax over a rank-1 tensor (max subtraction, double
// accumulation). Output is on the probability simplex.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
    if (logits.rank() != 1)
        throw ShapeError("softmax expects a rank-1 tensor, got " + shape_str(logits.shape()));
    check_finite(logits, "softmax(input)");
    const std::size_t k = logits.size();
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) mx = std::max(mx, static_cast<double>(logits[i]));
    std::vector<double> e(k);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        e[i] = std::exp(static_cast<double>(logits[i]) - mx);
        sum += e[i];
    }
    Tensor<T> y(logits.shape());
    for (std::size_t i = 0; i < k; ++i) y[i] = static_cast<T>(e[i] / sum);
    check_finite(y, "softmax");
    return y;
}

// dL/dlogits from the softmax output y and dL/dy.
template <typename T>
Tensor<T> softmax_backward(const Tensor<T>& y, const Tensor<T>& dy) {
    require_same_shape(y, dy, "softmax_backward");
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        dot += static_cast<double>(dy[i]) * static_cast<double>(y[i]);
    Tensor<T> dx(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i)
        dx[i] = static_cast<T>(static_cast<double>(y[i]) *
                               (static_cast<double>(dy[i]) - dot));
    return dx;
}

// Stacks the channels of b after the channels of a. Spatial extents must match.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.rank() != 3 || b.rank() != 3)
        throw ShapeError("concat_channels expects rank-3 tensors");
    if (a.dim(0) != b.dim(0) || a.dim(1) != b.dim(1))
        throw ShapeError("concat_channels requires equal spatial extents, got " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    const int h = a.dim(0), w = a.dim(1), ca = a.dim(2), cb = b.dim(2);
    Tensor<T> y({h, w, ca + cb});
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            for (int c = 0; c < ca; ++c) y.at(i, j, c) = a.at(i, j, c);
            for (int c = 0; c < cb; ++c) y.at(i, j, ca + c) = b.at(i, j, c);
        }
    return y;
}

// Inverse of concat_channels at a given channel split point.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& x, int ca) {
    if (x.rank() != 3 || ca <= 0 || ca >= x.dim(2))
        throw ShapeError("split_channels: invalid split " + std::to_string(ca) +
                         " for shape " + shape_str(x.shape()));
    const int h = x.dim(0), w = x.dim(1), cb = x.dim(2) - ca;
    Tensor<T> a({h, w, ca}), b({h, w, cb});
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            for (int c = 0; c < ca; ++c) a.at(i, j, c) = x.at(i, j, c);
            for (int c = 0; c < cb; ++c) b.at(i, j, c) = x.at(i, j, ca + c);
        }
    return {std::move(a), std::move(b)};
}

}  // namespace sgqc

#endif
