#ifndef SGQC_LAYERS_HPP
#define SGQC_LAYERS_HPP

#include <cmath>
#include <span>
#include <vector>

#include "sgqc/ops.hpp"
#include "sgqc/tensor.hpp"

namespace sgqc {

enum class Padding { Same, Valid };

enum class Activation { Linear, Relu };

// Convolution weights: kernel is kh x kw x Cin x Cout, bias is Cout.
// Stride is fixed at 1; kernel extents are restricted to {1,3,5}.
template <typename T>
struct ConvParams {
    Tensor<T> kernel;
    Tensor<T> bias;
    Padding padding = Padding::Same;

    int kh() const { return kernel.dim(0); }
    int kw() const { return kernel.dim(1); }
    int in_channels() const { return kernel.dim(2); }
    int out_channels() const { return kernel.dim(3); }
};

template <typename T>
ConvParams<T> make_conv_params(int kh, int kw, int cin, int cout, Padding padding) {
    return ConvParams<T>{Tensor<T>({kh, kw, cin, cout}), Tensor<T>({cout}), padding};
}

// Dense layer weights: weights is In x Out, bias is Out.
template <typename T>
struct DenseParams {
    Tensor<T> weights;
    Tensor<T> bias;
    Activation activation = Activation::Linear;

    int in_features() const { return weights.dim(0); }
    int out_features() const { return weights.dim(1); }
};

template <typename T>
DenseParams<T> make_dense_params(int in, int out, Activation act) {
    return DenseParams<T>{Tensor<T>({in, out}), Tensor<T>({out}), act};
}

namespace detail {

inline void validate_kernel_extent(int k) {
    if (k != 1 && k != 3 && k != 5)
        throw ShapeError("conv2d kernel extent must be 1, 3 or 5, got " + std::to_string(k));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// conv2d

template <typename T>
Shape conv2d_output_shape(const Shape& x, const ConvParams<T>& p) {
    if (x.size() != 3)
        throw ShapeError("conv2d expects an HxWxC input, got " + shape_str(x));
    detail::validate_kernel_extent(p.kh());
    detail::validate_kernel_extent(p.kw());
    if (x[2] != p.in_channels())
        throw ShapeError("conv2d channel mismatch: input " + shape_str(x) + " vs kernel " +
                         shape_str(p.kernel.shape()));
    if (p.padding == Padding::Same) return {x[0], x[1], p.out_channels()};
    if (x[0] < p.kh() || x[1] < p.kw())
        throw ShapeError("conv2d valid padding needs an image at least " +
                         std::to_string(p.kh()) + "x" + std::to_string(p.kw()) + ", got " +
                         shape_str(x));
    return {x[0] - p.kh() + 1, x[1] - p.kw() + 1, p.out_channels()};
}

// No activation is applied here; blocks apply their own nonlinearities.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const ConvParams<T>& p) {
    const Shape out_shape = conv2d_output_shape(x.shape(), p);
    const int h = x.dim(0), w = x.dim(1), cin = x.dim(2);
    const int kh = p.kh(), kw = p.kw(), cout = p.out_channels();
    const int ph = p.padding == Padding::Same ? (kh - 1) / 2 : 0;
    const int pw = p.padding == Padding::Same ? (kw - 1) / 2 : 0;
    const int ho = out_shape[0], wo = out_shape[1];

    Tensor<T> y(out_shape);
    const T* kd = p.kernel.data();
    std::vector<double> acc(static_cast<std::size_t>(cout));
    for (int i0 = 0; i0 < ho; ++i0) {
        for (int j0 = 0; j0 < wo; ++j0) {
            for (int o = 0; o < cout; ++o) acc[o] = static_cast<double>(p.bias[o]);
            for (int di = 0; di < kh; ++di) {
                const int ii = i0 + di - ph;
                if (ii < 0 || ii >= h) continue;
                for (int dj = 0; dj < kw; ++dj) {
                    const int jj = j0 + dj - pw;
                    if (jj < 0 || jj >= w) continue;
                    const T* xp = &x.at(ii, jj, 0);
                    const T* kp = kd + (static_cast<std::size_t>(di) * kw + dj) * cin * cout;
                    for (int ci = 0; ci < cin; ++ci) {
                        const double xv = static_cast<double>(xp[ci]);
                        const T* krow = kp + static_cast<std::size_t>(ci) * cout;
                        for (int o = 0; o < cout; ++o)
                            acc[o] += xv * static_cast<double>(krow[o]);
                    }
                }
            }
            T* yp = &y.at(i0, j0, 0);
            for (int o = 0; o < cout; ++o) yp[o] = static_cast<T>(acc[o]);
        }
    }
    check_finite(y, "conv2d");
    return y;
}

// Returns dL/dx; accumulates dL/dkernel and dL/dbias into the given spans
// (flat, row-major, same layout as the parameter tensors).
template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& x, const ConvParams<T>& p, const Tensor<T>& dy,
                          std::span<double> dkernel, std::span<double> dbias) {
    const Shape out_shape = conv2d_output_shape(x.shape(), p);
    if (dy.shape() != out_shape)
        throw ShapeError("conv2d_backward: dy shape " + shape_str(dy.shape()) +
                         " does not match output " + shape_str(out_shape));
    if (dkernel.size() != p.kernel.size() || dbias.size() != p.bias.size())
        throw ShapeError("conv2d_backward: gradient buffer size mismatch");

    const int h = x.dim(0), w = x.dim(1), cin = x.dim(2);
    const int kh = p.kh(), kw = p.kw(), cout = p.out_channels();
    const int ph = p.padding == Padding::Same ? (kh - 1) / 2 : 0;
    const int pw = p.padding == Padding::Same ? (kw - 1) / 2 : 0;
    const int ho = out_shape[0], wo = out_shape[1];

    std::vector<double> dxacc(x.size(), 0.0);
    const T* kd = p.kernel.data();
    for (int i0 = 0; i0 < ho; ++i0) {
        for (int j0 = 0; j0 < wo; ++j0) {
            const T* dyp = &dy.at(i0, j0, 0);
            for (int o = 0; o < cout; ++o) dbias[o] += static_cast<double>(dyp[o]);
            for (int di = 0; di < kh; ++di) {
                const int ii = i0 + di - ph;
                if (ii < 0 || ii >= h) continue;
                for (int dj = 0; dj < kw; ++dj) {
                    const int jj = j0 + dj - pw;
                    if (jj < 0 || jj >= w) continue;
                    const std::size_t kbase =
                        (static_cast<std::size_t>(di) * kw + dj) * cin * cout;
                    const T* xp = &x.at(ii, jj, 0);
                    double* dxp = &dxacc[(static_cast<std::size_t>(ii) * w + jj) * cin];
                    for (int ci = 0; ci < cin; ++ci) {
                        const T* krow = kd + kbase + static_cast<std::size_t>(ci) * cout;
                        double* dkrow = dkernel.data() + kbase + static_cast<std::size_t>(ci) * cout;
                        const double xv = static_cast<double>(xp[ci]);
                        double s = 0.0;
                        for (int o = 0; o < cout; ++o) {
                            const double d = static_cast<double>(dyp[o]);
                            s += static_cast<double>(krow[o]) * d;
                            dkrow[o] += xv * d;
                        }
                        dxp[ci] += s;
                    }
                }
            }
        }
    }
    Tensor<T> dx(x.shape());
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = static_cast<T>(dxacc[i]);
    return dx;
}

// ---------------------------------------------------------------------------
// maxpool (valid pooling, 5x5 window, stride 2 in the network)

inline Shape maxpool_output_shape(const Shape& x, int window, int stride) {
    if (x.size() != 3)
        throw ShapeError("maxpool expects an HxWxC input, got " + shape_str(x));
    if (x[0] < window || x[1] < window)
        throw ShapeError("maxpool input " + shape_str(x) + " smaller than window " +
                         std::to_string(window));
    return {(x[0] - window) / stride + 1, (x[1] - window) / stride + 1, x[2]};
}

// argmax, when given, receives the flat input index that won each output cell
// (first in row-major scan order on ties); backward routes gradient there.
template <typename T>
Tensor<T> maxpool(const Tensor<T>& x, int window = 5, int stride = 2,
                  std::vector<int>* argmax = nullptr) {
    const Shape out_shape = maxpool_output_shape(x.shape(), window, stride);
    const int w = x.dim(1), c = x.dim(2);
    const int ho = out_shape[0], wo = out_shape[1];
    Tensor<T> y(out_shape);
    if (argmax) argmax->assign(y.size(), -1);
    for (int i0 = 0; i0 < ho; ++i0) {
        for (int j0 = 0; j0 < wo; ++j0) {
            for (int ch = 0; ch < c; ++ch) {
                T best{};
                int best_idx = -1;
                for (int di = 0; di < window; ++di) {
                    for (int dj = 0; dj < window; ++dj) {
                        const int ii = i0 * stride + di, jj = j0 * stride + dj;
                        const int idx = (ii * w + jj) * c + ch;
                        const T v = x[static_cast<std::size_t>(idx)];
                        if (best_idx < 0 || v > best) {
                            best = v;
                            best_idx = idx;
                        }
                    }
                }
                y.at(i0, j0, ch) = best;
                if (argmax)
                    (*argmax)[(static_cast<std::size_t>(i0) * wo + j0) * c + ch] = best_idx;
            }
        }
    }
    check_finite(y, "maxpool");
    return y;
}

template <typename T>
Tensor<T> maxpool_backward(const Shape& x_shape, const std::vector<int>& argmax,
                           const Tensor<T>& dy) {
    Tensor<T> dx(x_shape);
    if (argmax.size() != dy.size())
        throw ShapeError("maxpool_backward: argmax cache does not match dy");
    for (std::size_t i = 0; i < dy.size(); ++i)
        dx[static_cast<std::size_t>(argmax[i])] += dy[i];
    return dx;
}

// ---------------------------------------------------------------------------
// area-interpolation downsampling

namespace detail {

struct AxisSeg {
    int first = 0;
    std::vector<double> weights;  // fractional coverage of each source cell
};

// Coverage of each output box [i*s, (i+1)*s) over unit source cells.
inline std::vector<AxisSeg> area_axis_weights(int in, int out) {
    const double s = static_cast<double>(in) / out;
    std::vector<AxisSeg> segs(static_cast<std::size_t>(out));
    for (int i = 0; i < out; ++i) {
        const double lo = i * s;
        const double hi = (i + 1 == out) ? static_cast<double>(in) : (i + 1) * s;
        int first = static_cast<int>(std::floor(lo));
        AxisSeg seg;
        seg.first = first;
        for (int r = first; r < in && r < static_cast<int>(std::ceil(hi)); ++r) {
            const double overlap = std::min(hi, static_cast<double>(r + 1)) -
                                   std::max(lo, static_cast<double>(r));
            if (overlap <= 0.0) break;
            seg.weights.push_back(overlap);
        }
        segs[static_cast<std::size_t>(i)] = std::move(seg);
    }
    return segs;
}

}  // namespace detail

// Each output pixel is the average of its (possibly fractional) source box.
// Non-learnable; preserves the image mean.
template <typename T>
Tensor<T> area_downsample(const Tensor<T>& x, int target_h, int target_w) {
    if (x.rank() != 3)
        throw ShapeError("area_downsample expects an HxWxC input, got " + shape_str(x.shape()));
    const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
    if (target_h >= h || target_w >= w || target_h < 1 || target_w < 1)
        throw ShapeError("area_downsample: target " + std::to_string(target_h) + "x" +
                         std::to_string(target_w) + " is not strictly smaller than input " +
                         shape_str(x.shape()));
    const auto rows = detail::area_axis_weights(h, target_h);
    const auto cols = detail::area_axis_weights(w, target_w);
    const double box_area = (static_cast<double>(h) / target_h) * (static_cast<double>(w) / target_w);

    Tensor<T> y({target_h, target_w, c});
    std::vector<double> acc(static_cast<std::size_t>(c));
    for (int i = 0; i < target_h; ++i) {
        for (int j = 0; j < target_w; ++j) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t ri = 0; ri < rows[i].weights.size(); ++ri) {
                const int r = rows[i].first + static_cast<int>(ri);
                const double wr = rows[i].weights[ri];
                for (std::size_t cj = 0; cj < cols[j].weights.size(); ++cj) {
                    const int cc = cols[j].first + static_cast<int>(cj);
                    const double wgt = wr * cols[j].weights[cj];
                    const T* xp = &x.at(r, cc, 0);
                    for (int ch = 0; ch < c; ++ch)
                        acc[ch] += wgt * static_cast<double>(xp[ch]);
                }
            }
            T* yp = &y.at(i, j, 0);
            for (int ch = 0; ch < c; ++ch) yp[ch] = static_cast<T>(acc[ch] / box_area);
        }
    }
    check_finite(y, "area_downsample");
    return y;
}

// Gradient distributes by the same fractional-coverage weights.
template <typename T>
Tensor<T> area_downsample_backward(const Shape& x_shape, const Tensor<T>& dy) {
    const int h = x_shape[0], w = x_shape[1], c = x_shape[2];
    const int th = dy.dim(0), tw = dy.dim(1);
    const auto rows = detail::area_axis_weights(h, th);
    const auto cols = detail::area_axis_weights(w, tw);
    const double box_area = (static_cast<double>(h) / th) * (static_cast<double>(w) / tw);

    std::vector<double> dxacc(shape_numel(x_shape), 0.0);
    for (int i = 0; i < th; ++i) {
        for (int j = 0; j < tw; ++j) {
            const T* dyp = &dy.at(i, j, 0);
            for (std::size_t ri = 0; ri < rows[i].weights.size(); ++ri) {
                const int r = rows[i].first + static_cast<int>(ri);
                const double wr = rows[i].weights[ri];
                for (std::size_t cj = 0; cj < cols[j].weights.size(); ++cj) {
                    const int cc = cols[j].first + static_cast<int>(cj);
                    const double wgt = wr * cols[j].weights[cj] / box_area;
                    double* dxp = &dxacc[(static_cast<std::size_t>(r) * w + cc) * c];
                    for (int ch = 0; ch < c; ++ch)
                        dxp[ch] += wgt * static_cast<double>(dyp[ch]);
                }
            }
        }
    }
    Tensor<T> dx(x_shape);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = static_cast<T>(dxacc[i]);
    return dx;
}

// ---------------------------------------------------------------------------
// global average pooling

template <typename T>
Tensor<T> global_average_pool(const Tensor<T>& x) {
    if (x.rank() != 3)
        throw ShapeError("global_average_pool expects an HxWxC input, got " +
                         shape_str(x.shape()));
    const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
    std::vector<double> acc(static_cast<std::size_t>(c), 0.0);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const T* xp = &x.at(i, j, 0);
            for (int ch = 0; ch < c; ++ch) acc[ch] += static_cast<double>(xp[ch]);
        }
    Tensor<T> y({c});
    const double n = static_cast<double>(h) * w;
    for (int ch = 0; ch < c; ++ch) y[static_cast<std::size_t>(ch)] = static_cast<T>(acc[ch] / n);
    check_finite(y, "global_average_pool");
    return y;
}

template <typename T>
Tensor<T> global_average_pool_backward(const Shape& x_shape, const Tensor<T>& dy) {
    const int h = x_shape[0], w = x_shape[1], c = x_shape[2];
    Tensor<T> dx(x_shape);
    const double n = static_cast<double>(h) * w;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            T* dxp = &dx.at(i, j, 0);
            for (int ch = 0; ch < c; ++ch)
                dxp[ch] = static_cast<T>(static_cast<double>(dy[static_cast<std::size_t>(ch)]) / n);
        }
    return dx;
}

// ---------------------------------------------------------------------------
// dense

// y = activation(W^T x + b). The pre-activation is written to *pre when the
// caller needs it for backward.
template <typename T>
Tensor<T> dense(const Tensor<T>& x, const DenseParams<T>& p, Tensor<T>* pre = nullptr) {
    if (x.rank() != 1 || x.dim(0) != p.in_features())
        throw ShapeError("dense: input length " + shape_str(x.shape()) +
                         " does not match weights " + shape_str(p.weights.shape()));
    const int in = p.in_features(), out = p.out_features();
    std::vector<double> acc(static_cast<std::size_t>(out));
    for (int o = 0; o < out; ++o) acc[o] = static_cast<double>(p.bias[o]);
    const T* wd = p.weights.data();
    for (int i = 0; i < in; ++i) {
        const double xv = static_cast<double>(x[static_cast<std::size_t>(i)]);
        const T* wrow = wd + static_cast<std::size_t>(i) * out;
        for (int o = 0; o < out; ++o) acc[o] += xv * static_cast<double>(wrow[o]);
    }
    Tensor<T> z({out});
    for (int o = 0; o < out; ++o) z[static_cast<std::size_t>(o)] = static_cast<T>(acc[o]);
    if (pre) *pre = z;
    Tensor<T> y = p.activation == Activation::Relu ? relu(z) : std::move(z);
    check_finite(y, "dense");
    return y;
}

template <typename T>
Tensor<T> dense_backward(const Tensor<T>& x, const DenseParams<T>& p, const Tensor<T>& pre,
                         const Tensor<T>& dy, std::span<double> dweights,
                         std::span<double> dbias) {
    const int in = p.in_features(), out = p.out_features();
    if (dweights.size() != p.weights.size() || dbias.size() != p.bias.size())
        throw ShapeError("dense_backward: gradient buffer size mismatch");
    Tensor<T> dpre = p.activation == Activation::Relu ? relu_backward(pre, dy) : dy;
    for (int o = 0; o < out; ++o) dbias[o] += static_cast<double>(dpre[static_cast<std::size_t>(o)]);
    Tensor<T> dx({in});
    const T* wd = p.weights.data();
    for (int i = 0; i < in; ++i) {
        const double xv = static_cast<double>(x[static_cast<std::size_t>(i)]);
        const T* wrow = wd + static_cast<std::size_t>(i) * out;
        double* dwrow = dweights.data() + static_cast<std::size_t>(i) * out;
        double s = 0.0;
        for (int o = 0; o < out; ++o) {
            const double d = static_cast<double>(dpre[static_cast<std::size_t>(o)]);
            s += static_cast<double>(wrow[o]) * d;
            dwrow[o] += xv * d;
        }
        dx[static_cast<std::size_t>(i)] = static_cast<T>(s);
    }
    return dx;
}

}  // namespace sgqc

#endif
