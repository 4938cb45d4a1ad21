#ifndef SGQC_BLOCKS_HPP
#define SGQC_BLOCKS_HPP

#include <optional>
#include <span>

#include "sgqc/layers.hpp"

namespace sgqc {

// The four block flavors: standard, residual skip, sigmoid-gated skip
// (attention), and squeeze-and-excitation channel gating.
enum class BlockVariant { A, B, C, D };

inline char variant_code(BlockVariant v) {
    switch (v) {
        case BlockVariant::A: return 'a';
        case BlockVariant::B: return 'b';
        case BlockVariant::C: return 'c';
        case BlockVariant::D: return 'd';
    }
    return '?';
}

inline BlockVariant variant_from_code(char c) {
    switch (c) {
        case 'a': return BlockVariant::A;
        case 'b': return BlockVariant::B;
        case 'c': return BlockVariant::C;
        case 'd': return BlockVariant::D;
    }
    throw Error(std::string("unknown block variant '") + c + "', expected a|b|c|d");
}

struct BlockSpec {
    BlockVariant variant = BlockVariant::A;
    int n_kernels = 1;     // N: filters per branch; output channels are 2N
    int in_channels = 1;
    int se_reduction = 2;  // variant D only

    int out_channels() const { return 2 * n_kernels; }
    int se_hidden() const {
        const int c = out_channels();
        return std::max(1, (c + se_reduction - 1) / se_reduction);
    }
    bool has_skip() const {
        return variant == BlockVariant::B || variant == BlockVariant::C;
    }
    bool has_se() const { return variant == BlockVariant::D; }
};

// Parallel 3x3 / 5x5 branches (same padding), concatenated and fused by a
// valid 3x3 convolution producing 2N channels; skip and SE parts optional.
template <typename T>
struct BlockParams {
    ConvParams<T> branch3;
    ConvParams<T> branch5;
    ConvParams<T> fuse;
    std::optional<ConvParams<T>> skip;       // 1x1, same, 2N filters (B, C)
    std::optional<DenseParams<T>> se_fc1;    // 2N -> hidden, relu (D)
    std::optional<DenseParams<T>> se_fc2;    // hidden -> 2N, linear (D)
};

template <typename T>
BlockParams<T> make_block_params(const BlockSpec& spec) {
    BlockParams<T> p;
    const int n = spec.n_kernels, cin = spec.in_channels, c2 = spec.out_channels();
    p.branch3 = make_conv_params<T>(3, 3, cin, n, Padding::Same);
    p.branch5 = make_conv_params<T>(5, 5, cin, n, Padding::Same);
    p.fuse = make_conv_params<T>(3, 3, c2, c2, Padding::Valid);
    if (spec.has_skip()) p.skip = make_conv_params<T>(1, 1, cin, c2, Padding::Same);
    if (spec.has_se()) {
        p.se_fc1 = make_dense_params<T>(c2, spec.se_hidden(), Activation::Relu);
        p.se_fc2 = make_dense_params<T>(spec.se_hidden(), c2, Activation::Linear);
    }
    return p;
}

// Exact number of learnable scalars (weights + biases) in a block.
inline long long block_param_count(const BlockSpec& spec) {
    const long long n = spec.n_kernels, cin = spec.in_channels, c2 = spec.out_channels();
    long long count = (3 * 3 * cin * n + n)      // branch3
                    + (5 * 5 * cin * n + n)      // branch5
                    + (3 * 3 * c2 * c2 + c2);    // fuse
    if (spec.has_skip()) count += cin * c2 + c2;
    if (spec.has_se()) {
        const long long hid = spec.se_hidden();
        count += (c2 * hid + hid) + (hid * c2 + c2);
    }
    return count;
}

// Center crop by one pixel per border; aligns the same-padded skip path with
// the valid-fused main path.
template <typename T>
Tensor<T> crop_border1(const Tensor<T>& x) {
    const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
    if (h < 3 || w < 3)
        throw ShapeError("crop_border1 needs spatial extent >= 3, got " + shape_str(x.shape()));
    Tensor<T> y({h - 2, w - 2, c});
    for (int i = 0; i < h - 2; ++i)
        for (int j = 0; j < w - 2; ++j)
            for (int ch = 0; ch < c; ++ch) y.at(i, j, ch) = x.at(i + 1, j + 1, ch);
    return y;
}

template <typename T>
Tensor<T> crop_border1_backward(const Tensor<T>& dy, int h, int w) {
    const int c = dy.dim(2);
    Tensor<T> dx({h, w, c});
    for (int i = 0; i < h - 2; ++i)
        for (int j = 0; j < w - 2; ++j)
            for (int ch = 0; ch < c; ++ch) dx.at(i + 1, j + 1, ch) = dy.at(i, j, ch);
    return dx;
}

template <typename T>
Tensor<T> scale_channels(const Tensor<T>& x, const Tensor<T>& gates) {
    const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
    Tensor<T> y(x.shape());
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const T* xp = &x.at(i, j, 0);
            T* yp = &y.at(i, j, 0);
            for (int ch = 0; ch < c; ++ch) yp[ch] = xp[ch] * gates[static_cast<std::size_t>(ch)];
        }
    return y;
}

template <typename T>
struct BlockCache {
    Tensor<T> a3_pre, a5_pre;  // branch pre-activations
    Tensor<T> cat;             // concatenated branch activations
    Tensor<T> fuse_pre;        // fuse conv output before relu
    Tensor<T> main;            // relu(fuse_pre)
    Tensor<T> gate;            // C: sigmoid(cropped skip); D: channel gates
    Tensor<T> se_input;        // D: GAP of main
    Tensor<T> se_h_pre, se_h;  // D: fc1 pre-activation and activation
    Tensor<T> se_u_pre;        // D: fc2 pre-activation
};

template <typename T>
struct BlockGrads {
    std::span<double> branch3_kernel, branch3_bias;
    std::span<double> branch5_kernel, branch5_bias;
    std::span<double> fuse_kernel, fuse_bias;
    std::span<double> skip_kernel, skip_bias;
    std::span<double> se_fc1_weights, se_fc1_bias;
    std::span<double> se_fc2_weights, se_fc2_bias;
};

template <typename T>
Tensor<T> block_forward(const Tensor<T>& x, const BlockSpec& spec, const BlockParams<T>& params,
                        BlockCache<T>* cache = nullptr) {
    if (x.rank() != 3 || x.dim(2) != spec.in_channels)
        throw ShapeError("block_forward: input " + shape_str(x.shape()) + " does not carry " +
                         std::to_string(spec.in_channels) + " channels");
    if (x.dim(0) < 3 || x.dim(1) < 3)
        throw ShapeError("block_forward needs spatial extent >= 3, got " + shape_str(x.shape()));

    BlockCache<T> local;
    BlockCache<T>& cc = cache ? *cache : local;

    cc.a3_pre = conv2d(x, params.branch3);
    cc.a5_pre = conv2d(x, params.branch5);
    cc.cat = concat_channels(relu(cc.a3_pre), relu(cc.a5_pre));
    cc.fuse_pre = conv2d(cc.cat, params.fuse);
    cc.main = relu(cc.fuse_pre);

    switch (spec.variant) {
        case BlockVariant::A:
            return cc.main;
        case BlockVariant::B: {
            Tensor<T> skipped = crop_border1(conv2d(x, *params.skip));
            return add(cc.main, skipped);
        }
        case BlockVariant::C: {
            cc.gate = sigmoid(crop_border1(conv2d(x, *params.skip)));
            return mul(cc.main, cc.gate);
        }
        case BlockVariant::D: {
            cc.se_input = global_average_pool(cc.main);
            cc.se_h = dense(cc.se_input, *params.se_fc1, &cc.se_h_pre);
            Tensor<T> u = dense(cc.se_h, *params.se_fc2, &cc.se_u_pre);
            cc.gate = sigmoid(u);
            return scale_channels(cc.main, cc.gate);
        }
    }
    throw Error("block_forward: unreachable");
}

template <typename T>
Tensor<T> block_backward(const Tensor<T>& x, const BlockSpec& spec, const BlockParams<T>& params,
                         const BlockCache<T>& cc, const Tensor<T>& dy, BlockGrads<T>& grads) {
    Tensor<T> d_main;
    Tensor<T> d_skip_cropped;  // gradient at the cropped skip output (B, C)

    switch (spec.variant) {
        case BlockVariant::A:
            d_main = dy;
            break;
        case BlockVariant::B:
            d_main = dy;
            d_skip_cropped = dy;
            break;
        case BlockVariant::C:
            d_main = mul(dy, cc.gate);
            d_skip_cropped = sigmoid_backward_from_output(cc.gate, mul(dy, cc.main));
            break;
        case BlockVariant::D: {
            const int c = cc.main.dim(2);
            Tensor<T> d_gate({c});
            for (int i = 0; i < cc.main.dim(0); ++i)
                for (int j = 0; j < cc.main.dim(1); ++j) {
                    const T* mp = &cc.main.at(i, j, 0);
                    const T* dp = &dy.at(i, j, 0);
                    for (int ch = 0; ch < c; ++ch)
                        d_gate[static_cast<std::size_t>(ch)] += dp[ch] * mp[ch];
                }
            Tensor<T> du = sigmoid_backward_from_output(cc.gate, d_gate);
            Tensor<T> dh = dense_backward(cc.se_h, *params.se_fc2, cc.se_u_pre, du,
                                          grads.se_fc2_weights, grads.se_fc2_bias);
            Tensor<T> ds = dense_backward(cc.se_input, *params.se_fc1, cc.se_h_pre, dh,
                                          grads.se_fc1_weights, grads.se_fc1_bias);
            d_main = add(scale_channels(dy, cc.gate),
                         global_average_pool_backward(cc.main.shape(), ds));
            break;
        }
    }

    Tensor<T> d_fuse_pre = relu_backward(cc.fuse_pre, d_main);
    Tensor<T> d_cat =
        conv2d_backward(cc.cat, params.fuse, d_fuse_pre, grads.fuse_kernel, grads.fuse_bias);
    auto [d_a3, d_a5] = split_channels(d_cat, spec.n_kernels);
    Tensor<T> dx = conv2d_backward(x, params.branch3, relu_backward(cc.a3_pre, d_a3),
                                   grads.branch3_kernel, grads.branch3_bias);
    dx = add(dx, conv2d_backward(x, params.branch5, relu_backward(cc.a5_pre, d_a5),
                                 grads.branch5_kernel, grads.branch5_bias));

    if (spec.has_skip()) {
        Tensor<T> d_skip_pre = crop_border1_backward(d_skip_cropped, x.dim(0), x.dim(1));
        dx = add(dx, conv2d_backward(x, *params.skip, d_skip_pre, grads.skip_kernel,
                                     grads.skip_bias));
    }
    return dx;
}

}  // namespace sgqc

#endif
