#ifndef SGQC_NETWORK_HPP
#define SGQC_NETWORK_HPP

#include <array>
#include <memory>
#include <random>
#include <span>

#include "sgqc/blocks.hpp"
#include "sgqc/labels.hpp"
#include "sgqc/params.hpp"
#include "sgqc/rng.hpp"

namespace sgqc {

struct StageSpec {
    int n_kernels = 1;       // N of the block at this stage
    bool pool_after = true;  // 5x5/stride-2 max pooling after the block
};

// Topology description. standard() yields the production network: area
// downsample to 99x99, four blocks with N = {a, 2a, 4a, 8a} each followed by
// max pooling, then a 32-relu / 32-linear / 3-linear head into softmax.
// Custom topologies (fewer stages, smaller input) are used by tests.
struct NetworkSpec {
    BlockVariant variant = BlockVariant::A;
    int alpha = 1;
    int input_h = 299, input_w = 299, input_c = 1;
    int down_h = 99, down_w = 99;
    std::vector<StageSpec> stages{{1, true}, {2, true}, {4, true}, {8, true}};
    int head_width1 = 32, head_width2 = 32;
    int class_count = kClassCount;
    int se_reduction = 2;

    static NetworkSpec standard(BlockVariant v, int alpha) {
        if (alpha < 1) throw Error("alpha must be a positive integer");
        NetworkSpec s;
        s.variant = v;
        s.alpha = alpha;
        s.stages = {{alpha, true}, {2 * alpha, true}, {4 * alpha, true}, {8 * alpha, true}};
        return s;
    }

    bool operator==(const NetworkSpec& o) const {
        auto stages_eq = [&] {
            if (stages.size() != o.stages.size()) return false;
            for (std::size_t i = 0; i < stages.size(); ++i)
                if (stages[i].n_kernels != o.stages[i].n_kernels ||
                    stages[i].pool_after != o.stages[i].pool_after)
                    return false;
            return true;
        };
        return variant == o.variant && alpha == o.alpha && input_h == o.input_h &&
               input_w == o.input_w && input_c == o.input_c && down_h == o.down_h &&
               down_w == o.down_w && head_width1 == o.head_width1 &&
               head_width2 == o.head_width2 && class_count == o.class_count &&
               se_reduction == o.se_reduction && stages_eq();
    }

    bool is_standard() const { return *this == standard(variant, alpha); }

    BlockSpec block_spec(std::size_t stage) const {
        BlockSpec b;
        b.variant = variant;
        b.n_kernels = stages[stage].n_kernels;
        b.in_channels = stage == 0 ? input_c : 2 * stages[stage - 1].n_kernels;
        b.se_reduction = se_reduction;
        return b;
    }
};

// Closed-form shape walk, one entry per architecture row: input, downsample,
// block/pool alternation, the two hidden dense widths, then the class count.
inline std::vector<Shape> planned_shapes(const NetworkSpec& spec) {
    std::vector<Shape> out;
    out.push_back({spec.input_h, spec.input_w, spec.input_c});
    int h = spec.down_h, w = spec.down_w;
    out.push_back({h, w, spec.input_c});
    for (const auto& st : spec.stages) {
        h -= 2;
        w -= 2;
        out.push_back({h, w, 2 * st.n_kernels});
        if (st.pool_after) {
            h = (h - 5) / 2 + 1;
            w = (w - 5) / 2 + 1;
            out.push_back({h, w, 2 * st.n_kernels});
        }
    }
    out.push_back({spec.head_width1});
    out.push_back({spec.head_width2});
    out.push_back({spec.class_count});
    return out;
}

inline long long network_param_count(const NetworkSpec& spec) {
    long long count = 0;
    for (std::size_t s = 0; s < spec.stages.size(); ++s)
        count += block_param_count(spec.block_spec(s));
    const auto shapes = planned_shapes(spec);
    const Shape& last_spatial = shapes[shapes.size() - 4];
    const long long flat = static_cast<long long>(shape_numel(last_spatial));
    count += flat * spec.head_width1 + spec.head_width1;
    count += static_cast<long long>(spec.head_width1) * spec.head_width2 + spec.head_width2;
    count += static_cast<long long>(spec.head_width2) * spec.class_count + spec.class_count;
    return count;
}

template <typename T>
Tensor<T> flatten(const Tensor<T>& x) {
    return Tensor<T>({static_cast<int>(x.size())}, x.values());
}

template <typename T>
struct NetworkCache {
    Tensor<T> down;                       // area-downsampled input
    std::vector<Tensor<T>> stage_in;      // input to each block
    std::vector<BlockCache<T>> block;     // per-block intermediates
    std::vector<Tensor<T>> block_out;     // block outputs (pool inputs)
    std::vector<std::vector<int>> argmax; // pool argmax caches
    Tensor<T> features;                   // flattened head input
    Tensor<T> fc1_pre, fc1_out;
    Tensor<T> fc2_pre, fc2_out;
    Tensor<T> fc3_pre, logits;
    Tensor<T> probs;
};

// The assembled classifier. Owns its parameters behind a stable pointer so
// the ParamStore view survives moves; forward over frozen parameters is
// const and thread-safe.
template <typename T>
class Network {
public:
    Network(const NetworkSpec& spec, std::uint64_t seed) : spec_(spec) {
        if (spec.stages.empty()) throw Error("network needs at least one block stage");
        params_ = std::make_unique<Params>();
        params_->blocks.reserve(spec.stages.size());
        for (std::size_t s = 0; s < spec.stages.size(); ++s)
            params_->blocks.push_back(make_block_params<T>(spec.block_spec(s)));

        const auto shapes = planned_shapes(spec);
        const int flat = static_cast<int>(shape_numel(shapes[shapes.size() - 4]));
        params_->fc1 = make_dense_params<T>(flat, spec.head_width1, Activation::Relu);
        params_->fc2 = make_dense_params<T>(spec.head_width1, spec.head_width2, Activation::Linear);
        params_->fc3 = make_dense_params<T>(spec.head_width2, spec.class_count, Activation::Linear);

        register_params();
        initialize(seed);
    }

    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;
    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    const NetworkSpec& spec() const { return spec_; }
    ParamStore<T>& store() { return store_; }
    const ParamStore<T>& store() const { return store_; }

    Tensor<T> forward(const Tensor<T>& x, NetworkCache<T>* cache = nullptr) const {
        if (x.rank() != 3 || x.dim(0) != spec_.input_h || x.dim(1) != spec_.input_w ||
            x.dim(2) != spec_.input_c)
            throw ShapeError("network input must be (" + std::to_string(spec_.input_h) + "x" +
                             std::to_string(spec_.input_w) + "x" + std::to_string(spec_.input_c) +
                             "), got " + shape_str(x.shape()));
        NetworkCache<T> local;
        NetworkCache<T>& cc = cache ? *cache : local;
        const std::size_t n_stages = spec_.stages.size();
        cc.stage_in.resize(n_stages);
        cc.block.resize(n_stages);
        cc.block_out.resize(n_stages);
        cc.argmax.resize(n_stages);

        cc.down = area_downsample(x, spec_.down_h, spec_.down_w);
        Tensor<T> cur = cc.down;
        for (std::size_t s = 0; s < n_stages; ++s) {
            cc.stage_in[s] = std::move(cur);
            cc.block_out[s] = block_forward(cc.stage_in[s], spec_.block_spec(s),
                                            params_->blocks[s], &cc.block[s]);
            cur = spec_.stages[s].pool_after
                      ? maxpool(cc.block_out[s], 5, 2, &cc.argmax[s])
                      : cc.block_out[s];
        }
        cc.features = flatten(cur);
        cc.fc1_out = dense(cc.features, params_->fc1, &cc.fc1_pre);
        cc.fc2_out = dense(cc.fc1_out, params_->fc2, &cc.fc2_pre);
        cc.logits = dense(cc.fc2_out, params_->fc3, &cc.fc3_pre);
        cc.probs = softmax(cc.logits);
        return cc.probs;
    }

    // dL/dparams into the flat gradient buffer (layout = store offsets),
    // starting from dL/dprobs. The gradient w.r.t. the raw input is not
    // propagated past the first block, since the downsampling layer has no
    // parameters.
    void backward(const NetworkCache<T>& cc, const Tensor<T>& dprobs,
                  std::span<double> grad) const {
        if (grad.size() != store_.total_scalars())
            throw ShapeError("network backward: gradient buffer size mismatch");
        Tensor<T> dlogits = softmax_backward(cc.probs, dprobs);
        Tensor<T> d = dense_backward(cc.fc2_out, params_->fc3, cc.fc3_pre, dlogits,
                                     slice(grad, head_ids_.fc3w), slice(grad, head_ids_.fc3b));
        d = dense_backward(cc.fc1_out, params_->fc2, cc.fc2_pre, d, slice(grad, head_ids_.fc2w),
                           slice(grad, head_ids_.fc2b));
        d = dense_backward(cc.features, params_->fc1, cc.fc1_pre, d, slice(grad, head_ids_.fc1w),
                           slice(grad, head_ids_.fc1b));
        // undo flatten: same data order
        const Shape tail = spec_.stages.back().pool_after
                               ? maxpool_output_shape(cc.block_out.back().shape(), 5, 2)
                               : cc.block_out.back().shape();
        Tensor<T> dstage(tail, d.values());
        for (std::size_t s = spec_.stages.size(); s-- > 0;) {
            Tensor<T> dblock = spec_.stages[s].pool_after
                                   ? maxpool_backward(cc.block_out[s].shape(), cc.argmax[s], dstage)
                                   : std::move(dstage);
            BlockGrads<T> bg = block_grad_refs(grad, s);
            dstage = block_backward(cc.stage_in[s], spec_.block_spec(s), params_->blocks[s],
                                    cc.block[s], dblock, bg);
        }
    }

    int predict(const Tensor<T>& x) const {
        Tensor<T> p = forward(x);
        int best = 0;
        for (int k = 1; k < spec_.class_count; ++k)
            if (p[static_cast<std::size_t>(k)] > p[static_cast<std::size_t>(best)]) best = k;
        return best;
    }

    // Shapes actually produced by a forward pass, one per architecture row.
    std::vector<Shape> trace_shapes(const Tensor<T>& x) const {
        NetworkCache<T> cc;
        forward(x, &cc);
        std::vector<Shape> out;
        out.push_back(x.shape());
        out.push_back(cc.down.shape());
        for (std::size_t s = 0; s < spec_.stages.size(); ++s) {
            out.push_back(cc.block_out[s].shape());
            if (spec_.stages[s].pool_after)
                out.push_back(maxpool_output_shape(cc.block_out[s].shape(), 5, 2));
        }
        out.push_back(cc.fc1_out.shape());
        out.push_back(cc.fc2_out.shape());
        out.push_back(cc.probs.shape());
        return out;
    }

private:
    struct Params {
        std::vector<BlockParams<T>> blocks;
        DenseParams<T> fc1, fc2, fc3;
    };
    struct BlockIds {
        std::size_t b3k, b3b, b5k, b5b, fk, fb;
        std::size_t sk = SIZE_MAX, sb = SIZE_MAX;
        std::size_t f1w = SIZE_MAX, f1b = SIZE_MAX, f2w = SIZE_MAX, f2b = SIZE_MAX;
    };
    struct HeadIds {
        std::size_t fc1w, fc1b, fc2w, fc2b, fc3w, fc3b;
    };

    void register_params() {
        for (std::size_t s = 0; s < params_->blocks.size(); ++s) {
            auto& b = params_->blocks[s];
            const std::string p = "block" + std::to_string(s + 1);
            BlockIds ids;
            ids.b3k = store_.add(p + "/branch3/kernel", &b.branch3.kernel);
            ids.b3b = store_.add(p + "/branch3/bias", &b.branch3.bias);
            ids.b5k = store_.add(p + "/branch5/kernel", &b.branch5.kernel);
            ids.b5b = store_.add(p + "/branch5/bias", &b.branch5.bias);
            ids.fk = store_.add(p + "/fuse/kernel", &b.fuse.kernel);
            ids.fb = store_.add(p + "/fuse/bias", &b.fuse.bias);
            if (b.skip) {
                ids.sk = store_.add(p + "/skip/kernel", &b.skip->kernel);
                ids.sb = store_.add(p + "/skip/bias", &b.skip->bias);
            }
            if (b.se_fc1) {
                ids.f1w = store_.add(p + "/se_fc1/weights", &b.se_fc1->weights);
                ids.f1b = store_.add(p + "/se_fc1/bias", &b.se_fc1->bias);
                ids.f2w = store_.add(p + "/se_fc2/weights", &b.se_fc2->weights);
                ids.f2b = store_.add(p + "/se_fc2/bias", &b.se_fc2->bias);
            }
            block_ids_.push_back(ids);
        }
        head_ids_.fc1w = store_.add("head/fc1/weights", &params_->fc1.weights);
        head_ids_.fc1b = store_.add("head/fc1/bias", &params_->fc1.bias);
        head_ids_.fc2w = store_.add("head/fc2/weights", &params_->fc2.weights);
        head_ids_.fc2b = store_.add("head/fc2/bias", &params_->fc2.bias);
        head_ids_.fc3w = store_.add("head/fc3/weights", &params_->fc3.weights);
        head_ids_.fc3b = store_.add("head/fc3/bias", &params_->fc3.bias);
    }

    // He-normal kernels (relu fan-in), Glorot-uniform dense weights, zero
    // biases; a single generator consumed in registration order makes the
    // whole initialization a function of the seed.
    void initialize(std::uint64_t seed) {
        store_.seed = seed;
        std::mt19937_64 rng = make_rng(seed);
        auto fill_conv = [&](ConvParams<T>& c) {
            const double fan_in = static_cast<double>(c.kh()) * c.kw() * c.in_channels();
            std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
            for (auto& v : c.kernel.values()) v = static_cast<T>(dist(rng));
        };
        auto fill_dense = [&](DenseParams<T>& d) {
            const double limit =
                std::sqrt(6.0 / (static_cast<double>(d.in_features()) + d.out_features()));
            std::uniform_real_distribution<double> dist(-limit, limit);
            for (auto& v : d.weights.values()) v = static_cast<T>(dist(rng));
        };
        for (auto& b : params_->blocks) {
            fill_conv(b.branch3);
            fill_conv(b.branch5);
            fill_conv(b.fuse);
            if (b.skip) fill_conv(*b.skip);
            if (b.se_fc1) {
                fill_dense(*b.se_fc1);
                fill_dense(*b.se_fc2);
            }
        }
        fill_dense(params_->fc1);
        fill_dense(params_->fc2);
        fill_dense(params_->fc3);
    }

    std::span<double> slice(std::span<double> grad, std::size_t entry_id) const {
        const auto& e = store_.entry(entry_id);
        return grad.subspan(e.offset, e.value->size());
    }

    BlockGrads<T> block_grad_refs(std::span<double> grad, std::size_t s) const {
        const BlockIds& ids = block_ids_[s];
        BlockGrads<T> bg;
        bg.branch3_kernel = slice(grad, ids.b3k);
        bg.branch3_bias = slice(grad, ids.b3b);
        bg.branch5_kernel = slice(grad, ids.b5k);
        bg.branch5_bias = slice(grad, ids.b5b);
        bg.fuse_kernel = slice(grad, ids.fk);
        bg.fuse_bias = slice(grad, ids.fb);
        if (ids.sk != SIZE_MAX) {
            bg.skip_kernel = slice(grad, ids.sk);
            bg.skip_bias = slice(grad, ids.sb);
        }
        if (ids.f1w != SIZE_MAX) {
            bg.se_fc1_weights = slice(grad, ids.f1w);
            bg.se_fc1_bias = slice(grad, ids.f1b);
            bg.se_fc2_weights = slice(grad, ids.f2w);
            bg.se_fc2_bias = slice(grad, ids.f2b);
        }
        return bg;
    }

    NetworkSpec spec_;
    std::unique_ptr<Params> params_;
    ParamStore<T> store_;
    std::vector<BlockIds> block_ids_;
    HeadIds head_ids_{};
};

}  // namespace sgqc

#endif
