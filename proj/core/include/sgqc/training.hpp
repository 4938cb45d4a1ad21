#ifndef SGQC_TRAINING_HPP
#define SGQC_TRAINING_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include "sgqc/dataset.hpp"
#include "sgqc/experiment.hpp"
#include "sgqc/network.hpp"
#include "sgqc/parallel.hpp"
#include "sgqc/sampling.hpp"

namespace sgqc {

// Probabilities are floored before the log so the loss stays total.
constexpr double kProbFloor = 1e-12;

template <typename T>
double cross_entropy(const Tensor<T>& probs, int label) {
    if (label < 0 || label >= static_cast<int>(probs.size()))
        throw Error("cross_entropy: label " + std::to_string(label) + " out of range for " +
                    std::to_string(probs.size()) + " classes");
    const double p = static_cast<double>(probs[static_cast<std::size_t>(label)]);
    return -std::log(std::max(p, kProbFloor));
}

// dL/dprobs. Below the floor the loss is locally constant, so the gradient
// is zero there instead of exploding.
template <typename T>
Tensor<T> cross_entropy_backward(const Tensor<T>& probs, int label) {
    if (label < 0 || label >= static_cast<int>(probs.size()))
        throw Error("cross_entropy_backward: label out of range");
    Tensor<T> d(probs.shape());
    const double p = static_cast<double>(probs[static_cast<std::size_t>(label)]);
    if (p > kProbFloor) d[static_cast<std::size_t>(label)] = static_cast<T>(-1.0 / p);
    return d;
}

// One bias-corrected Adam update over every parameter in the store. Moments
// and arithmetic are double precision; the step counter increments once.
template <typename T>
void adam_step(ParamStore<T>& store, std::span<const double> grad, const TrainConfig& cfg) {
    const std::size_t total = store.total_scalars();
    if (grad.size() != total)
        throw ShapeError("adam_step: gradient has " + std::to_string(grad.size()) +
                         " scalars, store has " + std::to_string(total));
    auto& m = store.moment1();
    auto& v = store.moment2();
    if (m.size() != total) m.assign(total, 0.0);
    if (v.size() != total) v.assign(total, 0.0);

    const double t = static_cast<double>(store.bump_step());
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
    for (const auto& e : store.entries()) {
        Tensor<T>& w = *e.value;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const std::size_t k = e.offset + i;
            const double g = grad[k];
            m[k] = cfg.adam_beta1 * m[k] + (1.0 - cfg.adam_beta1) * g;
            v[k] = cfg.adam_beta2 * v[k] + (1.0 - cfg.adam_beta2) * g * g;
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            w[i] = static_cast<T>(static_cast<double>(w[i]) -
                                  cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon));
        }
    }
}

template <typename T>
EvalReport evaluate_network(const Network<T>& net, const Dataset<T>& data, int threads = 0) {
    std::vector<int> truth(data.size()), pred(data.size());
    parallel_for(data.size(), threads, [&](std::size_t i) {
        truth[i] = data[i].label;
        pred[i] = net.predict(data[i].image);
    });
    return evaluate(truth, pred);
}

namespace detail {

// Mean per-sample gradient of one minibatch. Samples are processed in fixed
// chunks whose partial sums are reduced in chunk order, so the result does
// not depend on the thread count.
constexpr std::size_t kGradChunk = 8;

template <typename T>
double batch_gradient(const Network<T>& net, const Dataset<T>& data,
                      std::span<const std::size_t> batch, std::vector<double>& grad,
                      int threads) {
    const std::size_t total = net.store().total_scalars();
    const std::size_t n_chunks = (batch.size() + kGradChunk - 1) / kGradChunk;
    std::vector<std::vector<double>> chunk_grad(n_chunks);
    std::vector<double> losses(batch.size(), 0.0);
    parallel_for(n_chunks, threads, [&](std::size_t c) {
        chunk_grad[c].assign(total, 0.0);
        NetworkCache<T> cache;
        const std::size_t lo = c * kGradChunk;
        const std::size_t hi = std::min(batch.size(), lo + kGradChunk);
        for (std::size_t b = lo; b < hi; ++b) {
            const Sample<T>& s = data[batch[b]];
            Tensor<T> probs = net.forward(s.image, &cache);
            losses[b] = cross_entropy(probs, s.label);
            net.backward(cache, cross_entropy_backward(probs, s.label), chunk_grad[c]);
        }
    });
    grad.assign(total, 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c)
        for (std::size_t k = 0; k < total; ++k) grad[k] += chunk_grad[c][k];
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& g : grad) g *= inv;
    double loss_sum = 0.0;
    for (double l : losses) loss_sum += l;
    return loss_sum;
}

template <typename T>
double accuracy(const Network<T>& net, const Dataset<T>& data, int threads) {
    std::vector<int> hit(data.size(), 0);
    parallel_for(data.size(), threads, [&](std::size_t i) {
        hit[i] = net.predict(data[i].image) == data[i].label ? 1 : 0;
    });
    const long long correct = std::accumulate(hit.begin(), hit.end(), 0LL);
    return data.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace detail

template <typename T>
struct TrainOutcome {
    Network<T> net;
    TrainLog log;
};

// Minibatch Adam training with early stopping on validation accuracy. Epochs
// shuffle with a generator seeded from cfg.seed; the returned network carries
// the parameters of the best-validation epoch (ties keep the earliest).
template <typename T>
TrainOutcome<T> train(const Dataset<T>& train_set, const Dataset<T>& val_set,
                      const NetworkSpec& spec, const TrainConfig& cfg, int threads = 0) {
    cfg.validate();
    if (train_set.empty()) throw Error("training set is empty");
    if (val_set.empty()) throw Error("validation set is empty");
    {
        std::array<bool, kClassCount> seen{};
        for (const auto& s : train_set) seen[static_cast<std::size_t>(s.label)] = true;
        for (int c = 0; c < kClassCount; ++c)
            if (!seen[static_cast<std::size_t>(c)])
                warn(std::string("class '") + label_name(c) + "' is absent from the training set");
    }

    TrainOutcome<T> out{Network<T>(spec, cfg.seed), TrainLog{}};
    Network<T>& net = out.net;
    TrainLog& log = out.log;

    std::mt19937_64 shuffle_rng = make_rng(derive_seed(cfg.seed, 0x7261696eULL));
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> grad;
    std::vector<T> best_values = net.store().snapshot_values();
    double best_acc = -1.0;
    int bad_epochs = 0;
    log.stop_reason = "max_epochs";

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t len = std::min(bs, order.size() - start);
            std::span<const std::size_t> batch(order.data() + start, len);
            loss_sum += detail::batch_gradient(net, train_set, batch, grad, threads);
            adam_step(net.store(), grad, cfg);
        }
        const double val_acc = detail::accuracy(net, val_set, threads);
        const auto t1 = std::chrono::steady_clock::now();

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = loss_sum / static_cast<double>(train_set.size());
        rec.val_accuracy = val_acc;
        rec.seconds = std::chrono::duration<double>(t1 - t0).count();
        log.epochs.push_back(rec);

        if (val_acc > best_acc) {
            best_acc = val_acc;
            log.best_epoch = epoch;
            log.best_val_accuracy = val_acc;
            best_values = net.store().snapshot_values();
            bad_epochs = 0;
        } else if (++bad_epochs >= cfg.patience) {
            log.stop_reason = "early_stop";
            break;
        }
    }
    net.store().restore_values(best_values);
    return out;
}

// Stratified k-fold cross-validation: fold f trains on the other folds with
// the held-out fold serving as the early-stopping validation set, then is
// evaluated on that fold. Fold f uses seed cfg.seed + f.
template <typename T>
CrossValResult cross_validate(const Dataset<T>& data, const NetworkSpec& spec,
                              const TrainConfig& cfg, int folds = 10, int threads = 0,
                              std::vector<TrainLog>* logs = nullptr) {
    std::vector<int> labels(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) labels[i] = data[i].label;
    const std::vector<int> fold_of = fold_assignment(labels, folds, cfg.seed);

    CrossValResult result;
    for (int f = 0; f < folds; ++f) {
        Dataset<T> train_part, val_part;
        for (std::size_t i = 0; i < data.size(); ++i)
            (fold_of[i] == f ? val_part : train_part).push_back(data[i]);
        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = cfg.seed + static_cast<std::uint64_t>(f);
        TrainOutcome<T> outcome = train(train_part, val_part, spec, fold_cfg, threads);
        result.folds.push_back(evaluate_network(outcome.net, val_part, threads));
        if (logs) logs->push_back(std::move(outcome.log));
    }

    auto stat = [&](auto&& metric) {
        MetricStat s;
        const double n = static_cast<double>(result.folds.size());
        for (const auto& r : result.folds) s.mean += metric(r);
        s.mean /= n;
        if (result.folds.size() > 1) {
            double ss = 0.0;
            for (const auto& r : result.folds) {
                const double d = metric(r) - s.mean;
                ss += d * d;
            }
            s.stddev = std::sqrt(ss / (n - 1.0));
        }
        return s;
    };
    result.f1_weighted = stat([](const EvalReport& r) { return r.f1_weighted; });
    for (int c = 0; c < kClassCount; ++c)
        result.f1_class[static_cast<std::size_t>(c)] =
            stat([c](const EvalReport& r) { return r.per_class[static_cast<std::size_t>(c)].f1; });
    return result;
}

// One cross-validation per alpha; the winner is the row with the highest
// mean weighted F1 (ties keep the smaller alpha).
template <typename T>
GridSearchResult grid_search_alpha(const Dataset<T>& data, BlockVariant variant,
                                   const std::set<int>& alphas, const TrainConfig& cfg,
                                   int folds = 10, int threads = 0) {
    if (alphas.empty()) throw Error("grid search needs at least one alpha");
    GridSearchResult gs;
    for (int alpha : alphas) {
        GridSearchRow row;
        row.alpha = alpha;
        row.cv = cross_validate(data, NetworkSpec::standard(variant, alpha), cfg, folds, threads);
        gs.rows.push_back(std::move(row));
    }
    for (std::size_t i = 1; i < gs.rows.size(); ++i)
        if (gs.rows[i].cv.f1_weighted.mean > gs.rows[gs.best].cv.f1_weighted.mean) gs.best = i;
    return gs;
}

}  // namespace sgqc

#endif
