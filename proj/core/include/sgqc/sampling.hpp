#ifndef SGQC_SAMPLING_HPP
#define SGQC_SAMPLING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "sgqc/error.hpp"
#include "sgqc/labels.hpp"
#include "sgqc/rng.hpp"

namespace sgqc {

// Largest-remainder apportionment of `total` into parts proportional to
// `weights`; ties go to the lower index. Exact: parts sum to total.
inline std::vector<long long> apportion(long long total, std::span<const double> weights) {
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (wsum <= 0.0) throw Error("apportion: weights must have a positive sum");
    std::vector<long long> parts(weights.size());
    std::vector<std::pair<double, std::size_t>> fracs(weights.size());
    long long assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double target = static_cast<double>(total) * weights[i] / wsum;
        parts[i] = static_cast<long long>(std::floor(target));
        fracs[i] = {target - std::floor(target), i};
        assigned += parts[i];
    }
    std::stable_sort(fracs.begin(), fracs.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (long long r = 0; r < total - assigned; ++r)
        ++parts[fracs[static_cast<std::size_t>(r) % fracs.size()].second];
    // fp guard: floors can only overshoot if a target rounded just above an
    // integer; take the excess back from the smallest remainders.
    for (auto it = fracs.rbegin(); assigned > total && it != fracs.rend(); ++it) {
        if (parts[it->second] > 0) {
            --parts[it->second];
            --assigned;
        }
    }
    return parts;
}

// Stratified holdout: returns a flag per sample, true = held out. Class
// holdout counts follow largest-remainder so the total is exactly
// round(n * fraction).
inline std::vector<bool> stratified_holdout(std::span<const int> labels, double fraction,
                                            std::uint64_t seed) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw Error("holdout fraction must lie strictly between 0 and 1");
    const std::size_t n = labels.size();
    std::vector<std::vector<std::size_t>> per_class(kClassCount);
    for (std::size_t i = 0; i < n; ++i) per_class[static_cast<std::size_t>(labels[i])].push_back(i);

    const long long want = std::llround(static_cast<double>(n) * fraction);
    std::vector<double> weights(kClassCount);
    for (int c = 0; c < kClassCount; ++c)
        weights[static_cast<std::size_t>(c)] = static_cast<double>(per_class[static_cast<std::size_t>(c)].size());
    std::vector<long long> take = apportion(want, weights);
    for (int c = 0; c < kClassCount; ++c)
        take[static_cast<std::size_t>(c)] = std::min<long long>(
            take[static_cast<std::size_t>(c)],
            static_cast<long long>(per_class[static_cast<std::size_t>(c)].size()));

    std::mt19937_64 rng = make_rng(seed);
    std::vector<bool> held(n, false);
    for (int c = 0; c < kClassCount; ++c) {
        auto& idx = per_class[static_cast<std::size_t>(c)];
        std::shuffle(idx.begin(), idx.end(), rng);
        for (long long k = 0; k < take[static_cast<std::size_t>(c)]; ++k)
            held[idx[static_cast<std::size_t>(k)]] = true;
    }
    return held;
}

// Fold index per sample. Stratified round-robin within each class keeps every
// fold's class counts within one of proportional; degrades to plain random
// folds (with a warning) when some present class has fewer samples than folds.
inline std::vector<int> fold_assignment(std::span<const int> labels, int folds,
                                        std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (folds < 2) throw Error("cross-validation needs at least 2 folds");
    if (n < static_cast<std::size_t>(folds))
        throw Error("cross-validation needs at least one sample per fold, got " +
                    std::to_string(n) + " samples for " + std::to_string(folds) + " folds");
    std::vector<std::vector<std::size_t>> per_class(kClassCount);
    for (std::size_t i = 0; i < n; ++i) per_class[static_cast<std::size_t>(labels[i])].push_back(i);

    bool stratifiable = true;
    for (const auto& idx : per_class)
        if (!idx.empty() && idx.size() < static_cast<std::size_t>(folds)) stratifiable = false;

    std::mt19937_64 rng = make_rng(seed);
    std::vector<int> fold(n, 0);
    if (stratifiable) {
        for (auto& idx : per_class) {
            std::shuffle(idx.begin(), idx.end(), rng);
            for (std::size_t k = 0; k < idx.size(); ++k)
                fold[idx[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
        }
    } else {
        warn("too few samples of a class to stratify; using plain random folds");
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t k = 0; k < n; ++k)
            fold[idx[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
    }
    return fold;
}

}  // namespace sgqc

#endif
