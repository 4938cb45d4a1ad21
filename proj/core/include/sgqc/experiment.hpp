#ifndef SGQC_EXPERIMENT_HPP
#define SGQC_EXPERIMENT_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sgqc/metrics.hpp"

namespace sgqc {

struct TrainConfig {
    double learning_rate = 0.001;
    int batch_size = 64;
    int max_epochs = 100;
    int patience = 10;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    void validate() const {
        if (learning_rate <= 0.0) throw Error("learning rate must be positive");
        if (batch_size < 1) throw Error("batch size must be positive");
        if (max_epochs < 1) throw Error("max epochs must be positive");
        if (patience < 1 || patience > max_epochs)
            throw Error("patience must lie in [1, max_epochs]");
        if (adam_beta1 <= 0.0 || adam_beta1 >= 1.0 || adam_beta2 <= 0.0 || adam_beta2 >= 1.0 ||
            adam_epsilon <= 0.0)
            throw Error("invalid Adam hyperparameters");
    }
};

struct EpochRecord {
    int epoch = 0;          // 1-based
    double loss = 0.0;      // mean training cross-entropy
    double val_accuracy = 0.0;
    double seconds = 0.0;
};

struct TrainLog {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;  // 1-based epoch whose parameters were kept
    double best_val_accuracy = 0.0;
    std::string stop_reason;  // "early_stop" or "max_epochs"
};

struct MetricStat {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation across folds
};

struct CrossValResult {
    std::vector<EvalReport> folds;
    MetricStat f1_weighted;
    std::array<MetricStat, kClassCount> f1_class{};
};

struct GridSearchRow {
    int alpha = 0;
    CrossValResult cv;
};

struct GridSearchResult {
    std::vector<GridSearchRow> rows;
    std::size_t best = 0;  // index of the row with the highest mean F1-W
};

std::string render_train_log_csv(const TrainLog& log);
std::string render_crossval_csv(const CrossValResult& cv);
std::string render_crossval_text(const CrossValResult& cv);
std::string render_gridsearch_csv(const GridSearchResult& gs);
std::string render_gridsearch_text(const GridSearchResult& gs);

}  // namespace sgqc

#endif
