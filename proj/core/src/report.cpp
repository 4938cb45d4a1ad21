#include <cstdio>

#include "sgqc/experiment.hpp"

namespace sgqc {

namespace {

std::string stat_cell(const MetricStat& s) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f +- %.2f", s.mean * 100.0, s.stddev * 100.0);
    return buf;
}

void append_stat_csv(std::string& out, const MetricStat& s) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), ",%.4f,%.4f", s.mean * 100.0, s.stddev * 100.0);
    out += buf;
}

}  // namespace

std::string render_train_log_csv(const TrainLog& log) {
    std::string out = "epoch,loss,val_acc\n";
    for (const auto& e : log.epochs) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f\n", e.epoch, e.loss, e.val_accuracy);
        out += buf;
    }
    return out;
}

std::string render_crossval_csv(const CrossValResult& cv) {
    std::string out = "fold,f1w,f1_good,f1_bad,f1_ugly\n";
    for (std::size_t f = 0; f < cv.folds.size(); ++f) {
        const auto& r = cv.folds[f];
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%zu,%.4f,%.4f,%.4f,%.4f\n", f + 1,
                      r.f1_weighted * 100.0, r.per_class[0].f1 * 100.0, r.per_class[1].f1 * 100.0,
                      r.per_class[2].f1 * 100.0);
        out += buf;
    }
    out += "mean";
    append_stat_csv(out, cv.f1_weighted);
    char buf[192];
    std::snprintf(buf, sizeof(buf), ",%.4f,%.4f,%.4f", cv.f1_class[0].mean * 100.0,
                  cv.f1_class[1].mean * 100.0, cv.f1_class[2].mean * 100.0);
    out += buf;
    out += "\nstddev,,";
    std::snprintf(buf, sizeof(buf), ",%.4f,%.4f,%.4f", cv.f1_class[0].stddev * 100.0,
                  cv.f1_class[1].stddev * 100.0, cv.f1_class[2].stddev * 100.0);
    out += buf;
    out += "\n";
    return out;
}

std::string render_crossval_text(const CrossValResult& cv) {
    std::string out = "F1-W (%)        F1-G (%)        F1-B (%)        F1-U (%)\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-15s %-15s %-15s %s\n", stat_cell(cv.f1_weighted).c_str(),
                  stat_cell(cv.f1_class[0]).c_str(), stat_cell(cv.f1_class[1]).c_str(),
                  stat_cell(cv.f1_class[2]).c_str());
    out += buf;
    return out;
}

std::string render_gridsearch_csv(const GridSearchResult& gs) {
    std::string out =
        "alpha,f1w_mean,f1w_std,f1_good_mean,f1_good_std,f1_bad_mean,f1_bad_std,"
        "f1_ugly_mean,f1_ugly_std,best\n";
    for (std::size_t i = 0; i < gs.rows.size(); ++i) {
        const auto& row = gs.rows[i];
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%d", row.alpha);
        out += buf;
        append_stat_csv(out, row.cv.f1_weighted);
        for (const auto& s : row.cv.f1_class) append_stat_csv(out, s);
        out += i == gs.best ? ",1\n" : ",0\n";
    }
    return out;
}

std::string render_gridsearch_text(const GridSearchResult& gs) {
    std::string out = "alpha  F1-W (%)        F1-G (%)        F1-B (%)        F1-U (%)\n";
    for (std::size_t i = 0; i < gs.rows.size(); ++i) {
        const auto& row = gs.rows[i];
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-6d %-15s %-15s %-15s %-15s%s\n", row.alpha,
                      stat_cell(row.cv.f1_weighted).c_str(), stat_cell(row.cv.f1_class[0]).c_str(),
                      stat_cell(row.cv.f1_class[1]).c_str(), stat_cell(row.cv.f1_class[2]).c_str(),
                      i == gs.best ? "  <- best" : "");
        out += buf;
    }
    return out;
}

}  // namespace sgqc
