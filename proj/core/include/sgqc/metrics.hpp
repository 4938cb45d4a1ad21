#ifndef SGQC_METRICS_HPP
#define SGQC_METRICS_HPP

#include <array>
#include <span>
#include <string>
#include <vector>

#include "sgqc/labels.hpp"

namespace sgqc {

// 3x3 counts, rows = true label, columns = predicted label, order
// (good, bad, ugly).
struct ConfusionMatrix {
    std::array<std::array<long long, kClassCount>, kClassCount> counts{};

    long long& at(int t, int p) { return counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]; }
    long long at(int t, int p) const { return counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]; }
    long long row_sum(int t) const;
    long long col_sum(int p) const;
    long long total() const;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    ConfusionMatrix confusion;
    std::array<ClassMetrics, kClassCount> per_class{};
    std::array<double, kClassCount> proportions{};  // true-label supports / total
    double f1_weighted = 0.0;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted);

// Precision, recall and F1 per class; zero denominators yield 0.
std::array<ClassMetrics, kClassCount> per_class_metrics(const ConfusionMatrix& cm);

double f1_weighted(std::span<const double> f1, std::span<const double> proportions);

// Full report from a confusion matrix; class proportions are taken from the
// evaluated set's true-label supports.
EvalReport evaluate(const ConfusionMatrix& cm);
EvalReport evaluate(std::span<const int> truth, std::span<const int> predicted);

std::string render_report_csv(const EvalReport& r);
std::string render_report_text(const EvalReport& r);
std::string render_confusion_csv(const ConfusionMatrix& cm, bool normalized);

}  // namespace sgqc

#endif
