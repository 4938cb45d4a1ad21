#include "sgqc/metrics.hpp"

#include <cstdio>

#include "sgqc/error.hpp"

namespace sgqc {

long long ConfusionMatrix::row_sum(int t) const {
    long long s = 0;
    for (int p = 0; p < kClassCount; ++p) s += at(t, p);
    return s;
}

long long ConfusionMatrix::col_sum(int p) const {
    long long s = 0;
    for (int t = 0; t < kClassCount; ++t) s += at(t, p);
    return s;
}

long long ConfusionMatrix::total() const {
    long long s = 0;
    for (int t = 0; t < kClassCount; ++t) s += row_sum(t);
    return s;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size())
        throw Error("confusion: " + std::to_string(truth.size()) + " true labels vs " +
                    std::to_string(predicted.size()) + " predictions");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i], p = predicted[i];
        if (t < 0 || t >= kClassCount || p < 0 || p >= kClassCount)
            throw Error("confusion: label out of range at sample " + std::to_string(i));
        ++cm.at(t, p);
    }
    return cm;
}

std::array<ClassMetrics, kClassCount> per_class_metrics(const ConfusionMatrix& cm) {
    std::array<ClassMetrics, kClassCount> out{};
    for (int l = 0; l < kClassCount; ++l) {
        const double tp = static_cast<double>(cm.at(l, l));
        const double fp = static_cast<double>(cm.col_sum(l)) - tp;
        const double fn = static_cast<double>(cm.row_sum(l)) - tp;
        ClassMetrics& m = out[static_cast<std::size_t>(l)];
        m.precision = (tp + fp) > 0.0 ? tp / (tp + fp) : 0.0;
        m.recall = (tp + fn) > 0.0 ? tp / (tp + fn) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
    }
    return out;
}

double f1_weighted(std::span<const double> f1, std::span<const double> proportions) {
    double s = 0.0;
    for (std::size_t l = 0; l < f1.size(); ++l) s += f1[l] * proportions[l];
    return s;
}

EvalReport evaluate(const ConfusionMatrix& cm) {
    EvalReport r;
    r.confusion = cm;
    r.per_class = per_class_metrics(cm);
    const double total = static_cast<double>(cm.total());
    std::array<double, kClassCount> f1{};
    for (int l = 0; l < kClassCount; ++l) {
        r.proportions[static_cast<std::size_t>(l)] =
            total > 0.0 ? static_cast<double>(cm.row_sum(l)) / total : 0.0;
        f1[static_cast<std::size_t>(l)] = r.per_class[static_cast<std::size_t>(l)].f1;
    }
    r.f1_weighted = f1_weighted(f1, r.proportions);
    return r;
}

EvalReport evaluate(std::span<const int> truth, std::span<const int> predicted) {
    return evaluate(confusion(truth, predicted));
}

namespace {

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
    return buf;
}

}  // namespace

std::string render_report_csv(const EvalReport& r) {
    std::string out = "class,f1,recall,precision,support,proportion\n";
    for (int l = 0; l < kClassCount; ++l) {
        const auto& m = r.per_class[static_cast<std::size_t>(l)];
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%lld,%.6f\n", label_name(l), m.f1,
                      m.recall, m.precision, r.confusion.row_sum(l),
                      r.proportions[static_cast<std::size_t>(l)]);
        out += buf;
    }
    char buf[80];
    std::snprintf(buf, sizeof(buf), "f1_weighted,%.6f,,,,\n", r.f1_weighted);
    out += buf;
    return out;
}

std::string render_report_text(const EvalReport& r) {
    std::string out;
    out += "F1-W (%)  " + pct(r.f1_weighted) + "\n";
    out += "          F1 (%)    Recall (%)  Precision (%)\n";
    const char* names[3] = {"Good", "Bad", "Ugly"};
    for (int l = 0; l < kClassCount; ++l) {
        const auto& m = r.per_class[static_cast<std::size_t>(l)];
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-9s %-9s %-11s %s\n", names[l], pct(m.f1).c_str(),
                      pct(m.recall).c_str(), pct(m.precision).c_str());
        out += buf;
    }
    return out;
}

std::string render_confusion_csv(const ConfusionMatrix& cm, bool normalized) {
    std::string out = "true\\pred,good,bad,ugly\n";
    for (int t = 0; t < kClassCount; ++t) {
        out += label_name(t);
        const long long row = cm.row_sum(t);
        for (int p = 0; p < kClassCount; ++p) {
            char buf[48];
            if (normalized)
                std::snprintf(buf, sizeof(buf), ",%.6f",
                              row > 0 ? static_cast<double>(cm.at(t, p)) / static_cast<double>(row)
                                      : 0.0);
            else
                std::snprintf(buf, sizeof(buf), ",%lld", cm.at(t, p));
            out += buf;
        }
        out += "\n";
    }
    return out;
}

}  // namespace sgqc
