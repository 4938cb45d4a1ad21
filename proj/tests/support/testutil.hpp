#ifndef SGQC_TESTS_TESTUTIL_HPP
#define SGQC_TESTS_TESTUTIL_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sgqc/tensor.hpp"

namespace sgqc::test {

// Finite-difference settings shared by every gradient check: central
// differences with step 1e-4 in double precision, relative error < 1e-4.
constexpr double kFdStep = 1e-4;
constexpr double kFdTol = 1e-4;

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

template <typename T = double>
Tensor<T> random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0,
                        double hi = 1.0) {
    Tensor<T> t(shape);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(dist(rng));
    return t;
}

// Scalar objective L = sum_i y_i * cot_i used to drive backward passes.
template <typename T>
double dot_loss(const Tensor<T>& y, const Tensor<T>& cot) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        s += static_cast<double>(y[i]) * static_cast<double>(cot[i]);
    return s;
}

// Central difference of eval() w.r.t. one scalar slot.
template <typename F>
double central_diff(F&& eval, double& slot, double h = kFdStep) {
    const double orig = slot;
    slot = orig + h;
    const double up = eval();
    slot = orig - h;
    const double dn = eval();
    slot = orig;
    return (up - dn) / (2.0 * h);
}

// Compares an analytic gradient against central differences over every
// scalar of `values`; returns the worst relative error.
template <typename F>
double max_grad_error(F&& eval, std::vector<double>& values,
                      const std::vector<double>& analytic, double h = kFdStep) {
    double worst = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double fd = central_diff(eval, values[i], h);
        worst = std::max(worst, rel_err(analytic[i], fd));
    }
    return worst;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("sgqc_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

}  // namespace sgqc::test

#endif
