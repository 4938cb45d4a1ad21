#ifndef SGQC_TENSOR_HPP
#define SGQC_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sgqc/error.hpp"

namespace sgqc {

using Shape = std::vector<int>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (int e : s) n *= static_cast<std::size_t>(e);
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    out += ")";
    return out;
}

// Dense row-major n-d array. Images and activations are H x W x C, dense
// layer weights are In x Out. Values are immutable once an op returns the
// tensor, so sharing across threads for reading is safe.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape)
        : shape_(std::move(shape)), data_(check_extents(shape_), T(0)) {}

    Tensor(Shape shape, std::vector<T> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != check_extents(shape_))
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_str(shape_));
    }

    static Tensor full(Shape shape, T value) {
        Tensor t(std::move(shape));
        for (auto& v : t.data_) v = value;
        return t;
    }

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& values() { return data_; }
    const std::vector<T>& values() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    // H x W x C indexing for rank-3 tensors.
    T& at(int i, int j, int c) {
        return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + c];
    }
    const T& at(int i, int j, int c) const {
        return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + c];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

private:
    static std::size_t check_extents(const Shape& s) {
        for (int e : s)
            if (e <= 0)
                throw ShapeError("tensor extents must be positive, got " + shape_str(s));
        return shape_numel(s);
    }

    Shape shape_;
    std::vector<T> data_;
};

// Fail-fast guard applied at op boundaries: any NaN/Inf inside a result is an
// error there, not ten layers later.
template <typename T>
void check_finite(const Tensor<T>& t, const char* op) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(static_cast<double>(t[i])))
            throw NumericError(std::string(op) + " produced a non-finite value at index " +
                               std::to_string(i));
    }
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + " requires identical shapes, got " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

}  // namespace sgqc

#endif
