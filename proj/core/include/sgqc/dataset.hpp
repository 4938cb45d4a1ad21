#ifndef SGQC_DATASET_HPP
#define SGQC_DATASET_HPP

#include <vector>

#include "sgqc/tensor.hpp"

namespace sgqc {

template <typename T>
struct Sample {
    Tensor<T> image;
    int label = 0;
};

template <typename T>
using Dataset = std::vector<Sample<T>>;

}  // namespace sgqc

#endif
