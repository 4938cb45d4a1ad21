#ifndef SGQC_PGM_HPP
#define SGQC_PGM_HPP

#include <string>

#include "sgqc/tensor.hpp"

namespace sgqc {

// Binary PGM (P5, maxval 255). Images are HxWx1 with values in [0,1];
// writing quantizes to round(v * 255), reading maps back to byte / maxval.
void write_pgm(const std::string& path, const Tensor<float>& image);
Tensor<float> read_pgm(const std::string& path);

}  // namespace sgqc

#endif
