#ifndef SGQC_ERROR_HPP
#define SGQC_ERROR_HPP

#include <cstdio>
#include <stdexcept>
#include <string>

namespace sgqc {

// Base class for all failures raised by the library. Subcategories exist so
// the CLI can map them onto distinct one-line diagnostics.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

inline void warn(const std::string& msg) {
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

}  // namespace sgqc

#endif
