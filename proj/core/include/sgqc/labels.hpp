#ifndef SGQC_LABELS_HPP
#define SGQC_LABELS_HPP

#include <string>

#include "sgqc/error.hpp"

namespace sgqc {

// Quality taxonomy, ordered: clean, moderately noisy, intensely noisy.
constexpr int kClassCount = 3;

enum class Label : int { Good = 0, Bad = 1, Ugly = 2 };

inline const char* label_name(int label) {
    switch (label) {
        case 0: return "good";
        case 1: return "bad";
        case 2: return "ugly";
    }
    return "?";
}

inline int label_from_name(const std::string& s) {
    if (s == "good") return 0;
    if (s == "bad") return 1;
    if (s == "ugly") return 2;
    throw Error("unknown label '" + s + "', expected good|bad|ugly");
}

}  // namespace sgqc

#endif
