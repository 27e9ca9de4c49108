#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace volterra {

// A state in the span E_B at desk scale: a finite real coordinate array.
using Vec = std::vector<double>;

inline bool is_finite(const Vec& x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

inline void require_same_dim(const Vec& a, const Vec& b, const char* where) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

inline Vec add(const Vec& a, const Vec& b) {
    require_same_dim(a, b, "add");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
    require_same_dim(a, b, "sub");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec scale(const Vec& a, double c) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

// a + c*b
inline Vec axpy(const Vec& a, double c, const Vec& b) {
    require_same_dim(a, b, "axpy");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + c * b[i];
    return r;
}

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

}  // namespace volterra
