#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/* Small dense helpers shared across the library. Everything is double
 * precision and sized for desk-scale problems; loops are written in plain
 * ascending order on purpose, since several equivalence guarantees in the
 * solver rely on summation order being identical across call paths. */

namespace bcred {

inline void require_same_size(std::span<const double> a, std::span<const double> b,
                              const char* where) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(where) + ": size mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    require_same_size(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

/* y += alpha * x */
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    require_same_size(x, y, "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline std::vector<double> subtract(std::span<const double> a, std::span<const double> b) {
    require_same_size(a, b, "subtract");
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline double distance2(std::span<const double> a, std::span<const double> b) {
    require_same_size(a, b, "distance2");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/* Solves M z = rhs for symmetric positive definite M (row-major n x n) by
 * unpivoted Cholesky. Used for the closed-form ridge oracle. */
inline std::vector<double> cholesky_solve(std::vector<double> M, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    if (M.size() != n * n)
        throw std::invalid_argument("cholesky_solve: matrix/rhs dimension mismatch");
    // factor M = L L^T in place (lower triangle)
    for (std::size_t j = 0; j < n; ++j) {
        double d = M[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= M[j * n + k] * M[j * n + k];
        if (!(d > 0.0))
            throw std::invalid_argument("cholesky_solve: matrix is not positive definite");
        const double ljj = std::sqrt(d);
        M[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = M[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= M[i * n + k] * M[j * n + k];
            M[i * n + j] = s / ljj;
        }
    }
    // forward then backward substitution
    for (std::size_t i = 0; i < n; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) s -= M[i * n + k] * rhs[k];
        rhs[i] = s / M[i * n + i];
    }
    for (std::size_t ii = n; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        double s = rhs[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= M[k * n + i] * rhs[k];
        rhs[i] = s / M[i * n + i];
    }
    return rhs;
}

} // namespace bcred
