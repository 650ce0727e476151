#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcred/blocks.hpp"
#include "bcred/io.hpp"
#include "bcred/la.hpp"
#include "bcred/prng.hpp"

namespace bcred {

/* Linear measurement operator A : R^n -> R^m, stored dense row-major.
 *
 * All kinds realize their entries at construction, so apply/adjoint/block
 * paths share one code path. This matters beyond convenience: block-column
 * products and block gradients iterate the same ascending per-coordinate
 * sums as the full products, which keeps the b=1 solver reduction and the
 * cached-residual variant bit-compatible with the full-vector code.
 *
 * Kinds:
 *   dense              entries given directly (also the matrix-file loader)
 *   gaussian           iid N(0, 1/m) entries, row-major draw order from the
 *                      documented generator; (m, n, seed) pins every bit
 *   subsampled_fourier realified unitary 2-D DFT rows: for each selected
 *                      frequency (k1, k2), in mask row-major order, one row
 *                      of real parts, and after all of those, one row of
 *                      imaginary parts; m = 2 * (selected count)
 */
class ForwardModel {
public:
    enum class Kind { Dense, Gaussian, SubsampledFourier };

    static ForwardModel dense(std::size_t m, std::size_t n, std::vector<double> entries) {
        if (m == 0 || n == 0)
            throw std::invalid_argument("ForwardModel: dimensions must be positive");
        if (entries.size() != m * n)
            throw std::invalid_argument("ForwardModel: entry count " +
                                        std::to_string(entries.size()) + " does not match " +
                                        std::to_string(m) + "x" + std::to_string(n));
        ForwardModel a;
        a.kind_ = Kind::Dense;
        a.m_ = m;
        a.n_ = n;
        a.a_ = std::move(entries);
        return a;
    }

    static ForwardModel identity(std::size_t n) {
        std::vector<double> e(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
        return dense(n, n, std::move(e));
    }

    static ForwardModel gaussian(std::size_t m, std::size_t n, std::uint64_t seed) {
        if (m == 0 || n == 0)
            throw std::invalid_argument("ForwardModel: dimensions must be positive");
        ForwardModel a;
        a.kind_ = Kind::Gaussian;
        a.m_ = m;
        a.n_ = n;
        a.seed_ = seed;
        a.a_.resize(m * n);
        SplitMix64 rng(seed);
        const double scale = 1.0 / std::sqrt(static_cast<double>(m));
        for (double& v : a.a_) v = rng.normal() * scale;
        return a;
    }

    static ForwardModel subsampled_fourier(const FrequencyMask& mask) {
        const std::size_t sel = mask.count();
        if (sel == 0)
            throw std::invalid_argument("ForwardModel: mask selects no frequencies");
        if (mask.selected.size() != mask.height * mask.width)
            throw std::invalid_argument("ForwardModel: malformed mask");
        ForwardModel a;
        a.kind_ = Kind::SubsampledFourier;
        a.mask_height_ = mask.height;
        a.mask_width_ = mask.width;
        a.n_ = mask.height * mask.width;
        a.m_ = 2 * sel;
        a.a_.resize(a.m_ * a.n_);
        const double scale = 1.0 / std::sqrt(static_cast<double>(a.n_));
        const double two_pi = 2.0 * std::numbers::pi;
        std::size_t row = 0;
        for (std::size_t k1 = 0; k1 < mask.height; ++k1)
            for (std::size_t k2 = 0; k2 < mask.width; ++k2) {
                if (!mask.selected[k1 * mask.width + k2]) continue;
                double* re = &a.a_[row * a.n_];
                double* im = &a.a_[(sel + row) * a.n_];
                for (std::size_t p1 = 0; p1 < mask.height; ++p1)
                    for (std::size_t p2 = 0; p2 < mask.width; ++p2) {
                        const double angle =
                            two_pi * (static_cast<double>(k1 * p1) / mask.height +
                                      static_cast<double>(k2 * p2) / mask.width);
                        const std::size_t p = p1 * mask.width + p2;
                        re[p] = std::cos(angle) * scale;
                        im[p] = -std::sin(angle) * scale;
                    }
                ++row;
            }
        return a;
    }

    static ForwardModel from_matrix_file(const std::string& path) {
        MatrixFileData m = read_matrix_file(path);
        return dense(m.rows, m.cols, std::move(m.entries));
    }

    Kind kind() const { return kind_; }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    double entry(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    const char* kind_name() const {
        switch (kind_) {
            case Kind::Gaussian: return "gaussian";
            case Kind::SubsampledFourier: return "subsampled-fourier";
            default: return "dense";
        }
    }

    /* y = A x */
    std::vector<double> apply(std::span<const double> x) const {
        if (x.size() != n_)
            throw std::invalid_argument("ForwardModel::apply: expected length " +
                                        std::to_string(n_) + ", got " + std::to_string(x.size()));
        std::vector<double> y(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            const double* row = &a_[i * n_];
            double s = 0.0;
            for (std::size_t j = 0; j < n_; ++j) s += row[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    /* A^T u */
    std::vector<double> adjoint(std::span<const double> u) const {
        if (u.size() != m_)
            throw std::invalid_argument("ForwardModel::adjoint: expected length " +
                                        std::to_string(m_) + ", got " + std::to_string(u.size()));
        std::vector<double> x(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m_; ++i) s += a_[i * n_ + j] * u[i];
            x[j] = s;
        }
        return x;
    }

    /* A U_i h: touches only the columns of block i. Summation visits block
     * coordinates ascending, which makes the result bit-identical to
     * apply(inject_block(h)) since the skipped terms are exact zeros. */
    std::vector<double> apply_block_columns(const BlockPartition& p, std::size_t i,
                                            std::span<const double> h) const {
        check_partition(p);
        const auto& idx = p.block(i);
        if (h.size() != idx.size())
            throw std::invalid_argument("ForwardModel::apply_block_columns: block size mismatch");
        std::vector<double> y(m_);
        for (std::size_t r = 0; r < m_; ++r) {
            const double* row = &a_[r * n_];
            double s = 0.0;
            for (std::size_t j = 0; j < idx.size(); ++j) s += row[idx[j]] * h[j];
            y[r] = s;
        }
        return y;
    }

    /* U_i^T A^T r, the block component of the least-squares gradient. */
    std::vector<double> block_gradient(const BlockPartition& p, std::size_t i,
                                       std::span<const double> r) const {
        check_partition(p);
        if (r.size() != m_)
            throw std::invalid_argument("ForwardModel::block_gradient: residual length mismatch");
        const auto& idx = p.block(i);
        std::vector<double> g(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const std::size_t col = idx[j];
            double s = 0.0;
            for (std::size_t row = 0; row < m_; ++row) s += a_[row * n_ + col] * r[row];
            g[j] = s;
        }
        return g;
    }

private:
    void check_partition(const BlockPartition& p) const {
        if (p.dim() != n_)
            throw std::invalid_argument("ForwardModel: partition dimension " +
                                        std::to_string(p.dim()) + " does not match columns " +
                                        std::to_string(n_));
    }

    Kind kind_ = Kind::Dense;
    std::size_t m_ = 0, n_ = 0;
    std::uint64_t seed_ = 0;
    std::size_t mask_height_ = 0, mask_width_ = 0;
    std::vector<double> a_; // row-major m x n
};

struct PowerIterationResult {
    double value = 0.0;       // largest eigenvalue estimate of the symmetric op
    std::size_t iterations = 0;
    double rel_change = 0.0;  // relative eigenvalue change at the final step
};

/* Power iteration for the largest eigenvalue of a symmetric PSD operator.
 * Deterministic start (normalized all-ones); if the Rayleigh quotient stalls
 * at zero the start is replaced once by the fixed ramp (1, 2, .., dim). */
template <class Op>
PowerIterationResult power_iteration(Op&& op, std::size_t dim, double tol = 1e-10,
                                     std::size_t max_iters = 10000) {
    std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    PowerIterationResult out;
    double prev = 0.0;
    bool perturbed = false;
    for (std::size_t it = 1; it <= max_iters; ++it) {
        std::vector<double> w = op(std::span<const double>(v));
        const double lambda = dot(v, w);
        out.iterations = it;
        if (lambda == 0.0) {
            if (!perturbed) {
                perturbed = true;
                for (std::size_t j = 0; j < dim; ++j) v[j] = static_cast<double>(j + 1);
                const double nv = norm2(v);
                for (double& x : v) x /= nv;
                continue;
            }
            out.value = 0.0;
            out.rel_change = 0.0;
            return out;
        }
        out.rel_change = std::abs(lambda - prev) / std::abs(lambda);
        out.value = lambda;
        if (out.rel_change < tol) return out;
        const double nw = norm2(w);
        for (std::size_t j = 0; j < dim; ++j) v[j] = w[j] / nw;
        prev = lambda;
    }
    return out;
}

/* Smoothness constants of g(x) = 1/2 ||Ax - y||^2: the global constant
 * L = sigma_max(A)^2 and the per-block constants L_i = sigma_max(A U_i)^2.
 * Estimates are upper-biased by the factor 1 + 1e-6 so that step sizes
 * derived from them stay on the safe side of the admissible range. */
struct LipschitzInfo {
    double l_global = 0.0;
    std::vector<double> l_blocks;
    double l_max = 0.0;
    std::size_t iterations_used = 0; // power-iteration count of the global estimate
    double residual = 0.0;           // its final relative eigenvalue change
};

inline LipschitzInfo estimate_lipschitz(const ForwardModel& a, const BlockPartition& p,
                                        double tol = 1e-10, std::size_t max_iters = 10000) {
    if (p.dim() != a.cols())
        throw std::invalid_argument("estimate_lipschitz: partition dimension mismatch");
    constexpr double bias = 1.0 + 1e-6;
    LipschitzInfo info;

    const auto global = power_iteration(
        [&](std::span<const double> v) { return a.adjoint(a.apply(v)); }, a.cols(), tol,
        max_iters);
    info.l_global = global.value * bias;
    info.iterations_used = global.iterations;
    info.residual = global.rel_change;

    info.l_blocks.resize(p.block_count());
    for (std::size_t i = 0; i < p.block_count(); ++i) {
        const auto r = power_iteration(
            [&](std::span<const double> v) {
                return a.block_gradient(p, i, a.apply_block_columns(p, i, v));
            },
            p.block_size(i), tol, max_iters);
        info.l_blocks[i] = r.value * bias;
    }
    info.l_max = *std::max_element(info.l_blocks.begin(), info.l_blocks.end());
    return info;
}

} // namespace bcred
