#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcred/blocks.hpp"
#include "bcred/la.hpp"
#include "bcred/prng.hpp"
#include "bcred/prox.hpp"

namespace bcred {

enum class DenoiserKind {
    Identity,
    SoftThreshold,  // prox of theta * ||.||_1, elementwise
    Tv1d,           // exact prox of weight * TV on the flattened signal
    Tv2d,           // approximate prox of weight * TV_iso, dual projected gradient
    LinearSmoother, // symmetric separable convolution, half-sample reflect boundary
    GradientStep,   // D(x) = x - (1/tau) grad h(x) for h = (lambda/2) ||x||^2
    Scale,          // D(x) = factor * x; test fixture, rejected by solver configs
};

/* Value-type denoiser. Image kinds (tv2d, linear-smoother) carry their grid
 * geometry; constructing them with height = width = 0 defers geometry to the
 * call site, which then treats the input as a single row. */
class Denoiser {
public:
    static Denoiser identity() { return Denoiser(DenoiserKind::Identity); }

    static Denoiser make_soft_threshold(double theta) {
        if (theta < 0.0)
            throw std::invalid_argument("Denoiser: soft-threshold needs theta >= 0");
        Denoiser d(DenoiserKind::SoftThreshold);
        d.theta_ = theta;
        return d;
    }

    static Denoiser tv1d(double weight) {
        if (weight < 0.0)
            throw std::invalid_argument("Denoiser: tv1d needs weight >= 0");
        Denoiser d(DenoiserKind::Tv1d);
        d.weight_ = weight;
        return d;
    }

    static Denoiser tv2d(double weight, std::size_t height, std::size_t width,
                         std::size_t inner_iters = 100, double inner_tol = 1e-8) {
        if (weight < 0.0)
            throw std::invalid_argument("Denoiser: tv2d needs weight >= 0");
        if (inner_iters == 0)
            throw std::invalid_argument("Denoiser: tv2d needs at least one inner iteration");
        if (!(inner_tol >= 0.0))
            throw std::invalid_argument("Denoiser: tv2d needs inner_tol >= 0");
        Denoiser d(DenoiserKind::Tv2d);
        d.weight_ = weight;
        d.height_ = height;
        d.width_ = width;
        d.inner_iters_ = inner_iters;
        d.inner_tol_ = inner_tol;
        return d;
    }

    static Denoiser linear_smoother(std::vector<double> kernel, std::size_t height,
                                    std::size_t width) {
        if (kernel.empty() || kernel.size() % 2 == 0)
            throw std::invalid_argument("Denoiser: smoother kernel must have odd length");
        double sum = 0.0;
        for (std::size_t i = 0; i < kernel.size(); ++i) {
            if (kernel[i] < 0.0)
                throw std::invalid_argument("Denoiser: smoother kernel must be nonnegative");
            if (kernel[i] != kernel[kernel.size() - 1 - i])
                throw std::invalid_argument("Denoiser: smoother kernel must be symmetric");
            sum += kernel[i];
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("Denoiser: smoother kernel must sum to 1");
        Denoiser d(DenoiserKind::LinearSmoother);
        d.kernel_ = std::move(kernel);
        d.height_ = height;
        d.width_ = width;
        return d;
    }

    /* Nonexpansive iff lambda <= 2 tau; enforced here so a constructed
     * denoiser always satisfies the solver's operator assumptions. */
    static Denoiser gradient_step(double lambda, double tau) {
        if (!(tau > 0.0))
            throw std::invalid_argument("Denoiser: gradient-step needs tau > 0");
        if (lambda < 0.0)
            throw std::invalid_argument("Denoiser: gradient-step needs lambda >= 0");
        if (lambda > 2.0 * tau)
            throw std::invalid_argument("Denoiser: gradient-step needs lambda <= 2*tau "
                                        "(nonexpansiveness)");
        Denoiser d(DenoiserKind::GradientStep);
        d.lambda_ = lambda;
        d.tau_ = tau;
        return d;
    }

    /* Test fixture; deliberately expansive for factor > 1. */
    static Denoiser scaling(double factor) {
        Denoiser d(DenoiserKind::Scale);
        d.factor_ = factor;
        return d;
    }

    DenoiserKind kind() const { return kind_; }
    double theta() const { return theta_; }
    double weight() const { return weight_; }
    double lambda() const { return lambda_; }
    double tau() const { return tau_; }
    double factor() const { return factor_; }
    const std::vector<double>& kernel() const { return kernel_; }
    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t inner_iters() const { return inner_iters_; }
    double inner_tol() const { return inner_tol_; }

    bool usable_in_solver() const { return kind_ != DenoiserKind::Scale; }

    const char* kind_name() const {
        switch (kind_) {
            case DenoiserKind::Identity: return "identity";
            case DenoiserKind::SoftThreshold: return "soft-threshold";
            case DenoiserKind::Tv1d: return "tv1d";
            case DenoiserKind::Tv2d: return "tv2d";
            case DenoiserKind::LinearSmoother: return "smoother";
            case DenoiserKind::GradientStep: return "gradient-step";
            case DenoiserKind::Scale: return "scale";
        }
        return "?";
    }

private:
    explicit Denoiser(DenoiserKind k) : kind_(k) {}

    DenoiserKind kind_;
    double theta_ = 0.0;
    double weight_ = 0.0;
    double lambda_ = 0.0;
    double tau_ = 1.0;
    double factor_ = 1.0;
    std::vector<double> kernel_;
    std::size_t height_ = 0, width_ = 0;
    std::size_t inner_iters_ = 100;
    double inner_tol_ = 1e-8;
};

namespace detail {

/* Half-sample symmetric index fold: ... 1 0 | 0 1 2 .. len-1 | len-1 len-2 ...
 * This extension keeps the smoothing matrix of a symmetric kernel exactly
 * symmetric, which the explicit regularizer h(x) = (tau/2) x^T (x - Wx)
 * depends on. */
inline std::size_t reflect_index(long i, std::size_t len) {
    const long period = 2 * static_cast<long>(len);
    long m = i % period;
    if (m < 0) m += period;
    if (m >= static_cast<long>(len)) m = period - 1 - m;
    return static_cast<std::size_t>(m);
}

inline void smooth_axis(const std::vector<double>& kernel, std::span<const double> in,
                        std::span<double> out, std::size_t count, std::size_t len,
                        std::size_t stride_outer, std::size_t stride_inner) {
    const long radius = static_cast<long>(kernel.size() / 2);
    for (std::size_t c = 0; c < count; ++c) {
        const std::size_t base = c * stride_outer;
        for (std::size_t i = 0; i < len; ++i) {
            double s = 0.0;
            for (long k = -radius; k <= radius; ++k) {
                const std::size_t src = reflect_index(static_cast<long>(i) + k, len);
                s += kernel[static_cast<std::size_t>(k + radius)] * in[base + src * stride_inner];
            }
            out[base + i * stride_inner] = s;
        }
    }
}

inline std::vector<double> smooth_image(const std::vector<double>& kernel,
                                        std::span<const double> x, std::size_t h,
                                        std::size_t w) {
    std::vector<double> tmp(x.size()), out(x.size());
    // along rows, then along columns
    smooth_axis(kernel, x, tmp, h, w, w, 1);
    smooth_axis(kernel, tmp, out, w, h, 1, w);
    return out;
}

} // namespace detail

/* Applies the denoiser to a patch with explicit geometry. Elementwise kinds
 * and tv1d ignore the geometry (tv1d runs on the flattened patch). */
inline std::vector<double> denoise_patch(const Denoiser& d, std::span<const double> x,
                                         std::size_t h, std::size_t w) {
    if (h * w != x.size())
        throw std::invalid_argument("denoise_patch: geometry does not match patch length");
    switch (d.kind()) {
        case DenoiserKind::Identity:
            return std::vector<double>(x.begin(), x.end());
        case DenoiserKind::SoftThreshold:
            return soft_threshold(x, d.theta());
        case DenoiserKind::Tv1d:
            return prox_tv1d(x, d.weight());
        case DenoiserKind::Tv2d:
            return prox_tv2d(x, h, w, d.weight(), d.inner_iters(), d.inner_tol());
        case DenoiserKind::LinearSmoother:
            return detail::smooth_image(d.kernel(), x, h, w);
        case DenoiserKind::GradientStep: {
            std::vector<double> out(x.size());
            const double c = d.lambda() / d.tau();
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - c * x[i];
            return out;
        }
        case DenoiserKind::Scale: {
            std::vector<double> out(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = d.factor() * x[i];
            return out;
        }
    }
    throw std::logic_error("denoise_patch: unreachable");
}

/* Full-vector application using the constructed geometry (a single row when
 * geometry was deferred). */
inline std::vector<double> denoise(const Denoiser& d, std::span<const double> x) {
    std::size_t h = d.height(), w = d.width();
    if (h == 0 || w == 0) {
        h = 1;
        w = x.size();
    }
    return denoise_patch(d, x, h, w);
}

/* Residual operator H(x) = tau (x - D(x)).
 * For the gradient-step kind D(x) = x - (1/tau) grad h(x), so H is evaluated
 * as grad h(x) = lambda x directly; the literal two-subtraction form agrees
 * only to the last ulp, and the coordinate-descent reduction of the solver
 * requires the exact lambda x values. */
inline std::vector<double> red_operator_H(const Denoiser& d, std::span<const double> x,
                                          double tau) {
    if (!(tau > 0.0))
        throw std::invalid_argument("red_operator_H: tau must be positive");
    std::vector<double> out(x.size());
    if (d.kind() == DenoiserKind::GradientStep) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = d.lambda() * x[i];
        return out;
    }
    const std::vector<double> den = denoise(d, x);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = tau * (x[i] - den[i]);
    return out;
}

/* Explicit regularizer value for symmetric linear denoisers,
 * h(x) = (tau/2) x^T (x - Wx). Only meaningful when W is linear and
 * symmetric, so every other kind is rejected. */
inline double red_objective_linear(const Denoiser& d, std::span<const double> x, double tau) {
    if (d.kind() != DenoiserKind::LinearSmoother)
        throw std::invalid_argument("red_objective_linear: denoiser is not a linear smoother");
    if (!(tau > 0.0))
        throw std::invalid_argument("red_objective_linear: tau must be positive");
    const std::vector<double> wx = denoise(d, x);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * (x[i] - wx[i]);
    return 0.5 * tau * s;
}

/* Denoises the tile of block i from a padded window around it; the pad is
 * clipped at the image bounds, so edge tiles see smaller context. With
 * pad >= max(H, W) the window is the whole image and the result equals
 * extract_block(denoise(d, x), p, i) bit for bit. */
inline std::vector<double> blockwise_denoise(const Denoiser& d, std::span<const double> x,
                                             const BlockPartition& p, std::size_t i,
                                             std::size_t pad) {
    if (p.kind() != BlockPartition::Kind::Tiles)
        throw std::invalid_argument("blockwise_denoise: partition must be a tile layout");
    if (x.size() != p.dim())
        throw std::invalid_argument("blockwise_denoise: vector length mismatch");
    const TileRect& t = p.tile_rect(i);
    const std::size_t h = p.image_height(), w = p.image_width();
    const std::size_t pr0 = t.r0 > pad ? t.r0 - pad : 0;
    const std::size_t pc0 = t.c0 > pad ? t.c0 - pad : 0;
    const std::size_t pr1 = std::min(h, t.r1 + pad);
    const std::size_t pc1 = std::min(w, t.c1 + pad);
    const std::size_t ph = pr1 - pr0, pw = pc1 - pc0;

    std::vector<double> patch(ph * pw);
    for (std::size_t r = 0; r < ph; ++r)
        for (std::size_t c = 0; c < pw; ++c)
            patch[r * pw + c] = x[(pr0 + r) * w + (pc0 + c)];

    const std::vector<double> den = denoise_patch(d, patch, ph, pw);

    std::vector<double> out(t.rows() * t.cols());
    for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < t.cols(); ++c)
            out[r * t.cols() + c] = den[(t.r0 - pr0 + r) * pw + (t.c0 - pc0 + c)];
    return out;
}

/* Empirical block nonexpansiveness certificate. Each trial perturbs one
 * random block of a random point and measures the blockwise contraction
 * ratio of the denoiser; the certificate passes when the largest observed
 * ratio stays within 1 + 1e-9. */
struct NonexpansivenessReport {
    std::size_t trials = 0;
    double max_ratio = 0.0;
    bool passed = false;
    std::uint64_t seed = 0;
};

inline NonexpansivenessReport check_block_nonexpansive(const Denoiser& d,
                                                       const BlockPartition& p,
                                                       std::size_t trials, std::uint64_t seed,
                                                       double magnitude = 1.0) {
    if (trials == 0)
        throw std::invalid_argument("check_block_nonexpansive: need at least one trial");
    if (!(magnitude > 0.0))
        throw std::invalid_argument("check_block_nonexpansive: magnitude must be positive");
    SplitMix64 rng(seed);
    NonexpansivenessReport report;
    report.trials = trials;
    report.seed = seed;
    const std::size_t n = p.dim();
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<double> y = rng.normal_vector(n);
        const std::size_t i = static_cast<std::size_t>(rng.below(p.block_count()));
        std::vector<double> hblk = rng.normal_vector(p.block_size(i));
        double hn = norm2(hblk);
        if (hn == 0.0) { hblk[0] = 1.0; hn = 1.0; }
        const double target = magnitude * rng.uniform_pos();
        for (double& v : hblk) v *= target / hn;
        const double hnorm = norm2(hblk); // realized perturbation size

        std::vector<double> x(y);
        add_scaled_block(x, 1.0, hblk, p, i);
        const std::vector<double> dx = denoise(d, x);
        const std::vector<double> dy = denoise(d, y);
        double num = 0.0;
        for (const std::size_t idx : p.block(i)) {
            const double diff = dx[idx] - dy[idx];
            num += diff * diff;
        }
        const double ratio = std::sqrt(num) / hnorm;
        if (ratio > report.max_ratio) report.max_ratio = ratio;
    }
    report.passed = report.max_ratio <= 1.0 + 1e-9;
    return report;
}

} // namespace bcred
