#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "bcred/forward_model.hpp"
#include "bcred/la.hpp"
#include "bcred/prox.hpp"

namespace bcred {

enum class SmoothableKind { L1, Tv1d, Tikhonov };

/* Convex regularizer with a closed-form proximal map, the ingredients needed
 * to evaluate its Moreau envelope. Kinds:
 *   l1        h(x) = lambda ||x||_1
 *   tv1d      h(x) = lambda sum |x_{i+1} - x_i|
 *   tikhonov  h(x) = (lambda/2) ||x||^2
 */
class Smoothable {
public:
    static Smoothable l1(double lambda) { return Smoothable(SmoothableKind::L1, lambda); }
    static Smoothable tv1d(double lambda) { return Smoothable(SmoothableKind::Tv1d, lambda); }
    static Smoothable tikhonov(double lambda) {
        return Smoothable(SmoothableKind::Tikhonov, lambda);
    }

    SmoothableKind kind() const { return kind_; }
    double lambda() const { return lambda_; }

    const char* kind_name() const {
        switch (kind_) {
            case SmoothableKind::L1: return "l1";
            case SmoothableKind::Tv1d: return "tv1d";
            case SmoothableKind::Tikhonov: return "tikhonov";
        }
        return "?";
    }

    double value(std::span<const double> x) const {
        switch (kind_) {
            case SmoothableKind::L1: {
                double s = 0.0;
                for (double v : x) s += std::abs(v);
                return lambda_ * s;
            }
            case SmoothableKind::Tv1d: {
                double s = 0.0;
                for (std::size_t i = 0; i + 1 < x.size(); ++i) s += std::abs(x[i + 1] - x[i]);
                return lambda_ * s;
            }
            case SmoothableKind::Tikhonov:
                return 0.5 * lambda_ * norm_sq(x);
        }
        return 0.0;
    }

    /* prox_{mu h}(x) = argmin_z 1/2 ||z - x||^2 + mu h(z) */
    std::vector<double> prox(double mu, std::span<const double> x) const {
        if (!(mu > 0.0))
            throw std::invalid_argument("Smoothable::prox: mu must be positive");
        switch (kind_) {
            case SmoothableKind::L1:
                return soft_threshold(x, mu * lambda_);
            case SmoothableKind::Tv1d:
                return prox_tv1d(x, mu * lambda_);
            case SmoothableKind::Tikhonov: {
                std::vector<double> z(x.size());
                const double c = 1.0 / (1.0 + mu * lambda_);
                for (std::size_t i = 0; i < x.size(); ++i) z[i] = c * x[i];
                return z;
            }
        }
        return {};
    }

    /* Uniform bound on subgradient norms: lambda sqrt(n) for l1 (each
     * coordinate contributes at most lambda) and 2 lambda sqrt(n) for tv1d
     * (each coordinate appears in at most two differences). The Tikhonov
     * gradient is unbounded, so no global constant exists for it. */
    double subgradient_bound(std::size_t n) const {
        const double root = std::sqrt(static_cast<double>(n));
        switch (kind_) {
            case SmoothableKind::L1: return lambda_ * root;
            case SmoothableKind::Tv1d: return 2.0 * lambda_ * root;
            case SmoothableKind::Tikhonov:
                throw std::invalid_argument(
                    "Smoothable::subgradient_bound: tikhonov has no uniform bound");
        }
        return 0.0;
    }

private:
    Smoothable(SmoothableKind k, double lambda) : kind_(k), lambda_(lambda) {
        if (lambda < 0.0)
            throw std::invalid_argument("Smoothable: lambda must be nonnegative");
    }

    SmoothableKind kind_;
    double lambda_;
};

/* Moreau envelope h_mu(x) = min_z { 1/2 ||z - x||^2 + mu h(z) }. */
inline double moreau_value(const Smoothable& h, double mu, std::span<const double> x) {
    const std::vector<double> p = h.prox(mu, x);
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = p[i] - x[i];
        q += d * d;
    }
    return 0.5 * q + mu * h.value(p);
}

/* grad h_mu(x) = x - prox_{mu h}(x); always 1-Lipschitz. */
inline std::vector<double> moreau_gradient(const Smoothable& h, double mu,
                                           std::span<const double> x) {
    const std::vector<double> p = h.prox(mu, x);
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] - p[i];
    return g;
}

/* h(x) - (1/mu) h_mu(x); nonnegative, at most (mu/2) G^2 for any bound G on
 * the subgradient norms of h near x. */
inline double envelope_gap(const Smoothable& h, double mu, std::span<const double> x) {
    if (!(mu > 0.0))
        throw std::invalid_argument("envelope_gap: mu must be positive");
    return h.value(x) - moreau_value(h, mu, x) / mu;
}

/* Smoothed composite objective f_(1/tau)(x) = 1/2 ||Ax - y||^2 + tau h_(1/tau)(x). */
inline double smoothed_objective(const ForwardModel& a, std::span<const double> y,
                                 const Smoothable& h, double tau, std::span<const double> x) {
    if (!(tau > 0.0))
        throw std::invalid_argument("smoothed_objective: tau must be positive");
    if (y.size() != a.rows())
        throw std::invalid_argument("smoothed_objective: measurement length mismatch");
    const std::vector<double> r = a.apply(x);
    double g = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double d = r[i] - y[i];
        g += d * d;
    }
    return 0.5 * g + tau * moreau_value(h, 1.0 / tau, x);
}

} // namespace bcred
