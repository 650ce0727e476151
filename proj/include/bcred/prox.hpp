#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace bcred {

/* Elementwise shrinkage, the proximal map of t * ||.||_1. */
inline double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

inline std::vector<double> soft_threshold(std::span<const double> x, double t) {
    if (t < 0.0)
        throw std::invalid_argument("soft_threshold: negative threshold");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = soft_threshold(x[i], t);
    return out;
}

/* Exact proximal map of w * TV(z) = w * sum |z_{i+1} - z_i| on a 1-D signal,
 * computed by the taut-string method.
 *
 * With cumulative sums s_0 = 0, s_k = y_1 + .. + y_k, the solution is the
 * derivative of the shortest path ("taut string") from (0, s_0) to (n, s_n)
 * through the tube s_k +- w at interior k. The string is piecewise linear
 * with knots only where it touches the tube, so it can be built by walking a
 * slope cone forward from the last knot:
 *
 *   smax = min_j (upper_j - anchor)/(j - a)   slope ceiling so far
 *   smin = max_j (lower_j - anchor)/(j - a)   slope floor so far
 *
 * While smin <= smax some straight segment satisfies every constraint seen.
 * The moment a new lower bound forces a slope above smax, the string must
 * touch the upper tube at the index where smax became binding (and
 * symmetrically for the floor); that touch is the next knot, and the scan
 * restarts there. Each restart advances the knot index, so the walk
 * terminates; worst case O(n^2), near-linear on typical signals.
 */
inline std::vector<double> prox_tv1d(std::span<const double> y, double w) {
    if (w < 0.0)
        throw std::invalid_argument("prox_tv1d: negative weight");
    const std::size_t n = y.size();
    std::vector<double> x(y.begin(), y.end());
    if (n <= 1 || w == 0.0) return x;

    std::vector<double> s(n + 1);
    s[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) s[k + 1] = s[k] + y[k];

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::size_t a = 0;   // anchor knot index into s
    double va = 0.0;     // string value at the anchor
    while (a < n) {
        double smax = inf, smin = -inf;
        std::size_t maxind = a, minind = a;
        for (std::size_t k = a + 1; k <= n; ++k) {
            // endpoints are pinned: the tube collapses to s_n at k = n
            const double up = (k < n) ? s[k] + w : s[n];
            const double lo = (k < n) ? s[k] - w : s[n];
            const double d = static_cast<double>(k - a);
            const double su = (up - va) / d;
            const double sl = (lo - va) / d;
            if (sl > smax) {
                // floor at k exceeds the ceiling: knot on the upper tube
                for (std::size_t j = a; j < maxind; ++j) x[j] = smax;
                a = maxind;
                va = s[a] + w;
                break;
            }
            if (su < smin) {
                for (std::size_t j = a; j < minind; ++j) x[j] = smin;
                a = minind;
                va = s[a] - w;
                break;
            }
            if (su < smax) { smax = su; maxind = k; }
            if (sl > smin) { smin = sl; minind = k; }
            if (k == n) {
                // straight run to the fixed endpoint fits inside the cone
                const double c = (s[n] - va) / d;
                for (std::size_t j = a; j < n; ++j) x[j] = c;
                a = n;
            }
        }
    }
    return x;
}

/* Approximate proximal map of weight * TV_iso on an h x w image (row-major),
 * TV_iso(x) = sum_ij sqrt(dx^2 + dy^2) with forward differences and zero at
 * the far edges. Solved on the dual box-constrained problem
 *
 *     minimize_q  F(q) = 1/2 || z - grad^T q ||^2,   ||q_ij||_2 <= weight,
 *
 * by projected gradient with fixed step 1/8 (the 2-D discrete gradient has
 * squared norm at most 8, so the dual objective never increases). Runs for
 * inner_iters iterations or until the per-iteration relative decrease of the
 * dual objective drops to inner_tol. If dual_objective is non-null it
 * receives the objective after every iteration, initial state included.
 */
inline std::vector<double> prox_tv2d(std::span<const double> z, std::size_t h, std::size_t w,
                                     double weight, std::size_t inner_iters, double inner_tol,
                                     std::vector<double>* dual_objective = nullptr) {
    if (weight < 0.0)
        throw std::invalid_argument("prox_tv2d: negative weight");
    if (inner_iters == 0)
        throw std::invalid_argument("prox_tv2d: needs at least one inner iteration");
    if (z.size() != h * w)
        throw std::invalid_argument("prox_tv2d: signal length does not match image dimensions");
    const std::size_t n = h * w;
    std::vector<double> q1(n, 0.0), q2(n, 0.0);  // dual fields, vertical / horizontal
    std::vector<double> x(n), gx(n), gy(n);

    auto primal_from_dual = [&]() {
        // x = z - grad^T q
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j) {
                const std::size_t p = i * w + j;
                double d = 0.0;
                if (i > 0) d += q1[p - w];
                if (i + 1 < h) d -= q1[p];
                if (j > 0) d += q2[p - 1];
                if (j + 1 < w) d -= q2[p];
                x[p] = z[p] - d;
            }
    };
    auto objective = [&]() {
        double f = 0.0;
        for (double v : x) f += v * v;
        return 0.5 * f;
    };

    primal_from_dual();
    double f_prev = objective();
    if (dual_objective) dual_objective->push_back(f_prev);

    for (std::size_t it = 0; it < inner_iters; ++it) {
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j) {
                const std::size_t p = i * w + j;
                gx[p] = (i + 1 < h) ? x[p + w] - x[p] : 0.0;
                gy[p] = (j + 1 < w) ? x[p + 1] - x[p] : 0.0;
            }
        for (std::size_t p = 0; p < n; ++p) {
            double a = q1[p] + 0.125 * gx[p];
            double b = q2[p] + 0.125 * gy[p];
            const double rho = std::sqrt(a * a + b * b);
            if (rho > weight) {
                const double scale = weight / rho;
                a *= scale;
                b *= scale;
            }
            q1[p] = a;
            q2[p] = b;
        }
        primal_from_dual();
        const double f = objective();
        if (dual_objective) dual_objective->push_back(f);
        if (f_prev - f <= inner_tol * std::max(f_prev, 1e-300)) break;
        f_prev = f;
    }
    return x;
}

} // namespace bcred
