#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcred/blocks.hpp"
#include "bcred/denoisers.hpp"
#include "bcred/forward_model.hpp"
#include "bcred/la.hpp"
#include "bcred/moreau.hpp"
#include "bcred/prng.hpp"

namespace bcred {

enum class SelectionRule { Iid, EpochShuffle, Cyclic };

struct Selection {
    SelectionRule rule = SelectionRule::Iid;
    std::uint64_t seed = 0;
};

enum class InitKind { Zeros, AdjointY, Given };

struct InitialPoint {
    InitKind kind = InitKind::Zeros;
    std::vector<double> value; // used by Given
};

struct SolverConfig {
    double tau = 1.0;
    std::optional<double> gamma;    // empty: 1/(L_max + 2 tau) (full-gradient: L_global)
    Selection selection;
    std::size_t iterations = 0;     // outer iterations; one outer = b block updates
    InitialPoint x0;
    std::optional<double> stop_tol; // stop when normalized residual falls below
    bool cached_residual = false;   // maintain r = Ax - y across updates
    bool allow_unsafe_step = false; // accept gamma beyond the guaranteed range
    bool blockwise = false;         // denoise padded tiles instead of the full image
    std::size_t pad = 0;            // tile padding in pixels for blockwise mode
};

/* Inverse problem in RED form: zer(G) with
 * G(x) = A^T (Ax - y) + tau (x - D(x)). When the denoiser is the proximal or
 * gradient map of an explicit regularizer, h can be attached so traces carry
 * the composite objective f = g + h. */
struct RedProblem {
    ForwardModel model;
    std::vector<double> y;
    Denoiser denoiser;
    std::optional<Smoothable> h;
};

struct ConvergenceTrace {
    /* One entry per outer iteration, k = 0 state included. */
    std::vector<double> residual_sq;         // ||G(x^k)||^2
    std::vector<double> normalized_residual; // residual_sq[k] / residual_sq[0]
    std::vector<double> objective;           // f(x^k); empty when h is absent
    std::vector<double> distance;            // ||x^k - x*||; empty without an oracle
    std::vector<double> wall_time_s;         // elapsed since run start; never an artifact
    std::vector<std::size_t> selection_order; // block index of every update
    double gamma = 0.0;
    double l_max = 0.0;
    double l_global = 0.0;
    std::size_t outer_iterations = 0;
    bool unsafe_step = false;       // an out-of-range step size was allowed through
    bool distance_monotone = true;  // no per-update distance increase beyond 1e-12
};

struct SolveResult {
    std::vector<double> x;
    ConvergenceTrace trace;
};

/* Optional instrumentation for a run. before_update fires with (k, x^k)
 * ahead of update k (zero-based), so a t-update run reports x^0 .. x^{t-1};
 * oracle enables the distance series and its monotonicity check. */
struct RunHooks {
    std::span<const double> oracle = {};
    std::function<void(std::size_t, std::span<const double>)> before_update;
};

namespace detail {

inline double resolve_gamma(const SolverConfig& cfg, double l_ref, bool& unsafe) {
    const double cap = 1.0 / (l_ref + 2.0 * cfg.tau);
    if (!cfg.gamma) return cap;
    const double g = *cfg.gamma;
    if (!(g > 0.0))
        throw std::invalid_argument("invalid step-size: gamma must be positive");
    if (g > cap * (1.0 + 1e-9)) {
        if (!cfg.allow_unsafe_step)
            throw std::invalid_argument("invalid step-size: gamma " + std::to_string(g) +
                                        " exceeds the admissible 1/(L + 2 tau) = " +
                                        std::to_string(cap));
        unsafe = true;
    }
    return g;
}

inline std::vector<double> initial_point(const RedProblem& pb, const SolverConfig& cfg) {
    switch (cfg.x0.kind) {
        case InitKind::Zeros:
            return std::vector<double>(pb.model.cols(), 0.0);
        case InitKind::AdjointY:
            return pb.model.adjoint(pb.y);
        case InitKind::Given:
            if (cfg.x0.value.size() != pb.model.cols())
                throw std::invalid_argument("SolverConfig: x0 length " +
                                            std::to_string(cfg.x0.value.size()) +
                                            " does not match dimension " +
                                            std::to_string(pb.model.cols()));
            return cfg.x0.value;
    }
    throw std::logic_error("initial_point: unreachable");
}

inline void validate_problem(const RedProblem& pb, const SolverConfig& cfg) {
    if (pb.y.size() != pb.model.rows())
        throw std::invalid_argument("RedProblem: measurement length " +
                                    std::to_string(pb.y.size()) + " does not match rows " +
                                    std::to_string(pb.model.rows()));
    if (!(cfg.tau > 0.0))
        throw std::invalid_argument("SolverConfig: tau must be positive");
    if (!pb.denoiser.usable_in_solver())
        throw std::invalid_argument("RedProblem: denoiser kind '" +
                                    std::string(pb.denoiser.kind_name()) +
                                    "' is a test fixture and cannot drive a solve");
    if (pb.denoiser.kind() == DenoiserKind::GradientStep && pb.denoiser.tau() != cfg.tau)
        throw std::invalid_argument("SolverConfig: gradient-step denoiser tau " +
                                    std::to_string(pb.denoiser.tau()) +
                                    " must equal solver tau " + std::to_string(cfg.tau));
}

/* H(x) restricted to block i under the configured denoising mode. The
 * gradient-step kind always evaluates as grad h = lambda x, the form the
 * coordinate-descent reduction is exact for. */
inline std::vector<double> h_block(const RedProblem& pb, const SolverConfig& cfg,
                                   const BlockPartition& p, std::size_t i,
                                   std::span<const double> x) {
    const auto& idx = p.block(i);
    std::vector<double> h(idx.size());
    if (pb.denoiser.kind() == DenoiserKind::GradientStep) {
        const double lam = pb.denoiser.lambda();
        for (std::size_t j = 0; j < idx.size(); ++j) h[j] = lam * x[idx[j]];
        return h;
    }
    if (cfg.blockwise) {
        const std::vector<double> d = blockwise_denoise(pb.denoiser, x, p, i, cfg.pad);
        for (std::size_t j = 0; j < idx.size(); ++j) h[j] = cfg.tau * (x[idx[j]] - d[j]);
        return h;
    }
    const std::vector<double> d = denoise(pb.denoiser, x);
    for (std::size_t j = 0; j < idx.size(); ++j)
        h[j] = cfg.tau * (x[idx[j]] - d[idx[j]]);
    return h;
}

inline double objective_value(const RedProblem& pb, std::span<const double> x) {
    const std::vector<double> ax = pb.model.apply(x);
    double g = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) {
        const double dv = ax[i] - pb.y[i];
        g += dv * dv;
    }
    return 0.5 * g + pb.h->value(x);
}

/* Block selection stream; one instance per run so seeds pin the order. */
class BlockSelector {
public:
    BlockSelector(const Selection& sel, std::size_t b)
        : rule_(sel.rule), b_(b), rng_(sel.seed), perm_(b) {
        for (std::size_t i = 0; i < b; ++i) perm_[i] = i;
    }

    std::size_t next(std::size_t k) {
        switch (rule_) {
            case SelectionRule::Cyclic:
                return k % b_;
            case SelectionRule::Iid:
                return static_cast<std::size_t>(rng_.below(b_));
            case SelectionRule::EpochShuffle:
                if (k % b_ == 0) rng_.shuffle(perm_);
                return perm_[k % b_];
        }
        throw std::logic_error("BlockSelector: unreachable");
    }

private:
    SelectionRule rule_;
    std::size_t b_;
    SplitMix64 rng_;
    std::vector<std::size_t> perm_;
};

} // namespace detail

/* G(x) = A^T (Ax - y) + tau (x - D(x)), the operator whose zero set the
 * solvers target. Assembled per coordinate with the same arithmetic the
 * block updates use, so U_i^T G(x) matches the block path bit for bit. */
inline std::vector<double> operator_G(const RedProblem& pb, double tau,
                                      std::span<const double> x) {
    if (!(tau > 0.0))
        throw std::invalid_argument("operator_G: tau must be positive");
    std::vector<double> r = pb.model.apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= pb.y[i];
    std::vector<double> g = pb.model.adjoint(r);
    const std::vector<double> h = red_operator_H(pb.denoiser, x, tau);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += h[j];
    return g;
}

/* Blockwise-mode counterpart: the H part of each block comes from the
 * padded-tile denoiser. */
inline std::vector<double> operator_G_blockwise(const RedProblem& pb, double tau,
                                                const BlockPartition& p,
                                                std::span<const double> x, std::size_t pad) {
    if (!(tau > 0.0))
        throw std::invalid_argument("operator_G_blockwise: tau must be positive");
    std::vector<double> r = pb.model.apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= pb.y[i];
    std::vector<double> g = pb.model.adjoint(r);
    SolverConfig mode;
    mode.tau = tau;
    mode.blockwise = true;
    mode.pad = pad;
    for (std::size_t i = 0; i < p.block_count(); ++i) {
        const std::vector<double> h = detail::h_block(pb, mode, p, i, x);
        const auto& idx = p.block(i);
        for (std::size_t j = 0; j < idx.size(); ++j) g[idx[j]] += h[j];
    }
    return g;
}

/* Block-coordinate solver: each update picks block i_k by the selection rule
 * and applies x <- x - gamma U_i G_i(x), with
 * G_i(x) = U_i^T A^T (Ax - y) + tau (x_i - [D x]_i). Runs exactly
 * total_updates updates; diagnostics are recorded every block_count updates
 * (and at the initial and final states). The cached variant maintains
 * r = Ax - y through rank-one block updates instead of recomputing it. */
inline SolveResult bcred_run_updates(const RedProblem& pb, const BlockPartition& p,
                                     const SolverConfig& cfg, std::size_t total_updates,
                                     const RunHooks& hooks = {}) {
    detail::validate_problem(pb, cfg);
    if (p.dim() != pb.model.cols())
        throw std::invalid_argument("bcred_run: partition dimension mismatch");
    if (cfg.blockwise && p.kind() != BlockPartition::Kind::Tiles)
        throw std::invalid_argument("bcred_run: blockwise denoising needs a tile partition");
    if (!hooks.oracle.empty() && hooks.oracle.size() != pb.model.cols())
        throw std::invalid_argument("bcred_run: oracle length mismatch");

    const std::size_t b = p.block_count();
    const LipschitzInfo lip = estimate_lipschitz(pb.model, p);

    SolveResult out;
    out.trace.l_max = lip.l_max;
    out.trace.l_global = lip.l_global;
    out.trace.gamma = detail::resolve_gamma(cfg, lip.l_max, out.trace.unsafe_step);
    const double gamma = out.trace.gamma;

    std::vector<double> x = detail::initial_point(pb, cfg);
    std::vector<double> r;
    if (cfg.cached_residual) {
        r = pb.model.apply(x);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= pb.y[i];
    }

    const bool track_distance = !hooks.oracle.empty();
    double prev_distance = track_distance ? distance2(x, hooks.oracle) : 0.0;

    const auto started = std::chrono::steady_clock::now();
    double residual0 = 0.0;
    bool stop = false;

    auto record = [&]() {
        std::vector<double> g = cfg.blockwise
                                    ? operator_G_blockwise(pb, cfg.tau, p, x, cfg.pad)
                                    : operator_G(pb, cfg.tau, x);
        const double res = norm_sq(g);
        if (out.trace.residual_sq.empty()) residual0 = res;
        out.trace.residual_sq.push_back(res);
        const double normalized = residual0 > 0.0 ? res / residual0 : 0.0;
        out.trace.normalized_residual.push_back(normalized);
        if (pb.h) out.trace.objective.push_back(detail::objective_value(pb, x));
        if (track_distance) out.trace.distance.push_back(distance2(x, hooks.oracle));
        out.trace.wall_time_s.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
        if (cfg.stop_tol && normalized <= *cfg.stop_tol) stop = true;
    };

    record(); // k = 0
    detail::BlockSelector selector(cfg.selection, b);
    for (std::size_t k = 0; k < total_updates && !stop; ++k) {
        if (hooks.before_update) hooks.before_update(k, x);
        const std::size_t i = selector.next(k);
        out.trace.selection_order.push_back(i);

        if (!cfg.cached_residual) {
            r = pb.model.apply(x);
            for (std::size_t j = 0; j < r.size(); ++j) r[j] -= pb.y[j];
        }
        std::vector<double> u = pb.model.block_gradient(p, i, r);
        const std::vector<double> h = detail::h_block(pb, cfg, p, i, x);
        for (std::size_t j = 0; j < u.size(); ++j) u[j] += h[j];

        if (cfg.cached_residual) {
            const std::vector<double> au = pb.model.apply_block_columns(p, i, u);
            for (std::size_t j = 0; j < r.size(); ++j) r[j] -= gamma * au[j];
        }
        add_scaled_block(x, -gamma, u, p, i);

        if (track_distance) {
            const double dist = distance2(x, hooks.oracle);
            if (dist > prev_distance + 1e-12) out.trace.distance_monotone = false;
            prev_distance = dist;
        }
        if ((k + 1) % b == 0 || k + 1 == total_updates) record();
    }
    out.trace.outer_iterations = out.trace.residual_sq.size() - 1;
    out.x = std::move(x);
    return out;
}

inline SolveResult bcred_run(const RedProblem& pb, const BlockPartition& p,
                             const SolverConfig& cfg, const RunHooks& hooks = {}) {
    return bcred_run_updates(pb, p, cfg, cfg.iterations * p.block_count(), hooks);
}

/* Full-gradient variant: x <- x - gamma G(x), step capped at 1/(L + 2 tau)
 * with the global constant. With a single-block partition bcred_run performs
 * the identical arithmetic, update for update. */
inline SolveResult red_full_run(const RedProblem& pb, const SolverConfig& cfg,
                                const RunHooks& hooks = {}) {
    detail::validate_problem(pb, cfg);
    if (cfg.blockwise)
        throw std::invalid_argument("red_full_run: blockwise denoising is a block-solver mode");
    if (!hooks.oracle.empty() && hooks.oracle.size() != pb.model.cols())
        throw std::invalid_argument("red_full_run: oracle length mismatch");

    const std::size_t n = pb.model.cols();
    const LipschitzInfo lip = estimate_lipschitz(pb.model, BlockPartition::contiguous(n, 1));

    SolveResult out;
    out.trace.l_max = lip.l_max;
    out.trace.l_global = lip.l_global;
    out.trace.gamma = detail::resolve_gamma(cfg, lip.l_global, out.trace.unsafe_step);
    const double gamma = out.trace.gamma;

    std::vector<double> x = detail::initial_point(pb, cfg);
    const bool track_distance = !hooks.oracle.empty();
    double prev_distance = track_distance ? distance2(x, hooks.oracle) : 0.0;

    const auto started = std::chrono::steady_clock::now();
    double residual0 = 0.0;
    bool stop = false;

    auto record = [&](std::span<const double> g) {
        const double res = norm_sq(g);
        if (out.trace.residual_sq.empty()) residual0 = res;
        out.trace.residual_sq.push_back(res);
        const double normalized = residual0 > 0.0 ? res / residual0 : 0.0;
        out.trace.normalized_residual.push_back(normalized);
        if (pb.h) out.trace.objective.push_back(detail::objective_value(pb, x));
        if (track_distance) out.trace.distance.push_back(distance2(x, hooks.oracle));
        out.trace.wall_time_s.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
        if (cfg.stop_tol && normalized <= *cfg.stop_tol) stop = true;
    };

    std::vector<double> g = operator_G(pb, cfg.tau, x);
    record(g);
    for (std::size_t k = 0; k < cfg.iterations && !stop; ++k) {
        if (hooks.before_update) hooks.before_update(k, x);
        for (std::size_t j = 0; j < n; ++j) x[j] -= gamma * g[j];
        if (track_distance) {
            const double dist = distance2(x, hooks.oracle);
            if (dist > prev_distance + 1e-12) out.trace.distance_monotone = false;
            prev_distance = dist;
        }
        g = operator_G(pb, cfg.tau, x);
        record(g);
    }
    out.trace.outer_iterations = out.trace.residual_sq.size() - 1;
    out.x = std::move(x);
    return out;
}

/* Proximal gradient method on f = 1/2 ||Ax - y||^2 + h(x):
 * x <- prox_{gamma h}(x - gamma A^T (Ax - y)), step capped at 1/L. The
 * residual column of the trace carries the squared gradient-mapping norm
 * ||(x - x^+)/gamma||^2. */
inline SolveResult pgm_run(const ForwardModel& a, std::span<const double> y,
                           const Smoothable& h, const SolverConfig& cfg,
                           const RunHooks& hooks = {}) {
    if (y.size() != a.rows())
        throw std::invalid_argument("pgm_run: measurement length mismatch");
    const std::size_t n = a.cols();
    const LipschitzInfo lip = estimate_lipschitz(a, BlockPartition::contiguous(n, 1));

    SolveResult out;
    out.trace.l_max = lip.l_max;
    out.trace.l_global = lip.l_global;
    // the composite step guard is 1/L; reuse the solver guard with tau folded out
    {
        const double cap = lip.l_global > 0.0 ? 1.0 / lip.l_global
                                              : std::numeric_limits<double>::infinity();
        if (!cfg.gamma) {
            out.trace.gamma = lip.l_global > 0.0 ? cap : 1.0;
        } else {
            const double g = *cfg.gamma;
            if (!(g > 0.0))
                throw std::invalid_argument("invalid step-size: gamma must be positive");
            if (g > cap * (1.0 + 1e-9)) {
                if (!cfg.allow_unsafe_step)
                    throw std::invalid_argument("invalid step-size: gamma " +
                                                std::to_string(g) +
                                                " exceeds the admissible 1/L = " +
                                                std::to_string(cap));
                out.trace.unsafe_step = true;
            }
            out.trace.gamma = g;
        }
    }
    const double gamma = out.trace.gamma;

    std::vector<double> x(n, 0.0);
    switch (cfg.x0.kind) {
        case InitKind::Zeros: break;
        case InitKind::AdjointY: x = a.adjoint(y); break;
        case InitKind::Given:
            if (cfg.x0.value.size() != n)
                throw std::invalid_argument("pgm_run: x0 length mismatch");
            x = cfg.x0.value;
            break;
    }

    const bool track_distance = !hooks.oracle.empty();
    if (track_distance && hooks.oracle.size() != n)
        throw std::invalid_argument("pgm_run: oracle length mismatch");

    const auto started = std::chrono::steady_clock::now();
    double residual0 = 0.0;
    bool stop = false;

    auto step_candidate = [&]() {
        std::vector<double> r = a.apply(x);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
        std::vector<double> grad = a.adjoint(r);
        std::vector<double> v(n);
        for (std::size_t j = 0; j < n; ++j) v[j] = x[j] - gamma * grad[j];
        return h.prox(gamma, v);
    };
    auto record = [&](std::span<const double> xplus) {
        double gm = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = (x[j] - xplus[j]) / gamma;
            gm += d * d;
        }
        if (out.trace.residual_sq.empty()) residual0 = gm;
        out.trace.residual_sq.push_back(gm);
        const double normalized = residual0 > 0.0 ? gm / residual0 : 0.0;
        out.trace.normalized_residual.push_back(normalized);
        std::vector<double> r = a.apply(x);
        double g2 = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double d = r[i] - y[i];
            g2 += d * d;
        }
        out.trace.objective.push_back(0.5 * g2 + h.value(x));
        if (track_distance) out.trace.distance.push_back(distance2(x, hooks.oracle));
        out.trace.wall_time_s.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
        if (cfg.stop_tol && normalized <= *cfg.stop_tol) stop = true;
    };

    std::vector<double> xplus = step_candidate();
    record(xplus);
    for (std::size_t k = 0; k < cfg.iterations && !stop; ++k) {
        if (hooks.before_update) hooks.before_update(k, x);
        x = std::move(xplus);
        xplus = step_candidate();
        record(xplus);
    }
    out.trace.outer_iterations = out.trace.residual_sq.size() - 1;
    out.x = std::move(x);
    return out;
}

/* Ergodic residual guarantee for the block solver after t updates with step
 * 0 < gamma <= 1/(L_max + 2 tau):
 *   E[ (1/t) sum_{k=1..t} ||G(x^{k-1})||^2 ] <= b (L_max + 2 tau) R0^2 / (gamma t). */
inline double theorem1_bound(std::size_t b, double l_max, double tau, double gamma, double r0,
                             std::size_t t) {
    if (b == 0 || t == 0)
        throw std::invalid_argument("theorem1_bound: b and t must be positive");
    if (!(gamma > 0.0) || !(tau > 0.0) || r0 < 0.0)
        throw std::invalid_argument("theorem1_bound: invalid parameters");
    return static_cast<double>(b) * (l_max + 2.0 * tau) * r0 * r0 /
           (gamma * static_cast<double>(t));
}

/* Objective guarantee for proximal denoisers D = prox_{(1/tau) h} after t
 * updates: E[f(x^t)] - f* <= 2 b R0^2 / (gamma t) + G0^2 / (2 tau). */
inline double theorem2_bound(std::size_t b, double gamma, double r0, double g0, double tau,
                             std::size_t t) {
    if (b == 0 || t == 0)
        throw std::invalid_argument("theorem2_bound: b and t must be positive");
    if (!(gamma > 0.0) || !(tau > 0.0) || r0 < 0.0 || g0 < 0.0)
        throw std::invalid_argument("theorem2_bound: invalid parameters");
    return 2.0 * static_cast<double>(b) * r0 * r0 / (gamma * static_cast<double>(t)) +
           g0 * g0 / (2.0 * tau);
}

/* Pure coordinate-descent form of the same guarantee (gradient-step
 * denoisers, where f itself is smooth): E[f(x^t)] - f* <= 2 b R0^2 / (gamma t). */
inline double coordinate_descent_bound(std::size_t b, double gamma, double r0, std::size_t t) {
    if (b == 0 || t == 0)
        throw std::invalid_argument("coordinate_descent_bound: b and t must be positive");
    if (!(gamma > 0.0) || r0 < 0.0)
        throw std::invalid_argument("coordinate_descent_bound: invalid parameters");
    return 2.0 * static_cast<double>(b) * r0 * r0 / (gamma * static_cast<double>(t));
}

/* Horizon-dependent smoothing schedule tau = sqrt(t), gamma = 1/(L_max + 2 sqrt(t)),
 * under which the objective bound decays like 1/sqrt(t). */
struct SmoothingSchedule {
    double tau = 0.0;
    double gamma = 0.0;
};

inline SmoothingSchedule smoothing_schedule(double l_max, std::size_t t) {
    if (t == 0)
        throw std::invalid_argument("smoothing_schedule: t must be positive");
    SmoothingSchedule s;
    s.tau = std::sqrt(static_cast<double>(t));
    s.gamma = 1.0 / (l_max + 2.0 * s.tau);
    return s;
}

/* Closed-form ceiling of theorem2_bound under the schedule above:
 * (2 b (L_max + 2) R0^2 + G0^2) / sqrt(t). */
inline double scheduled_bound(std::size_t b, double l_max, double r0, double g0,
                              std::size_t t) {
    if (b == 0 || t == 0)
        throw std::invalid_argument("scheduled_bound: b and t must be positive");
    return (2.0 * static_cast<double>(b) * (l_max + 2.0) * r0 * r0 + g0 * g0) /
           std::sqrt(static_cast<double>(t));
}

struct CocoercivityReport {
    std::size_t trials = 0;
    double beta = 0.0;       // claimed constant 1/(L_max + 2 tau)
    double worst_slack = 0.0; // min over trials of lhs - beta * rhs
    bool passed = false;
    std::uint64_t seed = 0;
};

/* Empirical block cocoercivity of G: for pairs x, y = x - U_i h differing in
 * block i only, <G_i(x) - G_i(y), h> >= beta ||G_i(x) - G_i(y)||^2 must hold
 * with beta = 1/(L_max + 2 tau), up to -1e-9 slack. Draw order per trial:
 * x (n normals), i, h (block normals). */
inline CocoercivityReport check_block_cocoercive(const RedProblem& pb,
                                                 const BlockPartition& p, double tau,
                                                 std::size_t trials, std::uint64_t seed) {
    if (trials == 0)
        throw std::invalid_argument("check_block_cocoercive: need at least one trial");
    if (!(tau > 0.0))
        throw std::invalid_argument("check_block_cocoercive: tau must be positive");
    if (p.dim() != pb.model.cols())
        throw std::invalid_argument("check_block_cocoercive: partition dimension mismatch");

    const LipschitzInfo lip = estimate_lipschitz(pb.model, p);
    CocoercivityReport report;
    report.trials = trials;
    report.seed = seed;
    report.beta = 1.0 / (lip.l_max + 2.0 * tau);

    SplitMix64 rng(seed);
    const std::size_t n = p.dim();
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<double> x = rng.normal_vector(n);
        const std::size_t i = static_cast<std::size_t>(rng.below(p.block_count()));
        const std::vector<double> h = rng.normal_vector(p.block(i).size());
        std::vector<double> y = x;
        add_scaled_block(y, -1.0, h, p, i);

        const std::vector<double> gx = extract_block(operator_G(pb, tau, x), p, i);
        const std::vector<double> gy = extract_block(operator_G(pb, tau, y), p, i);
        std::vector<double> dg(gx.size());
        for (std::size_t j = 0; j < dg.size(); ++j) dg[j] = gx[j] - gy[j];
        const double slack = dot(dg, h) - report.beta * norm_sq(dg);
        worst = std::min(worst, slack);
    }
    report.worst_slack = worst;
    report.passed = worst >= -1e-9;
    return report;
}

} // namespace bcred
