#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "bcred/prng.hpp"
#include "bcred/solver.hpp"

using namespace bcred;

namespace {

RedProblem make_ridge_problem(std::size_t m, std::size_t n, double lambda, double tau,
                              std::uint64_t seed) {
    RedProblem pb{ForwardModel::gaussian(m, n, seed), {}, Denoiser::gradient_step(lambda, tau),
                  Smoothable::tikhonov(lambda)};
    SplitMix64 rng(seed + 1000);
    pb.y = rng.normal_vector(m);
    return pb;
}

RedProblem make_lasso_problem(std::size_t m, std::size_t n, double lambda, double tau,
                              std::uint64_t seed) {
    RedProblem pb{ForwardModel::gaussian(m, n, seed), {},
                  Denoiser::make_soft_threshold(lambda / tau), Smoothable::l1(lambda)};
    SplitMix64 rng(seed + 1000);
    pb.y = rng.normal_vector(m);
    return pb;
}

TEST(BcredRun, SingleBlockMatchesFullGradientBitwise) {
    for (int which = 0; which < 2; ++which) {
        const double tau = 2.0;
        const RedProblem pb = which == 0 ? make_ridge_problem(8, 12, 0.3, tau, 41)
                                         : make_lasso_problem(8, 12, 0.1, tau, 42);
        SolverConfig cfg;
        cfg.tau = tau;
        cfg.iterations = 40;

        const SolveResult block = bcred_run(pb, BlockPartition::contiguous(12, 1), cfg);
        const SolveResult full = red_full_run(pb, cfg);
        EXPECT_EQ(block.x, full.x);
        EXPECT_EQ(block.trace.residual_sq, full.trace.residual_sq);
        EXPECT_EQ(block.trace.objective, full.trace.objective);
        EXPECT_EQ(block.trace.gamma, full.trace.gamma);
    }
}

TEST(BcredRun, CachedResidualTracksDirectRecomputation) {
    const double tau = 1.0;
    const RedProblem pb = make_lasso_problem(12, 20, 0.05, tau, 43);
    const BlockPartition p = BlockPartition::contiguous(20, 4);

    SolverConfig cfg;
    cfg.tau = tau;
    cfg.iterations = 100;
    cfg.selection = {SelectionRule::Iid, 7};

    const SolveResult direct = bcred_run(pb, p, cfg);
    cfg.cached_residual = true;
    const SolveResult cached = bcred_run(pb, p, cfg);

    EXPECT_EQ(direct.trace.selection_order, cached.trace.selection_order);
    ASSERT_EQ(direct.x.size(), cached.x.size());
    for (std::size_t j = 0; j < direct.x.size(); ++j)
        EXPECT_NEAR(direct.x[j], cached.x[j], 1e-10);
    EXPECT_NEAR(direct.trace.residual_sq.back(), cached.trace.residual_sq.back(), 1e-10);
}

/* The gradient-step denoiser reduces each block update to plain coordinate
 * descent on 1/2 ||Ax - y||^2 + (lambda/2) ||x||^2. Replaying the recorded
 * selection order with the same ascending-index loops must reproduce the
 * solver state bit for bit. */
TEST(BcredRun, GradientStepReplayIsBitIdentical) {
    const std::size_t m = 10, n = 16, b = 4;
    const double lambda = 0.25, tau = 1.5;
    const RedProblem pb = make_ridge_problem(m, n, lambda, tau, 44);
    const BlockPartition p = BlockPartition::contiguous(n, b);

    SolverConfig cfg;
    cfg.tau = tau;
    cfg.iterations = 60;
    cfg.selection = {SelectionRule::EpochShuffle, 3};
    const SolveResult run = bcred_run(pb, p, cfg);
    ASSERT_EQ(run.trace.selection_order.size(), cfg.iterations * b);

    const ForwardModel& a = pb.model;
    std::vector<double> x(n, 0.0);
    for (const std::size_t i : run.trace.selection_order) {
        std::vector<double> r(m);
        for (std::size_t row = 0; row < m; ++row) {
            double s = 0.0;
            for (std::size_t col = 0; col < n; ++col) s += a.entry(row, col) * x[col];
            r[row] = s - pb.y[row];
        }
        const auto& idx = p.block(i);
        std::vector<double> u(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            double s = 0.0;
            for (std::size_t row = 0; row < m; ++row) s += a.entry(row, idx[j]) * r[row];
            u[j] = s + lambda * x[idx[j]];
        }
        for (std::size_t j = 0; j < idx.size(); ++j) x[idx[j]] += -run.trace.gamma * u[j];
    }
    EXPECT_EQ(x, run.x);
}

TEST(StepSizeGuard, RejectsOutOfRangeGamma) {
    const double tau = 1.0;
    const RedProblem pb = make_lasso_problem(8, 12, 0.1, tau, 45);
    const BlockPartition p = BlockPartition::contiguous(12, 3);

    SolverConfig cfg;
    cfg.tau = tau;
    cfg.iterations = 5;

    const SolveResult base = bcred_run(pb, p, cfg);
    EXPECT_DOUBLE_EQ(base.trace.gamma, 1.0 / (base.trace.l_max + 2.0 * tau));
    EXPECT_FALSE(base.trace.unsafe_step);

    cfg.gamma = base.trace.gamma * 10.0;
    try {
        bcred_run(pb, p, cfg);
        FAIL() << "oversized gamma must be rejected";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("invalid step-size"), std::string::npos);
    }

    cfg.allow_unsafe_step = true;
    const SolveResult loose = bcred_run(pb, p, cfg);
    EXPECT_TRUE(loose.trace.unsafe_step);
    EXPECT_DOUBLE_EQ(loose.trace.gamma, *cfg.gamma);

    cfg.gamma = 0.0;
    EXPECT_THROW(bcred_run(pb, p, cfg), std::invalid_argument);
    cfg.gamma = -1.0;
    EXPECT_THROW(bcred_run(pb, p, cfg), std::invalid_argument);

    // a step inside the admissible range is taken verbatim
    cfg.allow_unsafe_step = false;
    cfg.gamma = base.trace.gamma * 0.5;
    EXPECT_DOUBLE_EQ(bcred_run(pb, p, cfg).trace.gamma, *cfg.gamma);
}

TEST(BcredRun, StopToleranceEndsRunEarly) {
    const double tau = 1.0;
    const RedProblem pb = make_ridge_problem(10, 14, 0.2, tau, 46);
    const BlockPartition p = BlockPartition::contiguous(14, 2);

    SolverConfig cfg;
    cfg.tau = tau;
    cfg.iterations = 5000;
    cfg.stop_tol = 1e-6;

    const SolveResult run = bcred_run(pb, p, cfg);
    EXPECT_LT(run.trace.outer_iterations, cfg.iterations);
    EXPECT_LE(run.trace.normalized_residual.back(), 1e-6);
    EXPECT_EQ(run.trace.residual_sq.size(), run.trace.outer_iterations + 1);
}

TEST(BcredRun, TraceShapeAndInstrumentation) {
    const double tau = 1.0;
    RedProblem pb = make_lasso_problem(8, 12, 0.1, tau, 47);
    const BlockPartition p = BlockPartition::contiguous(12, 3);

    SolverConfig cfg;
    cfg.tau = tau;
    cfg.iterations = 9;

    std::vector<std::size_t> seen;
    std::vector<double> first_x;
    RunHooks hooks;
    hooks.before_update = [&](std::size_t k, std::span<const double> xk) {
        if (seen.empty()) first_x.assign(xk.begin(), xk.end());
        seen.push_back(k);
    };

    const SolveResult run = bcred_run(pb, p, cfg, hooks);
    EXPECT_EQ(run.trace.outer_iterations, 9u);
    EXPECT_EQ(run.trace.residual_sq.size(), 10u);
    EXPECT_EQ(run.trace.normalized_residual.size(), 10u);
    EXPECT_EQ(run.trace.objective.size(), 10u); // h attached
    EXPECT_EQ(run.trace.wall_time_s.size(), 10u);
    EXPECT_TRUE(run.trace.distance.empty());    // no oracle
    EXPECT_EQ(run.trace.selection_order.size(), 27u);
    EXPECT_DOUBLE_EQ(run.trace.normalized_residual.front(), 1.0);

    ASSERT_EQ(seen.size(), 27u);
    for (std::size_t k = 0; k < seen.size(); ++k) EXPECT_EQ(seen[k], k);
    EXPECT_EQ(first_x, std::vector<double>(12, 0.0)); // zeros init

    pb.h.reset();
    EXPECT_TRUE(bcred_run(pb, p, cfg).trace.objective.empty());
}

TEST(BcredRun, SelectionRulesProduceExpectedStreams) {
    const double tau = 1.0;
    const RedProblem pb = make_lasso_problem(8, 12, 0.1, tau, 48);
    const BlockPartition p = BlockPartition::contiguous(12, 4);

    SolverConfig cfg;
    cfg.tau = tau;
    cfg.iterations = 6;

    cfg.selection = {SelectionRule::Cyclic, 0};
    const SolveResult cyc = bcred_run(pb, p, cfg);
    for (std::size_t k = 0; k < cyc.trace.selection_order.size(); ++k)
        EXPECT_EQ(cyc.trace.selection_order[k], k % 4);

    cfg.selection = {SelectionRule::EpochShuffle, 5};
    const SolveResult ep = bcred_run(pb, p, cfg);
    for (std::size_t e = 0; e < 6; ++e) {
        std::set<std::size_t> epoch(ep.trace.selection_order.begin() + 4 * e,
                                    ep.trace.selection_order.begin() + 4 * (e + 1));
        EXPECT_EQ(epoch, (std::set<std::size_t>{0, 1, 2, 3})) << "epoch " << e;
    }

    cfg.selection = {SelectionRule::Iid, 9};
    const SolveResult iid_a = bcred_run(pb, p, cfg);
    const SolveResult iid_b = bcred_run(pb, p, cfg);
    EXPECT_EQ(iid_a.trace.selection_order, iid_b.trace.selection_order);
    EXPECT_EQ(iid_a.x, iid_b.x);
    cfg.selection.seed = 10;
    EXPECT_NE(bcred_run(pb, p, cfg).trace.selection_order, iid_a.trace.selection_order);
}

TEST(BcredRun, OracleDistanceSeriesAndMonotoneFlag) {
    const double tau = 1.0;
    const RedProblem pb = make_ridge_problem(10, 14, 0.2, tau, 49);
    const BlockPartition p = BlockPartition::contiguous(14, 2);

    SolverConfig cfg;
    cfg.tau = tau;
    cfg.iterations = 400;
    const SolveResult ref = bcred_run(pb, p, cfg);

    RunHooks hooks;
    hooks.oracle = ref.x;
    cfg.iterations = 200;
    const SolveResult run = bcred_run(pb, p, cfg, hooks);
    ASSERT_EQ(run.trace.distance.size(), 201u);
    EXPECT_TRUE(run.trace.distance_monotone);
    for (std::size_t k = 1; k < run.trace.distance.size(); ++k)
        EXPECT_LE(run.trace.distance[k], run.trace.distance[k - 1] + 1e-12);

    cfg.gamma = ref.trace.gamma * 50.0;
    cfg.allow_unsafe_step = true;
    const SolveResult wild = bcred_run(pb, p, cfg, hooks);
    EXPECT_FALSE(wild.trace.distance_monotone);
}

TEST(BcredRun, ValidationErrors) {
    const double tau = 1.0;
    RedProblem pb = make_lasso_problem(8, 12, 0.1, tau, 50);
    const BlockPartition p = BlockPartition::contiguous(12, 3);
    SolverConfig cfg;
    cfg.tau = tau;
    cfg.iterations = 1;

    {
        RedProblem bad = pb;
        bad.y.pop_back();
        EXPECT_THROW(bcred_run(bad, p, cfg), std::invalid_argument);
    }
    {
        SolverConfig bad = cfg;
        bad.tau = 0.0;
        EXPECT_THROW(bcred_run(pb, p, bad), std::invalid_argument);
    }
    {
        RedProblem bad = pb;
        bad.denoiser = Denoiser::scaling(2.0);
        EXPECT_THROW(bcred_run(bad, p, cfg), std::invalid_argument);
    }
    {
        RedProblem bad = pb;
        bad.denoiser = Denoiser::gradient_step(0.1, tau + 1.0);
        EXPECT_THROW(bcred_run(bad, p, cfg), std::invalid_argument);
    }
    EXPECT_THROW(bcred_run(pb, BlockPartition::contiguous(11, 3), cfg), std::invalid_argument);
    {
        SolverConfig bad = cfg;
        bad.blockwise = true;
        EXPECT_THROW(bcred_run(pb, p, bad), std::invalid_argument);
    }
    {
        RunHooks hooks;
        const std::vector<double> short_oracle(11, 0.0);
        hooks.oracle = short_oracle;
        EXPECT_THROW(bcred_run(pb, p, cfg, hooks), std::invalid_argument);
    }
    {
        SolverConfig bad = cfg;
        bad.x0 = {InitKind::Given, std::vector<double>(5, 0.0)};
        EXPECT_THROW(bcred_run(pb, p, bad), std::invalid_argument);
    }
}

TEST(BcredRun, AdjointAndGivenInitialPoints) {
    const double tau = 1.0;
    const RedProblem pb = make_lasso_problem(8, 12, 0.1, tau, 51);
    const BlockPartition p = BlockPartition::contiguous(12, 3);

    SolverConfig cfg;
    cfg.tau = tau;
    cfg.iterations = 0;

    cfg.x0.kind = InitKind::AdjointY;
    EXPECT_EQ(bcred_run(pb, p, cfg).x, pb.model.adjoint(pb.y));

    SplitMix64 rng(52);
    const std::vector<double> x0 = rng.normal_vector(12);
    cfg.x0 = {InitKind::Given, x0};
    EXPECT_EQ(bcred_run(pb, p, cfg).x, x0);
}

TEST(BoundFunctions, HandValuesAndValidation) {
    EXPECT_DOUBLE_EQ(theorem1_bound(2, 3.0, 1.0, 0.2, 2.0, 10), 20.0);
    EXPECT_DOUBLE_EQ(theorem2_bound(2, 0.2, 2.0, 3.0, 1.0, 10), 12.5);
    EXPECT_DOUBLE_EQ(coordinate_descent_bound(2, 0.2, 2.0, 10), 8.0);
    EXPECT_DOUBLE_EQ(scheduled_bound(2, 3.0, 2.0, 3.0, 16), 22.25);

    EXPECT_THROW(theorem1_bound(0, 3.0, 1.0, 0.2, 2.0, 10), std::invalid_argument);
    EXPECT_THROW(theorem1_bound(2, 3.0, 1.0, 0.2, 2.0, 0), std::invalid_argument);
    EXPECT_THROW(theorem1_bound(2, 3.0, 0.0, 0.2, 2.0, 10), std::invalid_argument);
    EXPECT_THROW(theorem1_bound(2, 3.0, 1.0, -0.2, 2.0, 10), std::invalid_argument);
    EXPECT_THROW(theorem2_bound(2, 0.2, -2.0, 3.0, 1.0, 10), std::invalid_argument);
    EXPECT_THROW(theorem2_bound(2, 0.2, 2.0, -3.0, 1.0, 10), std::invalid_argument);
    EXPECT_THROW(coordinate_descent_bound(2, 0.0, 2.0, 10), std::invalid_argument);
    EXPECT_THROW(scheduled_bound(0, 3.0, 2.0, 3.0, 16), std::invalid_argument);

    const SmoothingSchedule s = smoothing_schedule(3.0, 16);
    EXPECT_DOUBLE_EQ(s.tau, 4.0);
    EXPECT_DOUBLE_EQ(s.gamma, 1.0 / 11.0);
    EXPECT_THROW(smoothing_schedule(3.0, 0), std::invalid_argument);
}

TEST(PgmRun, FirstStepAndMonotoneObjective) {
    const std::size_t m = 10, n = 16;
    const ForwardModel a = ForwardModel::gaussian(m, n, 53);
    SplitMix64 rng(54);
    const std::vector<double> y = rng.normal_vector(m);
    const Smoothable h = Smoothable::l1(0.08);

    SolverConfig cfg;
    cfg.iterations = 1;
    const SolveResult one = pgm_run(a, y, h, cfg);
    const std::vector<double> adjy = a.adjoint(y);
    for (std::size_t j = 0; j < n; ++j) {
        const double expect = soft_threshold(one.trace.gamma * adjy[j],
                                             one.trace.gamma * 0.08);
        EXPECT_EQ(one.x[j], expect);
    }

    cfg.iterations = 300;
    const SolveResult run = pgm_run(a, y, h, cfg);
    ASSERT_EQ(run.trace.objective.size(), 301u);
    for (std::size_t k = 1; k < run.trace.objective.size(); ++k)
        EXPECT_LE(run.trace.objective[k], run.trace.objective[k - 1] + 1e-12);
    EXPECT_LT(run.trace.residual_sq.back(), run.trace.residual_sq.front());

    cfg.stop_tol = 1e-8;
    cfg.iterations = 100000;
    const SolveResult early = pgm_run(a, y, h, cfg);
    EXPECT_LT(early.trace.outer_iterations, 100000u);
    EXPECT_LE(early.trace.normalized_residual.back(), 1e-8);
}

TEST(PgmRun, StepGuardAndValidation) {
    const ForwardModel a = ForwardModel::gaussian(6, 9, 55);
    const std::vector<double> y(6, 1.0);
    const Smoothable h = Smoothable::l1(0.1);

    SolverConfig cfg;
    cfg.iterations = 3;
    const double cap = 1.0 / pgm_run(a, y, h, cfg).trace.l_global;
    EXPECT_DOUBLE_EQ(pgm_run(a, y, h, cfg).trace.gamma, cap);

    cfg.gamma = cap * 4.0;
    try {
        pgm_run(a, y, h, cfg);
        FAIL() << "oversized gamma must be rejected";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("invalid step-size"), std::string::npos);
    }
    cfg.allow_unsafe_step = true;
    EXPECT_TRUE(pgm_run(a, y, h, cfg).trace.unsafe_step);

    cfg.gamma.reset();
    EXPECT_THROW(pgm_run(a, std::vector<double>(5, 0.0), h, cfg), std::invalid_argument);
}

TEST(Cocoercivity, HoldsForSolvableProblemsAndValidates) {
    const double tau = 1.3;
    const BlockPartition p = BlockPartition::contiguous(16, 4);

    for (int which = 0; which < 2; ++which) {
        const RedProblem pb = which == 0 ? make_ridge_problem(10, 16, 0.4, tau, 56)
                                         : make_lasso_problem(10, 16, 0.2, tau, 57);
        const CocoercivityReport rep = check_block_cocoercive(pb, p, tau, 200, 11);
        EXPECT_TRUE(rep.passed) << "worst slack " << rep.worst_slack;
        EXPECT_GE(rep.worst_slack, -1e-9);
        EXPECT_EQ(rep.trials, 200u);

        const LipschitzInfo lip = estimate_lipschitz(pb.model, p);
        EXPECT_DOUBLE_EQ(rep.beta, 1.0 / (lip.l_max + 2.0 * tau));

        const CocoercivityReport again = check_block_cocoercive(pb, p, tau, 200, 11);
        EXPECT_EQ(again.worst_slack, rep.worst_slack);
    }

    const RedProblem pb = make_lasso_problem(10, 16, 0.2, tau, 58);
    EXPECT_THROW(check_block_cocoercive(pb, p, tau, 0, 1), std::invalid_argument);
    EXPECT_THROW(check_block_cocoercive(pb, p, 0.0, 1, 1), std::invalid_argument);
    EXPECT_THROW(check_block_cocoercive(pb, BlockPartition::contiguous(15, 3), tau, 1, 1),
                 std::invalid_argument);
}

} // namespace
