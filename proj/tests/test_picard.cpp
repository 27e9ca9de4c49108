#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "volterra/catalog.hpp"
#include "volterra/lyapunov.hpp"
#include "volterra/picard.hpp"

using namespace volterra;

namespace {

double taylor_partial_sum(double t, std::size_t m) {
    double sum = 0.0, term = 1.0;
    for (std::size_t k = 0; k <= m; ++k) {
        sum += term;
        term *= t / static_cast<double>(k + 1);
    }
    return sum;
}

double sup_error(const Trajectory& traj, const std::function<double(double)>& exact) {
    double sup = 0.0;
    for (std::size_t i = 0; i < traj.node_count(); ++i)
        sup = std::max(sup, std::abs(traj.state(i)[0] - exact(traj.times()[i])));
    return sup;
}

}  // namespace

TEST_CASE("eta formula") {
    CHECK(eta(1.0, 2.0, 1.0) == 0.25);
    CHECK(eta(0.1, 1.0, 1.0) == 0.1);
    CHECK(eta(1.0, 0.0, 1.0) == 1.0);
    CHECK(eta(5.0, 0.0, 0.3) == 5.0);
    CHECK(eta(2.0, 1.0, 3.0) == 1.5);
    CHECK_THROWS_AS(eta(0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(eta(1.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(eta(1.0, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("picard_step") {
    SUBCASE("zero field fixes the constant trajectory") {
        auto entry = catalog::get("zero");
        Trajectory c = Trajectory::constant(0.0, 1.0, 0.1, entry.problem.x0);
        Trajectory next = picard_step(entry.problem, c);
        for (const Vec& s : next.states()) CHECK(s[0] == 0.0);
    }
    SUBCASE("iterates of x' = x are Taylor partial sums of e^t") {
        auto entry = catalog::get("exp");
        Trajectory it = Trajectory::constant(0.0, 1.0, 1e-3, {1.0});
        for (std::size_t m = 1; m <= 8; ++m) {
            it = picard_step(entry.problem, it);
            CHECK(it.back_state()[0] ==
                  doctest::Approx(taylor_partial_sum(1.0, m)).epsilon(5e-6));
        }
        // frozen spot value: m = 5 at t = 1
        CHECK(taylor_partial_sum(1.0, 5) == doctest::Approx(2.7166667).epsilon(1e-7));
    }
    SUBCASE("one step of the sinh problem from zero gives x(t) = t") {
        auto entry = catalog::get("sinh");
        Trajectory z = Trajectory::constant(0.0, 0.5, 1e-3, {0.0});
        Trajectory one = picard_step(entry.problem, z);
        for (std::size_t i = 0; i < one.node_count(); ++i)
            CHECK(one.state(i)[0] == doctest::Approx(one.times()[i]).epsilon(1e-9));
    }
}

TEST_CASE("solve_segment") {
    SolveConfig cfg;
    cfg.h = 1e-3;
    cfg.tol = 1e-10;

    SUBCASE("zero field converges immediately") {
        auto entry = catalog::get("zero");
        auto seg = solve_segment(entry.problem, 0.0, 0.7, entry.problem.x0, std::nullopt, cfg);
        CHECK(seg.iterations == 1);
        CHECK(seg.final_delta == 0.0);
    }
    SUBCASE("sinh problem on [0, 0.5]") {
        auto entry = catalog::get("sinh");
        auto seg = solve_segment(entry.problem, 0.0, 0.5, entry.problem.x0, std::nullopt, cfg);
        CHECK(sup_error(seg.traj, [](double t) { return std::sinh(t); }) <= 1e-5);
    }
    SUBCASE("exp problem contracts geometrically") {
        auto entry = catalog::get("exp");
        auto seg = solve_segment(entry.problem, 0.0, 0.5, entry.problem.x0, std::nullopt, cfg);
        CHECK(seg.iterations <= 25);
        for (std::size_t i = 3; i + 1 < seg.deltas.size(); ++i)
            CHECK(seg.deltas[i + 1] <= 0.6 * seg.deltas[i] + 1e-14);
    }
    SUBCASE("max_iter exceeded carries the delta history") {
        auto entry = catalog::get("sinh");
        SolveConfig tight = cfg;
        tight.max_iter = 1;
        try {
            solve_segment(entry.problem, 0.0, 0.5, entry.problem.x0, std::nullopt, tight);
            FAIL("expected NonConvergenceError");
        } catch (const NonConvergenceError& e) {
            CHECK(e.delta_history().size() == 1);
        }
    }
}

TEST_CASE("solve") {
    SolveConfig cfg;
    cfg.h = 1e-3;
    cfg.tol = 1e-10;

    SUBCASE("zero field spans the whole horizon in one segment") {
        auto entry = catalog::get("zero");
        auto cert = certify_bounds(entry.problem, 500, 42);
        auto res = solve(entry.problem, cert, cfg);
        CHECK(res.report.converged);
        CHECK(res.report.eta == 1.0);
        CHECK(res.report.segments.size() == 1);
        CHECK(res.traj.back_state()[0] == 0.0);
    }
    SUBCASE("sinh problem matches the analytic solution on [0, eta]") {
        auto entry = catalog::get("sinh");
        auto cert = certify_bounds(entry.problem, 500, 42);
        CHECK(cert.H0 == doctest::Approx(1.5).epsilon(1e-3));
        auto res = solve(entry.problem, cert, cfg);
        REQUIRE(res.report.converged);
        CHECK(res.report.eta == doctest::Approx(1.0 / (2.0 * cert.H0)));
        CHECK(sup_error(res.traj, [](double t) { return std::sinh(t); }) <= 1e-4);
    }
    SUBCASE("segments tile [0, eta] without gaps") {
        auto entry = catalog::get("sinh");
        auto cert = certify_bounds(entry.problem, 500, 42);
        SolveConfig multi = cfg;
        multi.sigma_policy = 0.3;
        auto res = solve(entry.problem, cert, multi);
        REQUIRE(res.report.converged);
        REQUIRE(res.report.segments.size() >= 2);
        CHECK(res.report.segments.front().sigma_start == 0.0);
        CHECK(res.report.segments.back().sigma_end == doctest::Approx(res.report.eta));
        for (std::size_t i = 1; i < res.report.segments.size(); ++i)
            CHECK(res.report.segments[i].sigma_start ==
                  doctest::Approx(res.report.segments[i - 1].sigma_end));
    }
    SUBCASE("multi-segment equals single-segment within 10*tol") {
        auto entry = catalog::get("sinh");
        auto cert = certify_bounds(entry.problem, 500, 42);
        auto single = solve(entry.problem, cert, cfg);
        SolveConfig multi = cfg;
        multi.sigma_policy = 0.3;
        auto split = solve(entry.problem, cert, multi);
        REQUIRE(single.report.converged);
        REQUIRE(split.report.converged);
        REQUIRE(split.report.segments.size() >= 3);
        CHECK(oracle::compare(single.traj, split.traj, entry.problem.B) <= 10.0 * cfg.tol);
    }
    SUBCASE("ball containment a-priori bound") {
        for (const char* name : {"sinh", "exp", "contractive"}) {
            auto entry = catalog::get(name);
            auto cert = certify_bounds(entry.problem, 500, 42);
            auto res = solve(entry.problem, cert, cfg);
            REQUIRE(res.report.converged);
            CHECK(res.report.ball_margin <= cert.H0 * res.report.eta + cfg.tol);
            CHECK(res.report.ball_margin <= 0.5 * cfg.N + cfg.tol);
        }
    }
    SUBCASE("fixed-point residual") {
        auto entry = catalog::get("sinh");
        auto cert = certify_bounds(entry.problem, 500, 42);
        auto res = solve(entry.problem, cert, cfg);
        REQUIRE(res.report.converged);
        double defect = lyapunov::measure_defect(entry.problem, res.traj);
        CHECK(defect <= 2.0 * cfg.tol + 10.0 * cfg.h * cfg.h);
    }
    SUBCASE("grid refinement is second order") {
        auto entry = catalog::get("sinh");
        auto cert = certify_bounds(entry.problem, 500, 42);
        std::vector<Trajectory> runs;
        for (double h : {4e-3, 2e-3, 1e-3}) {
            SolveConfig c = cfg;
            c.h = h;
            runs.push_back(solve(entry.problem, cert, c).traj);
        }
        double d1 = oracle::compare(runs[0], runs[1], entry.problem.B);
        double d2 = oracle::compare(runs[1], runs[2], entry.problem.B);
        CHECK(d1 / d2 >= 3.0);
        CHECK(d1 / d2 <= 5.0);
    }
    SUBCASE("non-convergence yields a partial report") {
        auto entry = catalog::get("sinh");
        auto cert = certify_bounds(entry.problem, 500, 42);
        SolveConfig tight = cfg;
        tight.max_iter = 1;
        auto res = solve(entry.problem, cert, tight);
        CHECK_FALSE(res.report.converged);
        CHECK_FALSE(res.report.failure.empty());
        CHECK_FALSE(res.report.iterate_deltas.empty());
    }
}

TEST_CASE("norm convergence dominates the reference topology") {
    // final iterate deltas re-measured in a larger reference disk stay
    // below the B-gauge deltas (the norm topology is the stronger one)
    auto entry = catalog::get("sinh");
    const Disk& B = entry.problem.B;
    Disk ref = scale_disk(B, 2.0);
    auto rep = check_strict_mackey(B, ref, B, 512, 7);
    SolveConfig cfg;
    cfg.h = 1e-3;
    cfg.tol = 1e-8;
    auto cert = certify_bounds(entry.problem, 500, 42);
    auto a = solve(entry.problem, cert, cfg);
    SolveConfig finer = cfg;
    finer.tol = 1e-10;
    auto b = solve(entry.problem, cert, finer);
    double delta_B = oracle::compare(a.traj, b.traj, B);
    double delta_ref = oracle::compare(a.traj, b.traj, ref);
    CHECK(delta_ref <= rep.upper_const * delta_B * (1.0 + 1e-9));
}

TEST_CASE("verify_uniqueness") {
    SolveConfig cfg;
    cfg.h = 1e-3;
    cfg.tol = 1e-10;
    SUBCASE("zero perturbation reproduces the baseline") {
        auto entry = catalog::get("sinh");
        auto cert = certify_bounds(entry.problem, 500, 42);
        CHECK(verify_uniqueness(entry.problem, cert, cfg, 0.0, 2, 42) == 0.0);
    }
    SUBCASE("perturbed initial iterates land on the same fixed point") {
        for (const char* name : {"sinh", "exp"}) {
            auto entry = catalog::get(name);
            auto cert = certify_bounds(entry.problem, 500, 42);
            double scale = name == std::string("sinh") ? 0.1 : 0.2;
            CHECK(verify_uniqueness(entry.problem, cert, cfg, scale, 5, 42) <= 10.0 * cfg.tol);
        }
    }
}
