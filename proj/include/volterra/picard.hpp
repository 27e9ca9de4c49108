#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "volterra/disk.hpp"
#include "volterra/errors.hpp"
#include "volterra/problem.hpp"
#include "volterra/trajectory.hpp"

namespace volterra {

// Guaranteed local-existence step: min{T, N/(2*H0)}, with N/(2*0) = +inf.
inline double eta(double T, double H0, double N) {
    if (!(T > 0.0)) throw std::invalid_argument("eta: T must be positive");
    if (!(N > 0.0)) throw std::invalid_argument("eta: N must be positive");
    if (H0 < 0.0) throw std::invalid_argument("eta: H0 must be nonnegative");
    if (H0 == 0.0) return T;
    return std::min(T, N / (2.0 * H0));
}

struct SolveConfig {
    double h = 1e-3;
    double tol = 1e-10;
    std::size_t max_iter = 200;
    double N = 1.0;
    double sigma_policy = 0.9;  // fraction of the admissible local box step
    Vec initial_offset;         // perturbation of the initial iterate (may be empty)

    void validate() const {
        if (!(h > 0.0)) throw std::invalid_argument("SolveConfig: h must be positive");
        if (!(tol > 0.0)) throw std::invalid_argument("SolveConfig: tol must be positive");
        if (max_iter < 1) throw std::invalid_argument("SolveConfig: max_iter must be >= 1");
        if (!(N > 0.0)) throw std::invalid_argument("SolveConfig: N must be positive");
        if (!(sigma_policy > 0.0) || sigma_policy > 1.0)
            throw std::invalid_argument("SolveConfig: sigma_policy must be in (0, 1]");
    }
};

struct SegmentInfo {
    double sigma_start = 0.0;
    double sigma_end = 0.0;
    std::size_t iterations = 0;
    double final_delta = 0.0;
};

struct SolveReport {
    double eta = 0.0;
    std::vector<SegmentInfo> segments;
    bool converged = false;
    std::vector<double> iterate_deltas;  // per-iteration sup gauge distances, all segments
    double ball_margin = 0.0;            // max over the grid of gauge(x(t) - x0, B)
    std::string failure;                 // empty when converged
};

struct SolveResult {
    Trajectory traj;
    SolveReport report;
};

// One successive-approximation sweep: nodes with time >= from_time become
// anchor + integral of H(s, current(s), (K current)(s)) from from_time;
// earlier nodes are kept. `current` must cover [0, t_end].
inline Trajectory picard_step(const VolterraProblem& prob, const Trajectory& current,
                              const Vec& anchor, double from_time) {
    const auto& times = current.times();
    std::size_t i0 = 0;
    while (i0 + 1 < times.size() && times[i0] < from_time - 1e-12) ++i0;

    std::vector<double> seg_times(times.begin() + static_cast<long>(i0), times.end());
    std::vector<Vec> f;
    f.reserve(seg_times.size());
    for (double t : seg_times)
        f.push_back(detail::eval_field(prob, t, current.at(t), eval_K_operator(prob, current, t)));
    auto integrals = cumulative_integral(seg_times, f, prob.quadrature);

    std::vector<Vec> states(current.states().begin(), current.states().begin() + static_cast<long>(i0));
    for (const Vec& integral : integrals) states.push_back(add(anchor, integral));
    return Trajectory(std::vector<double>(times), std::move(states));
}

// Convenience form: full-span sweep anchored at x0.
inline Trajectory picard_step(const VolterraProblem& prob, const Trajectory& current) {
    return picard_step(prob, current, prob.x0, current.t_begin());
}

struct SegmentResult {
    Trajectory traj;  // covers [a, b] including the anchor node
    std::size_t iterations = 0;
    double final_delta = 0.0;
    std::vector<double> deltas;
};

// Successive approximations on [a, b] from the constant-anchor initial
// iterate, iterated until the sup B-gauge distance between consecutive
// iterates drops below cfg.tol. `prefix` supplies the solved history on
// [0, a] so the integral operator can integrate from 0.
inline SegmentResult solve_segment(const VolterraProblem& prob, double a, double b,
                                   const Vec& anchor, const std::optional<Trajectory>& prefix,
                                   const SolveConfig& cfg) {
    cfg.validate();
    if (!(a >= 0.0) || !(b > a) || b > prob.T + 1e-12)
        throw std::invalid_argument("solve_segment: need 0 <= a < b <= T");
    if (a > 0.0 && !prefix)
        throw std::invalid_argument("solve_segment: a > 0 requires a prefix trajectory");

    Vec init = anchor;
    if (!cfg.initial_offset.empty()) {
        init = add(init, cfg.initial_offset);
        // pull the perturbed iterate back inside x0 + N*B if needed
        double g = gauge(sub(init, prob.x0), prob.B);
        if (g > cfg.N) init = axpy(prob.x0, cfg.N / g, sub(init, prob.x0));
    }
    Trajectory segment = Trajectory::constant(a, b, cfg.h, init);
    {
        // the anchor node itself is fixed by the iteration map
        std::vector<Vec> st = segment.states();
        st.front() = anchor;
        segment = Trajectory(std::vector<double>(segment.times()), std::move(st));
    }

    // In fixed_T mode the kernel integrates over [0, T], so the working
    // iterate is extended to T by holding the anchor value.
    const bool fixed_T = prob.upper_limit_mode == UpperLimitMode::fixed_T;
    auto combined = [&](const Trajectory& seg) {
        Trajectory c = prefix ? prefix->concat(seg) : seg;
        if (fixed_T && c.t_end() < prob.T - 1e-12)
            c = c.concat(Trajectory::constant(c.t_end(), prob.T, cfg.h, c.back_state()));
        return c;
    };

    std::vector<double> deltas;
    for (std::size_t m = 0; m < cfg.max_iter; ++m) {
        Trajectory full = picard_step(prob, combined(segment), anchor, a);
        // extract the segment span back out
        std::size_t i0 = 0;
        const auto& times = full.times();
        while (times[i0] < a - 1e-12) ++i0;
        std::size_t i1 = i0;
        while (i1 + 1 < times.size() && times[i1] < b - 1e-12) ++i1;
        Trajectory next(std::vector<double>(times.begin() + static_cast<long>(i0),
                                            times.begin() + static_cast<long>(i1) + 1),
                        std::vector<Vec>(full.states().begin() + static_cast<long>(i0),
                                         full.states().begin() + static_cast<long>(i1) + 1));

        double delta = 0.0;
        for (std::size_t i = 0; i < next.node_count(); ++i) {
            delta = std::max(delta, gauge(sub(next.state(i), segment.state(i)), prob.B));
            double margin = gauge(sub(next.state(i), prob.x0), prob.B);
            if (margin > cfg.N + 1e-9)
                throw BallExitError("solve_segment: iterate left x0 + N*B at t=" +
                                        std::to_string(next.times()[i]),
                                    next.times()[i]);
        }
        deltas.push_back(delta);
        segment = std::move(next);
        if (delta < cfg.tol)
            return SegmentResult{std::move(segment), m + 1, delta, std::move(deltas)};
    }
    throw NonConvergenceError("solve_segment: max_iter reached without convergence",
                              std::move(deltas));
}

// Greedy continuation to eta: each segment length sigma obeys the local box
// inequalities sigma*H0 < gamma_bar and sigma*K0 < gamma, with the box radii
// taken as half the remaining gauge margin to the N-ball boundary. On
// failure the partial interval reached so far is reported.
inline SolveResult solve(const VolterraProblem& prob, const BoundsCertificate& cert,
                         const SolveConfig& cfg) {
    prob.validate();
    cfg.validate();
    SolveReport report;
    report.eta = eta(prob.T, cert.H0, cfg.N);

    const double inf = std::numeric_limits<double>::infinity();
    double a = 0.0;
    Vec anchor = prob.x0;
    std::optional<Trajectory> assembled;

    while (a < report.eta - 1e-12) {
        double margin = cfg.N - gauge(sub(anchor, prob.x0), prob.B);
        double box = 0.5 * std::max(margin, 0.0);  // gamma = gamma_bar
        double cap = std::min(cert.H0 > 0.0 ? box / cert.H0 : inf,
                              cert.K0 > 0.0 ? box / cert.K0 : inf);
        double sigma = std::min(report.eta - a, cfg.sigma_policy * cap);
        // segment ends snap onto the global h-grid so multi-segment and
        // single-segment solves share node times exactly
        double b = a + std::max(sigma, cfg.h);
        b = std::floor(b / cfg.h + 1e-9) * cfg.h;
        if (b <= a + 0.5 * cfg.h) b = a + cfg.h;
        b = std::min(b, report.eta);

        try {
            SegmentResult seg = solve_segment(prob, a, b, anchor, assembled, cfg);
            report.segments.push_back({a, b, seg.iterations, seg.final_delta});
            report.iterate_deltas.insert(report.iterate_deltas.end(), seg.deltas.begin(),
                                         seg.deltas.end());
            assembled = assembled ? assembled->concat(seg.traj) : seg.traj;
            anchor = assembled->back_state();
            a = b;
        } catch (const NonConvergenceError& e) {
            report.iterate_deltas.insert(report.iterate_deltas.end(), e.delta_history().begin(),
                                         e.delta_history().end());
            report.failure = e.what();
            break;
        } catch (const BallExitError& e) {
            report.failure = e.what();
            break;
        }
    }

    report.converged = report.failure.empty() && assembled.has_value();
    if (!assembled) {
        // nothing solved at all; return the trivial two-node stub at x0
        assembled = Trajectory::constant(0.0, std::min(cfg.h, report.eta), cfg.h, prob.x0);
    }
    double ball_margin = 0.0;
    for (const Vec& x : assembled->states())
        ball_margin = std::max(ball_margin, gauge(sub(x, prob.x0), prob.B));
    report.ball_margin = ball_margin;
    return SolveResult{std::move(*assembled), std::move(report)};
}

inline SolveResult solve(const VolterraProblem& prob, const SolveConfig& cfg,
                         std::size_t cert_samples = 2000, std::uint64_t cert_seed = 42) {
    return solve(prob, certify_bounds(prob, cert_samples, cert_seed), cfg);
}

// Re-runs solve with seeded perturbed initial iterates and returns the max
// sup-gauge distance to the baseline solution. A fixed point independent of
// the starting iterate is the numerical signature of uniqueness.
inline double verify_uniqueness(const VolterraProblem& prob, const BoundsCertificate& cert,
                                const SolveConfig& cfg, double perturbation_scale,
                                std::size_t trials, std::uint64_t seed) {
    if (perturbation_scale < 0.0)
        throw std::invalid_argument("verify_uniqueness: perturbation_scale must be >= 0");
    SolveResult baseline = solve(prob, cert, cfg);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        Vec dir(prob.dim);
        for (double& d : dir) d = normal(rng);
        double g = gauge(dir, prob.B);
        SolveConfig pert_cfg = cfg;
        pert_cfg.initial_offset = g > 0.0 ? scale(dir, perturbation_scale / g) : zeros(prob.dim);
        SolveResult run = solve(prob, cert, pert_cfg);
        for (std::size_t i = 0; i < baseline.traj.node_count(); ++i) {
            double t = baseline.traj.times()[i];
            if (t > run.traj.t_end() + 1e-12) break;
            worst = std::max(worst, gauge(sub(baseline.traj.state(i), run.traj.at(t)), prob.B));
        }
    }
    return worst;
}

}  // namespace volterra
