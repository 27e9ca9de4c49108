#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "volterra/disk.hpp"
#include "volterra/errors.hpp"
#include "volterra/problem.hpp"
#include "volterra/trajectory.hpp"

namespace volterra::oracle {

struct OracleConfig {
    double h_fine = 1e-4;
    enum class Scheme { rk4_trapezoid } scheme = Scheme::rk4_trapezoid;
};

// Classical direct integration of x' = H(t, x, y(t)): a fourth-order
// one-step core, with y(t) = (Kx)(t) maintained by composite trapezoid over
// the already-computed history plus a trapezoid panel for the current
// stage. A deliberately different discretization family than Picard
// iteration, so agreement between the two is evidence rather than
// tautology.
inline Trajectory reference_solve(const VolterraProblem& prob, const OracleConfig& cfg,
                                  double horizon) {
    prob.validate();
    if (!(cfg.h_fine > 0.0)) throw std::invalid_argument("reference_solve: h_fine must be positive");
    if (!(horizon > 0.0) || horizon > prob.T + 1e-12)
        throw std::invalid_argument("reference_solve: horizon must lie in (0, T]");
    if (prob.upper_limit_mode != UpperLimitMode::variable_t)
        throw std::invalid_argument("reference_solve: only variable_t kernels are supported");

    std::vector<double> times = Trajectory::make_grid(0.0, horizon, cfg.h_fine);
    std::vector<Vec> states;
    states.reserve(times.size());
    states.push_back(prob.x0);

    // history integral F(tau) = trapezoid over the computed nodes 0..i of
    // K(tau, s_j, x_j); O(i) kernel evaluations per stage
    auto history_integral = [&](double tau, std::size_t upto) {
        Vec acc = zeros(prob.dim);
        if (upto == 0) return acc;
        Vec prev = detail::eval_kernel(prob, tau, times[0], states[0]);
        for (std::size_t j = 1; j <= upto; ++j) {
            Vec cur = detail::eval_kernel(prob, tau, times[j], states[j]);
            double dt = times[j] - times[j - 1];
            for (std::size_t k = 0; k < acc.size(); ++k)
                acc[k] += 0.5 * dt * (prev[k] + cur[k]);
            prev = std::move(cur);
        }
        return acc;
    };

    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        const double t = times[i];
        const double h = times[i + 1] - t;
        const Vec& x = states[i];

        auto stage_y = [&](double tau, const Vec& x_stage) {
            Vec y = history_integral(tau, i);
            if (tau > t) {
                // current panel [t, tau] by trapezoid with the stage estimate
                Vec ka = detail::eval_kernel(prob, tau, t, x);
                Vec kb = detail::eval_kernel(prob, tau, tau, x_stage);
                for (std::size_t k = 0; k < y.size(); ++k)
                    y[k] += 0.5 * (tau - t) * (ka[k] + kb[k]);
            }
            return y;
        };

        Vec k1 = detail::eval_field(prob, t, x, stage_y(t, x));
        Vec x2 = axpy(x, 0.5 * h, k1);
        Vec k2 = detail::eval_field(prob, t + 0.5 * h, x2, stage_y(t + 0.5 * h, x2));
        Vec x3 = axpy(x, 0.5 * h, k2);
        Vec k3 = detail::eval_field(prob, t + 0.5 * h, x3, stage_y(t + 0.5 * h, x3));
        Vec x4 = axpy(x, h, k3);
        Vec k4 = detail::eval_field(prob, t + h, x4, stage_y(t + h, x4));

        Vec next(prob.dim);
        for (std::size_t k = 0; k < next.size(); ++k)
            next[k] = x[k] + (h / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        if (!is_finite(next))
            throw EvaluationError("reference_solve: non-finite state", t + h);
        states.push_back(std::move(next));
    }
    return Trajectory(std::move(times), std::move(states));
}

// Sup over the coarser grid's nodes (within the overlapping span) of the
// B-gauge of the pointwise difference. A pseudometric on trajectories.
inline double compare(const Trajectory& a, const Trajectory& b, const Disk& B) {
    double lo = std::max(a.t_begin(), b.t_begin());
    double hi = std::min(a.t_end(), b.t_end());
    if (!(hi > lo)) throw std::invalid_argument("compare: disjoint trajectory spans");
    const Trajectory& coarse = a.node_count() <= b.node_count() ? a : b;
    double sup = 0.0;
    for (double t : coarse.times()) {
        if (t < lo - 1e-12 || t > hi + 1e-12) continue;
        double tc = std::clamp(t, lo, hi);
        sup = std::max(sup, gauge(sub(a.at(tc), b.at(tc)), B));
    }
    return sup;
}

}  // namespace volterra::oracle
