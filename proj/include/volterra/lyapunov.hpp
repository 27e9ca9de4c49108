#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "volterra/disk.hpp"
#include "volterra/errors.hpp"
#include "volterra/oracle.hpp"
#include "volterra/picard.hpp"
#include "volterra/problem.hpp"
#include "volterra/trajectory.hpp"

namespace volterra::lyapunov {

using VMap = std::function<double(double t, const Vec& x, const Vec& y)>;
using GMap = std::function<double(double t, double v, double w)>;
using SMap = std::function<double(double t, double s, double v)>;

// The dissipativity certificate: a comparison functional V, comparison
// function g, kernel S with bound S0, and the Lipschitz constant of V.
// g's membership in the comparison class is a user assertion the artifact
// does not verify; only the stated inequalities and bounds are checked.
struct LyapunovSpec {
    VMap V;
    GMap g;
    SMap S;
    double S0 = 1.0;
    double L_V = 1.0;
};

struct Witness {
    double t = 0.0;
    Vec x, y;
    double value = 0.0;
    std::string what;
};

struct AxiomReport {
    bool diagonal_ok = true;
    bool positivity_ok = true;
    bool lipschitz_ok = true;
    double max_diagonal = 0.0;
    double max_lipschitz_ratio = 0.0;
    std::vector<Witness> failures;
    bool passed() const { return diagonal_ok && positivity_ok && lipschitz_ok; }
};

// Comparison-functional axioms at sample resolution: V(t,x,x) = 0, V(t,x,y) > 0 for
// separated x != y, sampled Lipschitz ratio <= L_V.
inline AxiomReport check_V_axioms(const LyapunovSpec& spec, const Disk& B, const Vec& center,
                                  double scale, double T, std::size_t samples,
                                  std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("check_V_axioms: samples must be >= 1");
    AxiomReport rep;
    auto xs = ball_points(B, center, scale, samples, seed);
    auto ys = ball_points(B, center, scale, samples, seed + 101);
    detail::TimeStream ts(T, seed + 3);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double t = ts.next();
        double diag = spec.V(t, xs[i], xs[i]);
        rep.max_diagonal = std::max(rep.max_diagonal, std::abs(diag));
        if (std::abs(diag) > 1e-12) {
            rep.diagonal_ok = false;
            rep.failures.push_back({t, xs[i], xs[i], diag, "V(t,x,x) != 0"});
        }
        if (gauge(sub(xs[i], ys[i]), B) >= 1e-6) {
            double off = spec.V(t, xs[i], ys[i]);
            if (!(off > 0.0)) {
                rep.positivity_ok = false;
                rep.failures.push_back({t, xs[i], ys[i], off, "V(t,x,y) <= 0 for x != y"});
            }
        }
        if (i + 1 < xs.size()) {
            double denom = gauge(sub(xs[i], xs[i + 1]), B) + gauge(sub(ys[i], ys[i + 1]), B);
            if (denom > 1e-12) {
                double num = std::abs(spec.V(t, xs[i], ys[i]) - spec.V(t, xs[i + 1], ys[i + 1]));
                double ratio = num / denom;
                rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, ratio);
                if (ratio > spec.L_V * (1.0 + 1e-9)) {
                    rep.lipschitz_ok = false;
                    rep.failures.push_back({t, xs[i], ys[i], ratio, "Lipschitz ratio exceeds L_V"});
                }
            }
        }
    }
    return rep;
}

struct DiniResult {
    double value = 0.0;
    std::vector<double> quotients;  // one per requested h, largest first
    bool ill_conditioned = false;
};

// Dini-type derivative along the flow:
//   D(V) = lim_{h->0+} (1/h) { V(t,x,y) - V(t-h, x - h H(t,x,Kx), y - h H(t,y,Ky)) },
// estimated from the difference quotients at the given h values with
// Richardson extrapolation of the last pair.
inline DiniResult dini_derivative(const VolterraProblem& prob, const LyapunovSpec& spec, double t,
                                  const Trajectory& x_traj, const Trajectory& y_traj,
                                  const std::vector<double>& h_values) {
    if (h_values.empty()) throw std::invalid_argument("dini_derivative: empty h_values");
    for (double h : h_values)
        if (!(h > 0.0) || t - h < -1e-12)
            throw std::invalid_argument("dini_derivative: need 0 < h <= t");

    Vec x = x_traj.at(t);
    Vec y = y_traj.at(t);
    Vec hx = detail::eval_field(prob, t, x, eval_K_operator(prob, x_traj, t));
    Vec hy = detail::eval_field(prob, t, y, eval_K_operator(prob, y_traj, t));
    double v0 = spec.V(t, x, y);

    DiniResult res;
    for (double h : h_values) {
        double vh = spec.V(t - h, axpy(x, -h, hx), axpy(y, -h, hy));
        res.quotients.push_back((v0 - vh) / h);
    }
    if (res.quotients.size() == 1) {
        res.value = res.quotients.front();
        return res;
    }
    std::size_t n = res.quotients.size();
    double h1 = h_values[n - 2], h2 = h_values[n - 1];
    double q1 = res.quotients[n - 2], q2 = res.quotients[n - 1];
    res.value = (h1 * q2 - h2 * q1) / (h1 - h2);  // removes the O(h) term
    double scale = std::max({std::abs(q1), std::abs(q2), 1e-12});
    res.ill_conditioned = std::abs(q2 - q1) / scale > 1e-3 &&
                          std::abs(res.value - q2) / std::max(std::abs(res.value), 1e-12) > 1e-3;
    return res;
}

struct DissipativityReport {
    double max_margin = -std::numeric_limits<double>::infinity();  // max of D(V) - g(...)
    double witness_t = 0.0;
    double witness_V = 0.0;
    bool s_bound_ok = true;
    double max_abs_S = 0.0;
    bool passed(double tol = 1e-4) const { return max_margin <= tol && s_bound_ok; }
};

// Condition (ii): D(V) <= g(t, V, integral of S) at the sampled times, and
// |S| <= S0 on the sampled arguments.
inline DissipativityReport check_dissipative(const VolterraProblem& prob, const LyapunovSpec& spec,
                                             const Trajectory& x_traj, const Trajectory& y_traj,
                                             const std::vector<double>& t_samples) {
    DissipativityReport rep;
    const std::vector<double> h_values = {1e-2, 1e-3, 1e-4, 1e-5};
    for (double t : t_samples) {
        double lhs = dini_derivative(prob, spec, t, x_traj, y_traj, h_values).value;

        // w = integral over [0, t] of S(t, s, V(s, x(s), y(s)))
        double w = 0.0;
        if (t > 0.0) {
            auto grid = Trajectory::make_grid(0.0, t, std::max(t / 64.0, 1e-6));
            double prev = 0.0;
            for (std::size_t j = 0; j < grid.size(); ++j) {
                double s = grid[j];
                double vs = spec.V(s, x_traj.at(s), y_traj.at(s));
                double sv = spec.S(t, s, vs);
                rep.max_abs_S = std::max(rep.max_abs_S, std::abs(sv));
                if (std::abs(sv) > spec.S0 * (1.0 + 1e-9)) rep.s_bound_ok = false;
                if (j > 0) w += 0.5 * (grid[j] - grid[j - 1]) * (prev + sv);
                prev = sv;
            }
        }
        double v = spec.V(t, x_traj.at(t), y_traj.at(t));
        double margin = lhs - spec.g(t, v, w);
        if (margin > rep.max_margin) {
            rep.max_margin = margin;
            rep.witness_t = t;
            rep.witness_V = v;
        }
    }
    return rep;
}

// A trajectory per epsilon whose integral-equation defect is certified by
// direct measurement to be at most that epsilon.
struct EpsApproxSequence {
    std::vector<double> epsilons;
    std::vector<Trajectory> trajectories;
    std::vector<double> defects;
};

// Defect of a trajectory against the integral equation:
// sup_t || x(t) - x0 - integral_0^t H(s, x(s), (Kx)(s)) ds ||_B.
inline double measure_defect(const VolterraProblem& prob, const Trajectory& traj) {
    std::vector<Vec> f;
    f.reserve(traj.node_count());
    for (double t : traj.times())
        f.push_back(detail::eval_field(prob, t, traj.at(t), eval_K_operator(prob, traj, t)));
    auto integrals = cumulative_integral(traj.times(), f, prob.quadrature);
    double sup = 0.0;
    for (std::size_t i = 0; i < traj.node_count(); ++i)
        sup = std::max(sup, gauge(sub(sub(traj.state(i), prob.x0), integrals[i]), prob.B));
    return sup;
}

// Realizes the epsilon_n-approximations as Picard runs truncated at
// threshold epsilon_n/2, with the defect certified a posteriori.
inline EpsApproxSequence generate_eps_approximations(const VolterraProblem& prob,
                                                     const BoundsCertificate& cert,
                                                     const SolveConfig& cfg,
                                                     const std::vector<double>& epsilons) {
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0) || !(epsilons[i] < 1.0))
            throw std::invalid_argument("generate_eps_approximations: epsilons must be in (0, 1)");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
            throw std::invalid_argument("generate_eps_approximations: epsilons must decrease");
    }
    EpsApproxSequence seq;
    seq.epsilons = epsilons;
    for (double eps : epsilons) {
        SolveConfig run_cfg = cfg;
        run_cfg.tol = 0.5 * eps;
        SolveResult res = solve(prob, cert, run_cfg);
        if (!res.report.converged)
            throw NonConvergenceError("generate_eps_approximations: run at eps=" +
                                          std::to_string(eps) + " did not converge",
                                      res.report.iterate_deltas);
        double defect = measure_defect(prob, res.traj);
        if (defect > eps)
            throw DefectError("generate_eps_approximations: measured defect " +
                                  std::to_string(defect) + " exceeds eps " + std::to_string(eps),
                              defect);
        seq.trajectories.push_back(std::move(res.traj));
        seq.defects.push_back(defect);
    }
    return seq;
}

struct MutualConvergenceReport {
    std::vector<std::vector<double>> V_matrix;       // M[n][m] = sup_t V(t, x_n, x_m)
    std::vector<std::vector<double>> D_distances;    // pairwise sup D-gauge distances
    std::vector<double> tail_max;                    // max over n,m >= n0 of M
    std::vector<double> tail_max_D;                  // same for the D-gauge distances
    bool tail_decreasing = false;
    bool d_tail_decreasing = false;
    double baseline_distance = -1.0;                 // -1 when no baseline given
    bool passed() const { return tail_decreasing && d_tail_decreasing; }
};

// Mutual convergence of the approximation family: V(t, x_n, x_m) -> 0 as
// n, m grow, and the sequence is Cauchy in the D-gauge.
inline MutualConvergenceReport check_mutual_convergence(const EpsApproxSequence& seq,
                                                        const LyapunovSpec& spec, const Disk& B,
                                                        const Disk& D,
                                                        const Trajectory* baseline = nullptr) {
    const std::size_t n = seq.trajectories.size();
    if (n < 3)
        throw std::invalid_argument("check_mutual_convergence: need at least 3 trajectories");
    if (disk_inclusion_margin(B, D, 256, 1) > 1.0 + 1e-9)
        throw PreconditionError("check_mutual_convergence: B is not contained in D");

    MutualConvergenceReport rep;
    rep.V_matrix.assign(n, std::vector<double>(n, 0.0));
    rep.D_distances.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const Trajectory& xi = seq.trajectories[i];
            const Trajectory& xj = seq.trajectories[j];
            double sup_v = 0.0, sup_d = 0.0;
            for (std::size_t k = 0; k < xi.node_count(); ++k) {
                double t = xi.times()[k];
                if (t > xj.t_end() + 1e-12) break;
                Vec a = xi.state(k);
                Vec b = xj.at(t);
                sup_v = std::max(sup_v, spec.V(t, a, b));
                sup_d = std::max(sup_d, gauge(sub(a, b), D));
            }
            rep.V_matrix[i][j] = sup_v;
            rep.D_distances[i][j] = sup_d;
        }
    }
    rep.tail_max.resize(n - 1);
    rep.tail_max_D.resize(n - 1);
    for (std::size_t n0 = 0; n0 + 1 < n; ++n0) {
        double mv = 0.0, md = 0.0;
        for (std::size_t i = n0; i < n; ++i)
            for (std::size_t j = n0; j < n; ++j) {
                mv = std::max(mv, rep.V_matrix[i][j]);
                md = std::max(md, rep.D_distances[i][j]);
            }
        rep.tail_max[n0] = mv;
        rep.tail_max_D[n0] = md;
    }
    auto nonincreasing_and_shrinking = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] > v[i - 1] + 1e-15) return false;
        return v.back() < v.front() || v.front() == 0.0;
    };
    rep.tail_decreasing = nonincreasing_and_shrinking(rep.tail_max);
    rep.d_tail_decreasing = nonincreasing_and_shrinking(rep.tail_max_D);
    if (baseline) rep.baseline_distance = oracle::compare(seq.trajectories.back(), *baseline, B);
    return rep;
}

}  // namespace volterra::lyapunov
