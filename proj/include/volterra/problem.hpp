#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "volterra/disk.hpp"
#include "volterra/errors.hpp"
#include "volterra/trajectory.hpp"
#include "volterra/vec.hpp"

namespace volterra {

enum class UpperLimitMode { variable_t, fixed_T };

using FieldMap = std::function<Vec(double t, const Vec& x, const Vec& y)>;
using KernelMap = std::function<Vec(double t, double s, const Vec& u)>;

// A problem instance x' = H(t, x, Kx), x(0) = x0 on J = [0, T], with
// (Kx)(t) integrating the kernel over [0, t] (variable_t) or [0, T]
// (fixed_T). B is origin-centered; the solution ball is x0 + N*B.
// H and K must be pure and reentrant.
struct VolterraProblem {
    std::size_t dim = 1;
    FieldMap H;
    KernelMap K;
    Vec x0;
    double T = 1.0;
    Disk B;
    double N = 1.0;
    UpperLimitMode upper_limit_mode = UpperLimitMode::variable_t;
    Quadrature quadrature = Quadrature::trapezoid;

    void validate() const {
        if (dim < 1) throw std::invalid_argument("VolterraProblem: dim must be >= 1");
        if (!(T > 0.0)) throw std::invalid_argument("VolterraProblem: T must be positive");
        if (!(N > 0.0)) throw std::invalid_argument("VolterraProblem: N must be positive");
        if (x0.size() != dim || B.dim() != dim)
            throw std::invalid_argument("VolterraProblem: inconsistent dimensions");
        if (!is_finite(x0)) throw std::invalid_argument("VolterraProblem: x0 must be finite");
        B.validate();
        if (!H || !K) throw std::invalid_argument("VolterraProblem: H and K must be set");
    }
};

// Sampled suprema for (A1)-(A4). Each value is a lower estimate of the true
// supremum over the documented domain; the same (samples, seed) reproduces
// it bit for bit.
struct BoundsCertificate {
    double K0 = 0.0;
    double H0 = 0.0;
    double k1 = 0.0;
    double L = 0.0;
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline Vec eval_kernel(const VolterraProblem& prob, double t, double s, const Vec& u) {
    Vec r = prob.K(t, s, u);
    if (r.size() != prob.dim || !is_finite(r))
        throw EvaluationError("kernel K produced a non-finite or wrong-size value", t, s);
    return r;
}

inline Vec eval_field(const VolterraProblem& prob, double t, const Vec& x, const Vec& y) {
    Vec r = prob.H(t, x, y);
    if (r.size() != prob.dim || !is_finite(r))
        throw EvaluationError("field H produced a non-finite or wrong-size value", t);
    return r;
}

// Structured-then-random scalar stream over [0, T]: endpoints and midpoint
// first, then uniform draws.
class TimeStream {
public:
    TimeStream(double T, std::uint64_t seed) : T_(T), rng_(seed) {}
    double next() {
        switch (count_++) {
            case 0: return 0.0;
            case 1: return T_;
            case 2: return 0.5 * T_;
            default: return std::uniform_real_distribution<double>(0.0, T_)(rng_);
        }
    }

private:
    double T_;
    std::mt19937_64 rng_;
    std::size_t count_ = 0;
};

}  // namespace detail

// (Kx)(t): composite quadrature of s -> K(t, s, traj(s)) over [0, t] or
// [0, T], sampling the trajectory by linear interpolation.
inline Vec eval_K_operator(const VolterraProblem& prob, const Trajectory& traj, double t) {
    const double upper = prob.upper_limit_mode == UpperLimitMode::variable_t ? t : prob.T;
    const double slack = 1e-9 * std::max(1.0, prob.T);
    if (t < traj.t_begin() - slack || t > traj.t_end() + slack)
        throw std::out_of_range("eval_K_operator: t outside trajectory span");
    if (traj.t_begin() > slack || traj.t_end() < upper - slack)
        throw std::out_of_range("eval_K_operator: trajectory does not cover the integration range");
    if (upper <= slack) return zeros(prob.dim);

    std::vector<double> s_nodes;
    s_nodes.reserve(traj.node_count() + 1);
    for (double ts : traj.times()) {
        if (ts > upper - slack) break;
        s_nodes.push_back(ts);
    }
    if (s_nodes.empty() || upper - s_nodes.back() > slack) s_nodes.push_back(upper);

    std::vector<Vec> f;
    f.reserve(s_nodes.size());
    for (double s : s_nodes) f.push_back(detail::eval_kernel(prob, t, s, traj.at(s)));
    return cumulative_integral(s_nodes, f, prob.quadrature).back();
}

// (A1): sampled sup of ||K(t, s, x)||_B over (t, s) in J^2, x in x0 + N*B.
inline double verify_A1(const VolterraProblem& prob, std::size_t samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("verify_A1: samples must be >= 1");
    auto xs = ball_points(prob.B, prob.x0, prob.N, samples, seed);
    detail::TimeStream ts(prob.T, seed + 1), ss(prob.T, seed + 2);
    double sup = 0.0;
    // structured cross product first so corner suprema are hit exactly
    for (double t : {0.0, 0.5 * prob.T, prob.T})
        for (double s : {0.0, 0.5 * prob.T, prob.T})
            for (std::size_t i = 0; i < std::min<std::size_t>(xs.size(), 32); ++i)
                sup = std::max(sup, gauge(detail::eval_kernel(prob, t, s, xs[i]), prob.B));
    for (const Vec& x : xs) {
        double t = ts.next(), s = ss.next();
        sup = std::max(sup, gauge(detail::eval_kernel(prob, t, s, x), prob.B));
    }
    return sup;
}

// (A2): sampled sup of ||H(t, x, y)||_B over J x (x0 + N*B) x K0*B.
inline double verify_A2(const VolterraProblem& prob, double K0, std::size_t samples,
                        std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("verify_A2: samples must be >= 1");
    auto xs = ball_points(prob.B, prob.x0, prob.N, samples, seed);
    auto ys = K0 > 0.0 ? ball_points(prob.B, zeros(prob.dim), K0, samples, seed)
                       : std::vector<Vec>(xs.size(), zeros(prob.dim));
    detail::TimeStream ts(prob.T, seed + 3);
    double sup = 0.0;
    // aligned structured prefix pairs x and y along the same directions
    std::size_t head = std::min<std::size_t>(xs.size(), 32);
    for (double t : {0.0, 0.5 * prob.T, prob.T})
        for (std::size_t i = 0; i < head; ++i)
            for (std::size_t j = 0; j < head; ++j)
                sup = std::max(sup, gauge(detail::eval_field(prob, t, xs[i], ys[j]), prob.B));
    for (std::size_t i = 0; i < xs.size(); ++i)
        sup = std::max(sup, gauge(detail::eval_field(prob, ts.next(), xs[i], ys[i]), prob.B));
    return sup;
}

namespace detail {

// Perturbation pairs inside center + scale*B: short axis chords around the
// center and each structured point, then random pairs. Points falling
// outside the ball are pulled back onto it.
inline std::vector<std::pair<Vec, Vec>> lipschitz_pairs(const Disk& B, const Vec& center,
                                                        double scale, std::size_t samples,
                                                        std::uint64_t seed) {
    auto anchors = ball_points(B, center, scale, std::max<std::size_t>(samples / 4, 2), seed);
    auto clip = [&](Vec p) {
        double g = gauge(sub(p, center), B);
        if (g > scale) p = axpy(center, scale / g, sub(p, center));
        return p;
    };
    std::vector<std::pair<Vec, Vec>> pairs;
    const double delta = 1e-4 * scale;
    for (const Vec& c : anchors) {
        for (std::size_t j = 0; j < B.dim(); ++j) {
            Vec step = zeros(B.dim());
            step[j] = delta * B.weights[j] * B.radius;
            pairs.emplace_back(clip(add(c, step)), clip(sub(c, step)));
        }
        if (pairs.size() >= samples) break;
    }
    auto extra = ball_points(B, center, scale, samples, seed + 17);
    for (std::size_t i = 0; i + 1 < extra.size() && pairs.size() < 2 * samples; i += 2)
        pairs.emplace_back(extra[i], extra[i + 1]);
    return pairs;
}

}  // namespace detail

// (A3): sampled sup of ||K(t,s,u) - K(t,s,u')||_B / ||u - u'||_B. A lower
// estimate of the true Lipschitz constant.
inline double estimate_lipschitz_K(const VolterraProblem& prob, std::size_t samples,
                                   std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("estimate_lipschitz_K: samples must be >= 1");
    auto pairs = detail::lipschitz_pairs(prob.B, prob.x0, prob.N, samples, seed);
    detail::TimeStream ts(prob.T, seed + 5), ss(prob.T, seed + 6);
    double sup = 0.0;
    for (const auto& [u, ubar] : pairs) {
        double denom = gauge(sub(u, ubar), prob.B);
        if (denom < 1e-14) continue;  // coincident pair, skip
        for (double t : {0.0, prob.T, ts.next()}) {
            double s = ss.next();
            double num = gauge(sub(detail::eval_kernel(prob, t, s, u),
                                   detail::eval_kernel(prob, t, s, ubar)),
                               prob.B);
            sup = std::max(sup, num / denom);
            num = gauge(sub(detail::eval_kernel(prob, t, t, u), detail::eval_kernel(prob, t, t, ubar)),
                        prob.B);
            sup = std::max(sup, num / denom);
        }
    }
    return sup;
}

// (A4): sampled sup of ||H(t,x1,y1) - H(t,x2,y2)||_B over the summed
// gauge distances; x-only, y-only, and joint perturbations are all tried.
inline double estimate_lipschitz_H(const VolterraProblem& prob, double K0, std::size_t samples,
                                   std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("estimate_lipschitz_H: samples must be >= 1");
    auto x_pairs = detail::lipschitz_pairs(prob.B, prob.x0, prob.N, samples, seed);
    double y_scale = K0 > 0.0 ? K0 : prob.N;
    auto y_pairs = detail::lipschitz_pairs(prob.B, zeros(prob.dim), y_scale, samples, seed + 1);
    detail::TimeStream ts(prob.T, seed + 7);
    double sup = 0.0;
    std::size_t count = std::min(x_pairs.size(), y_pairs.size());
    auto consider = [&](double t, const Vec& x1, const Vec& y1, const Vec& x2, const Vec& y2) {
        double denom = gauge(sub(x1, x2), prob.B) + gauge(sub(y1, y2), prob.B);
        if (denom < 1e-14) return;
        double num = gauge(sub(detail::eval_field(prob, t, x1, y1), detail::eval_field(prob, t, x2, y2)),
                           prob.B);
        sup = std::max(sup, num / denom);
    };
    for (std::size_t i = 0; i < count; ++i) {
        const auto& [x1, x2] = x_pairs[i];
        const auto& [y1, y2] = y_pairs[i];
        for (double t : {0.0, prob.T, ts.next()}) {
            consider(t, x1, y1, x2, y1);  // x-only
            consider(t, x1, y1, x1, y2);  // y-only
            consider(t, x1, y1, x2, y2);  // joint
        }
    }
    return sup;
}

// The full (A1)-(A4) certificate in one pass.
inline BoundsCertificate certify_bounds(const VolterraProblem& prob, std::size_t samples,
                                        std::uint64_t seed) {
    BoundsCertificate cert;
    cert.K0 = verify_A1(prob, samples, seed);
    cert.H0 = verify_A2(prob, cert.K0, samples, seed);
    cert.k1 = estimate_lipschitz_K(prob, samples, seed);
    cert.L = estimate_lipschitz_H(prob, cert.K0, samples, seed);
    cert.sample_count = samples;
    cert.seed = seed;
    return cert;
}

}  // namespace volterra
