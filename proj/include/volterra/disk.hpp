#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include "volterra/errors.hpp"
#include "volterra/vec.hpp"

namespace volterra {

// A closed, bounded, absolutely convex set: an origin-centered weighted
// p-ball { x : ||(x_i / w_i)_i||_p <= radius }. Its Minkowski functional
// ||x||_B has a closed form for p in {1, 2, inf}.
struct Disk {
    enum class P { one, two, inf };

    P p = P::inf;
    Vec weights;
    double radius = 1.0;

    static Disk box(std::size_t dim, double radius = 1.0) {
        return Disk{P::inf, Vec(dim, 1.0), radius};
    }
    static Disk ball(std::size_t dim, double radius = 1.0) {
        return Disk{P::two, Vec(dim, 1.0), radius};
    }

    std::size_t dim() const { return weights.size(); }

    void validate() const {
        if (weights.empty()) throw std::invalid_argument("Disk: empty weights");
        if (!(radius > 0.0)) throw std::invalid_argument("Disk: radius must be positive");
        for (double w : weights)
            if (!(w > 0.0)) throw std::invalid_argument("Disk: weights must be positive");
    }
};

// Minkowski gauge ||x||_B = inf{ t >= 0 : x in t*B }.
inline double gauge(const Vec& x, const Disk& B) {
    require_same_dim(x, B.weights, "gauge");
    double acc = 0.0;
    switch (B.p) {
        case Disk::P::one:
            for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i]) / B.weights[i];
            break;
        case Disk::P::two:
            for (std::size_t i = 0; i < x.size(); ++i) {
                double r = x[i] / B.weights[i];
                acc += r * r;
            }
            acc = std::sqrt(acc);
            break;
        case Disk::P::inf:
            for (std::size_t i = 0; i < x.size(); ++i)
                acc = std::max(acc, std::abs(x[i]) / B.weights[i]);
            break;
    }
    return acc / B.radius;
}

// Closed-disk membership: gauge(x, B) <= 1 + tol.
inline bool contains(const Disk& B, const Vec& x, double tol = 0.0) {
    return gauge(x, B) <= 1.0 + tol;
}

// a*B = { a*x : x in B }.
inline Disk scale_disk(const Disk& B, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("scale_disk: factor must be positive");
    Disk r = B;
    r.radius = a * B.radius;
    return r;
}

namespace detail {

// Deterministic direction stream: axis directions and diagonal corner
// directions first (where p-ball suprema live), then seeded gaussian
// directions. Directions are not yet gauge-normalized.
class DirectionStream {
public:
    DirectionStream(std::size_t dim, std::uint64_t seed) : dim_(dim), rng_(seed) {}

    Vec next() {
        const std::size_t n_axis = 2 * dim_;
        const std::size_t n_corner = dim_ <= 10 ? (std::size_t{1} << dim_) : 0;
        Vec d(dim_, 0.0);
        if (count_ < n_axis) {
            std::size_t i = count_ / 2;
            d[i] = (count_ % 2 == 0) ? 1.0 : -1.0;
        } else if (count_ < n_axis + n_corner) {
            std::size_t bits = count_ - n_axis;
            for (std::size_t i = 0; i < dim_; ++i)
                d[i] = (bits >> i) & 1 ? -1.0 : 1.0;
        } else {
            std::normal_distribution<double> normal(0.0, 1.0);
            double norm2 = 0.0;
            do {
                norm2 = 0.0;
                for (std::size_t i = 0; i < dim_; ++i) {
                    d[i] = normal(rng_);
                    norm2 += d[i] * d[i];
                }
            } while (norm2 < 1e-12);
        }
        ++count_;
        return d;
    }

private:
    std::size_t dim_;
    std::mt19937_64 rng_;
    std::size_t count_ = 0;
};

}  // namespace detail

// Points on the boundary of center + scale*B. The first samples are the
// gauge-normalized axis/corner directions, then seeded random directions,
// so a longer run extends (never reshuffles) a shorter one.
inline std::vector<Vec> boundary_points(const Disk& B, const Vec& center, double scale,
                                        std::size_t count, std::uint64_t seed) {
    require_same_dim(center, B.weights, "boundary_points");
    detail::DirectionStream dirs(B.dim(), seed);
    std::vector<Vec> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        Vec d = dirs.next();
        double g = gauge(d, B);
        out.push_back(axpy(center, scale / g, d));
    }
    return out;
}

// Points of center + scale*B including interior ones: the structured
// boundary prefix, then random directions at random radii.
inline std::vector<Vec> ball_points(const Disk& B, const Vec& center, double scale,
                                    std::size_t count, std::uint64_t seed) {
    require_same_dim(center, B.weights, "ball_points");
    detail::DirectionStream dirs(B.dim(), seed);
    std::mt19937_64 radius_rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t n_struct = 2 * B.dim() + (B.dim() <= 10 ? (std::size_t{1} << B.dim()) : 0);
    std::vector<Vec> out;
    out.reserve(count + 1);
    out.push_back(center);
    for (std::size_t k = 0; k + 1 < count; ++k) {
        Vec d = dirs.next();
        double g = gauge(d, B);
        // structured prefix stays on the boundary; random tail alternates
        double r = (k < n_struct || k % 2 == 0) ? 1.0 : unif(radius_rng);
        out.push_back(axpy(center, scale * r / g, d));
    }
    return out;
}

// Sampled estimate of sup_{x on boundary of B} gauge(x, D). A value <= 1
// certifies B subset of D on the sample set.
inline double disk_inclusion_margin(const Disk& B, const Disk& D, std::size_t samples,
                                    std::uint64_t seed) {
    if (B.dim() != D.dim()) throw std::invalid_argument("disk_inclusion_margin: dimension mismatch");
    if (samples < 1) throw std::invalid_argument("disk_inclusion_margin: samples must be >= 1");
    double sup = 0.0;
    for (const Vec& x : boundary_points(B, zeros(B.dim()), 1.0, samples, seed))
        sup = std::max(sup, gauge(x, D));
    return sup;
}

// Two-sided equivalence constants of ||.||_D against the reference gauge
// on the set B, at sample resolution.
struct MackeyReport {
    double lower_const = 0.0;
    double upper_const = 0.0;
    std::size_t sample_count = 0;
    double max_violation = 0.0;
};

inline MackeyReport check_strict_mackey(const Disk& B, const Disk& D, const Disk& ref,
                                        std::size_t samples, std::uint64_t seed) {
    if (B.dim() != D.dim() || B.dim() != ref.dim())
        throw std::invalid_argument("check_strict_mackey: dimension mismatch");
    if (disk_inclusion_margin(B, D, samples, seed) > 1.0 + 1e-9)
        throw PreconditionError("check_strict_mackey: B is not contained in D");

    MackeyReport rep;
    rep.lower_const = std::numeric_limits<double>::infinity();
    for (const Vec& x : ball_points(B, zeros(B.dim()), 1.0, samples, seed)) {
        double gref = gauge(x, ref);
        if (gref == 0.0) continue;  // zero vector carries no ratio
        double ratio = gauge(x, D) / gref;
        rep.lower_const = std::min(rep.lower_const, ratio);
        rep.upper_const = std::max(rep.upper_const, ratio);
        ++rep.sample_count;
    }
    if (rep.sample_count == 0)
        throw PreconditionError("check_strict_mackey: no nonzero samples");
    // The constants are the sampled extremes, so no sample violates them.
    rep.max_violation = 0.0;
    return rep;
}

}  // namespace volterra
