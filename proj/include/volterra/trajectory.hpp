#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "volterra/vec.hpp"

namespace volterra {

// A grid function: strictly increasing node times (nominally uniform; the
// last panel may be short so spans end exactly where asked) with one state
// per node and linear interpolation in between.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::vector<double> times, std::vector<Vec> states)
        : times_(std::move(times)), states_(std::move(states)) {
        if (times_.size() < 2 || times_.size() != states_.size())
            throw std::invalid_argument("Trajectory: need >= 2 nodes with matching states");
        for (std::size_t i = 1; i < times_.size(); ++i)
            if (!(times_[i] > times_[i - 1]))
                throw std::invalid_argument("Trajectory: times must be strictly increasing");
    }

    static std::vector<double> make_grid(double a, double b, double h) {
        if (!(b > a)) throw std::invalid_argument("make_grid: empty span");
        if (!(h > 0.0)) throw std::invalid_argument("make_grid: step must be positive");
        std::vector<double> t;
        std::size_t n = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
        t.reserve(n + 2);
        for (std::size_t i = 0; i <= n; ++i) t.push_back(a + static_cast<double>(i) * h);
        if (b - t.back() > 1e-9 * std::max(1.0, h)) t.push_back(b);
        else t.back() = b;
        if (t.size() < 2) t = {a, b};
        return t;
    }

    static Trajectory constant(double a, double b, double h, const Vec& value) {
        auto grid = make_grid(a, b, h);
        return Trajectory(std::move(grid), std::vector<Vec>(grid.size(), value));
    }

    std::size_t node_count() const { return times_.size(); }
    std::size_t dim() const { return states_.front().size(); }
    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<Vec>& states() const { return states_; }
    const Vec& state(std::size_t i) const { return states_[i]; }
    const Vec& front_state() const { return states_.front(); }
    const Vec& back_state() const { return states_.back(); }

    // Linear interpolation; evaluation outside the span is an error.
    Vec at(double t) const {
        const double slack = 1e-9 * std::max(1.0, std::abs(t_end()));
        if (t < t_begin() - slack || t > t_end() + slack)
            throw std::out_of_range("Trajectory::at: t=" + std::to_string(t) + " outside [" +
                                    std::to_string(t_begin()) + ", " + std::to_string(t_end()) + "]");
        t = std::clamp(t, t_begin(), t_end());
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - times_.begin()),
                                               times_.size() - 1);
        if (hi == 0) return states_.front();
        std::size_t lo = hi - 1;
        double dt = times_[hi] - times_[lo];
        double w = (t - times_[lo]) / dt;
        Vec r(dim());
        for (std::size_t k = 0; k < r.size(); ++k)
            r[k] = (1.0 - w) * states_[lo][k] + w * states_[hi][k];
        return r;
    }

    // Appends `tail`, which must start at this trajectory's end node.
    Trajectory concat(const Trajectory& tail) const {
        if (std::abs(tail.t_begin() - t_end()) > 1e-9)
            throw std::invalid_argument("Trajectory::concat: tail does not start at the end node");
        std::vector<double> t = times_;
        std::vector<Vec> s = states_;
        for (std::size_t i = 1; i < tail.times_.size(); ++i) {
            t.push_back(tail.times_[i]);
            s.push_back(tail.states_[i]);
        }
        return Trajectory(std::move(t), std::move(s));
    }

    // CSV with header "t,x0,...,x{n-1}", one row per node, full precision.
    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("write_csv: cannot open " + path);
        out << "t";
        for (std::size_t k = 0; k < dim(); ++k) out << ",x" << k;
        out << "\n";
        char buf[32];
        for (std::size_t i = 0; i < times_.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", times_[i]);
            out << buf;
            for (double v : states_[i]) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << "," << buf;
            }
            out << "\n";
        }
    }

private:
    std::vector<double> times_;
    std::vector<Vec> states_;
};

// Cumulative integrals of the sampled integrand f over a trajectory grid:
// out[i] = integral from times[0] to times[i]. Simpson pairs panels and
// falls back to the trapezoid on an odd or irregular final panel.
enum class Quadrature { trapezoid, simpson };

inline std::vector<Vec> cumulative_integral(const std::vector<double>& times,
                                            const std::vector<Vec>& f, Quadrature quad) {
    if (times.size() != f.size() || times.empty())
        throw std::invalid_argument("cumulative_integral: size mismatch");
    const std::size_t dim = f.front().size();
    std::vector<Vec> out(times.size(), zeros(dim));
    if (quad == Quadrature::trapezoid) {
        for (std::size_t i = 1; i < times.size(); ++i) {
            double dt = times[i] - times[i - 1];
            for (std::size_t k = 0; k < dim; ++k)
                out[i][k] = out[i - 1][k] + 0.5 * dt * (f[i - 1][k] + f[i][k]);
        }
        return out;
    }
    // Simpson: advance two uniform panels at a time; each odd node gets the
    // trapezoid value of its single panel (consistent with short last steps).
    for (std::size_t i = 1; i < times.size(); ++i) {
        double dt = times[i] - times[i - 1];
        for (std::size_t k = 0; k < dim; ++k)
            out[i][k] = out[i - 1][k] + 0.5 * dt * (f[i - 1][k] + f[i][k]);
        if (i >= 2) {
            double h1 = times[i - 1] - times[i - 2];
            double h2 = times[i] - times[i - 1];
            if (std::abs(h1 - h2) <= 1e-9 * std::max(h1, h2)) {
                for (std::size_t k = 0; k < dim; ++k)
                    out[i][k] = out[i - 2][k] +
                                (h1 / 3.0) * (f[i - 2][k] + 4.0 * f[i - 1][k] + f[i][k]);
            }
        }
    }
    return out;
}

}  // namespace volterra
