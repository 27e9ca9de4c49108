#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "volterra/lyapunov.hpp"
#include "volterra/problem.hpp"

namespace volterra::catalog {

struct CatalogEntry {
    VolterraProblem problem;
    std::optional<lyapunov::LyapunovSpec> lyapunov;
    // closed-form solution when one exists (scalar problems)
    std::function<double(double)> analytic;
};

// Builtin problems used by the test and acceptance suites:
//   zero        x' = 0                      -> x0
//   sinh        x' = 1 + int_0^t x(s) ds    -> sinh(t)
//   exp         x' = x                      -> e^t
//   contractive x' = -x  (+ V = ||x-y||_B)  -> e^-t
//   expansive   x' = +x  (+ V = ||x-y||_B)  -> e^t
inline CatalogEntry get(const std::string& name) {
    CatalogEntry e;
    VolterraProblem& p = e.problem;
    p.dim = 1;
    p.T = 1.0;
    p.N = 1.0;
    p.B = Disk{Disk::P::inf, Vec{1.0}, 2.0};
    p.upper_limit_mode = UpperLimitMode::variable_t;
    p.quadrature = Quadrature::trapezoid;

    auto gauge_V = [B = p.B](double, const Vec& x, const Vec& y) { return gauge(sub(x, y), B); };
    auto zero_g = [](double, double, double) { return 0.0; };
    auto zero_S = [](double, double, double) { return 0.0; };

    if (name == "zero") {
        p.x0 = {0.0};
        p.H = [](double, const Vec& x, const Vec&) { return Vec(x.size(), 0.0); };
        p.K = [](double, double, const Vec& u) { return Vec(u.size(), 0.0); };
        e.analytic = [](double) { return 0.0; };
    } else if (name == "sinh") {
        p.x0 = {0.0};
        p.H = [](double, const Vec&, const Vec& y) { return Vec{1.0 + y[0]}; };
        p.K = [](double, double, const Vec& u) { return u; };
        e.analytic = [](double t) { return std::sinh(t); };
    } else if (name == "exp") {
        p.x0 = {1.0};
        p.H = [](double, const Vec& x, const Vec&) { return x; };
        p.K = [](double, double, const Vec& u) { return Vec(u.size(), 0.0); };
        e.analytic = [](double t) { return std::exp(t); };
    } else if (name == "contractive") {
        p.x0 = {1.0};
        p.H = [](double, const Vec& x, const Vec&) { return scale(x, -1.0); };
        p.K = [](double, double, const Vec& u) { return Vec(u.size(), 0.0); };
        e.analytic = [](double t) { return std::exp(-t); };
        e.lyapunov = lyapunov::LyapunovSpec{gauge_V, zero_g, zero_S, 1.0, 1.0};
    } else if (name == "expansive") {
        p.x0 = {1.0};
        p.H = [](double, const Vec& x, const Vec&) { return x; };
        p.K = [](double, double, const Vec& u) { return Vec(u.size(), 0.0); };
        e.analytic = [](double t) { return std::exp(t); };
        e.lyapunov = lyapunov::LyapunovSpec{gauge_V, zero_g, zero_S, 1.0, 1.0};
    } else {
        throw std::invalid_argument("unknown catalog problem '" + name + "'");
    }
    return e;
}

inline bool exists(const std::string& name) {
    return name == "zero" || name == "sinh" || name == "exp" || name == "contractive" ||
           name == "expansive";
}

}  // namespace volterra::catalog
