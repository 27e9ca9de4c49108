#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "volterra/catalog.hpp"
#include "volterra/expr.hpp"
#include "volterra/lyapunov.hpp"
#include "volterra/oracle.hpp"
#include "volterra/picard.hpp"
#include "volterra/problem.hpp"

namespace volterra::instance {

class InstanceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Optional user-claimed bounds; a certificate run refutes a claim only with
// a concrete witness sample exceeding it.
struct ClaimedBounds {
    std::optional<double> K0, H0, k1, L;
};

struct Instance {
    VolterraProblem problem;
    std::optional<lyapunov::LyapunovSpec> lyapunov;
    std::optional<std::function<double(double)>> analytic;  // catalog problems only
    SolveConfig solver;
    oracle::OracleConfig oracle;
    ClaimedBounds claims;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw InstanceError(where + ": unknown field '" + it.key() + "'");
}

inline Disk parse_disk(const json& j) {
    reject_unknown(j, {"p", "weights", "radius"}, "disk");
    Disk d;
    if (!j.contains("p") || !j.contains("weights") || !j.contains("radius"))
        throw InstanceError("disk: fields p, weights, radius are required");
    const auto& p = j.at("p");
    if (p.is_number_integer() && p.get<int>() == 1) d.p = Disk::P::one;
    else if (p.is_number_integer() && p.get<int>() == 2) d.p = Disk::P::two;
    else if (p.is_string() && p.get<std::string>() == "inf") d.p = Disk::P::inf;
    else throw InstanceError("disk: p must be 1, 2, or \"inf\"");
    d.weights = j.at("weights").get<Vec>();
    d.radius = j.at("radius").get<double>();
    d.validate();
    return d;
}

inline std::vector<expr::Expr> parse_components(const json& j, expr::Context ctx,
                                                std::size_t dim, const std::string& name) {
    std::vector<std::string> sources;
    if (j.is_string()) sources.push_back(j.get<std::string>());
    else if (j.is_array()) sources = j.get<std::vector<std::string>>();
    else throw InstanceError(name + ": expected an expression string or array of strings");
    if (sources.size() != dim)
        throw InstanceError(name + ": expected " + std::to_string(dim) + " component(s), got " +
                            std::to_string(sources.size()));
    std::vector<expr::Expr> out;
    for (const auto& src : sources) {
        expr::Expr e;
        try {
            e = expr::parse(src, ctx);
        } catch (const expr::ParseError& pe) {
            throw InstanceError(name + ": " + pe.what());
        }
        for (char base : {'x', 'y', 'u'}) {
            long mi = e.max_index(base);
            if (mi >= 0 && static_cast<std::size_t>(mi) >= dim)
                throw InstanceError(name + ": index " + std::string(1, base) + "[" +
                                    std::to_string(mi) + "] out of range for dim " +
                                    std::to_string(dim));
        }
        out.push_back(std::move(e));
    }
    return out;
}

inline FieldMap make_field(std::vector<expr::Expr> components) {
    return [components = std::move(components)](double t, const Vec& x, const Vec& y) {
        expr::Bindings b;
        b.t = t;
        b.x = &x;
        b.y = &y;
        Vec r(components.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = components[i].eval(b);
        return r;
    };
}

inline KernelMap make_kernel(std::vector<expr::Expr> components) {
    return [components = std::move(components)](double t, double s, const Vec& u) {
        expr::Bindings b;
        b.t = t;
        b.s = s;
        b.u = &u;
        Vec r(components.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = components[i].eval(b);
        return r;
    };
}

inline lyapunov::LyapunovSpec parse_lyapunov(const json& j, std::size_t dim) {
    reject_unknown(j, {"V", "g", "S", "S0", "L_V"}, "lyapunov");
    for (const char* key : {"V", "g", "S", "S0", "L_V"})
        if (!j.contains(key)) throw InstanceError(std::string("lyapunov: missing field ") + key);

    auto parse_one = [&](const char* name, expr::Context ctx) {
        auto comps = parse_components(j.at(name), ctx, 1, std::string("lyapunov.") + name);
        return comps.front();
    };
    expr::Expr V = parse_one("V", expr::Context::lyapunov_V);
    expr::Expr g = parse_one("g", expr::Context::lyapunov_g);
    expr::Expr S = parse_one("S", expr::Context::lyapunov_S);
    for (char base : {'x', 'y'}) {
        long mi = V.max_index(base);
        if (mi >= 0 && static_cast<std::size_t>(mi) >= dim)
            throw InstanceError("lyapunov.V: index out of range for dim " + std::to_string(dim));
    }

    lyapunov::LyapunovSpec spec;
    spec.S0 = j.at("S0").get<double>();
    spec.L_V = j.at("L_V").get<double>();
    spec.V = [V](double t, const Vec& x, const Vec& y) {
        expr::Bindings b;
        b.t = t;
        b.x = &x;
        b.y = &y;
        return V.eval(b);
    };
    spec.g = [g](double t, double v, double w) {
        expr::Bindings b;
        b.t = t;
        b.v = v;
        b.w = w;
        return g.eval(b);
    };
    spec.S = [S](double t, double s, double v) {
        expr::Bindings b;
        b.t = t;
        b.s = s;
        b.v = v;
        return S.eval(b);
    };
    return spec;
}

}  // namespace detail

inline Instance from_json(const nlohmann::json& j) {
    using detail::reject_unknown;
    reject_unknown(j,
                   {"dim", "x0", "T", "disk", "N", "upper_limit_mode", "quadrature", "H", "K",
                    "catalog", "lyapunov", "solver", "oracle", "claimed_bounds"},
                   "instance");
    Instance inst;

    if (j.contains("catalog")) {
        auto entry = catalog::get(j.at("catalog").get<std::string>());
        inst.problem = entry.problem;
        inst.lyapunov = entry.lyapunov;
        inst.analytic = entry.analytic;
    } else {
        for (const char* key : {"dim", "x0", "T", "disk", "H", "K"})
            if (!j.contains(key)) throw InstanceError(std::string("instance: missing field ") + key);
        VolterraProblem& p = inst.problem;
        p.dim = j.at("dim").get<std::size_t>();
        p.x0 = j.at("x0").get<Vec>();
        p.T = j.at("T").get<double>();
        p.B = detail::parse_disk(j.at("disk"));
        p.H = detail::make_field(
            detail::parse_components(j.at("H"), expr::Context::field, p.dim, "H"));
        p.K = detail::make_kernel(
            detail::parse_components(j.at("K"), expr::Context::kernel, p.dim, "K"));
    }

    VolterraProblem& p = inst.problem;
    if (j.contains("N")) p.N = j.at("N").get<double>();
    if (j.contains("upper_limit_mode")) {
        std::string mode = j.at("upper_limit_mode").get<std::string>();
        if (mode == "variable_t") p.upper_limit_mode = UpperLimitMode::variable_t;
        else if (mode == "fixed_T") p.upper_limit_mode = UpperLimitMode::fixed_T;
        else throw InstanceError("instance: upper_limit_mode must be variable_t or fixed_T");
    }
    if (j.contains("quadrature")) {
        std::string q = j.at("quadrature").get<std::string>();
        if (q == "trapezoid") p.quadrature = Quadrature::trapezoid;
        else if (q == "simpson") p.quadrature = Quadrature::simpson;
        else throw InstanceError("instance: quadrature must be trapezoid or simpson");
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw InstanceError(std::string("instance: ") + e.what());
    }

    inst.solver.N = p.N;
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        reject_unknown(s, {"h", "tol", "max_iter", "N", "sigma_policy"}, "solver");
        if (s.contains("h")) inst.solver.h = s.at("h").get<double>();
        if (s.contains("tol")) inst.solver.tol = s.at("tol").get<double>();
        if (s.contains("max_iter")) inst.solver.max_iter = s.at("max_iter").get<std::size_t>();
        if (s.contains("N")) inst.solver.N = s.at("N").get<double>();
        if (s.contains("sigma_policy")) inst.solver.sigma_policy = s.at("sigma_policy").get<double>();
        try {
            inst.solver.validate();
        } catch (const std::invalid_argument& e) {
            throw InstanceError(std::string("solver: ") + e.what());
        }
    }
    if (j.contains("oracle")) {
        const auto& o = j.at("oracle");
        reject_unknown(o, {"h_fine"}, "oracle");
        if (o.contains("h_fine")) inst.oracle.h_fine = o.at("h_fine").get<double>();
        if (!(inst.oracle.h_fine > 0.0)) throw InstanceError("oracle: h_fine must be positive");
    }
    if (j.contains("lyapunov"))
        inst.lyapunov = detail::parse_lyapunov(j.at("lyapunov"), p.dim);
    if (j.contains("claimed_bounds")) {
        const auto& c = j.at("claimed_bounds");
        reject_unknown(c, {"K0", "H0", "k1", "L"}, "claimed_bounds");
        if (c.contains("K0")) inst.claims.K0 = c.at("K0").get<double>();
        if (c.contains("H0")) inst.claims.H0 = c.at("H0").get<double>();
        if (c.contains("k1")) inst.claims.k1 = c.at("k1").get<double>();
        if (c.contains("L")) inst.claims.L = c.at("L").get<double>();
    }
    return inst;
}

inline Instance load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InstanceError("cannot open instance file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InstanceError(std::string("malformed JSON: ") + e.what());
    }
    try {
        return from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw InstanceError(std::string("schema error: ") + e.what());
    }
}

}  // namespace volterra::instance
