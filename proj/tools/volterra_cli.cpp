// Command-line front end: load an instance, certify bounds, solve, run the
// Lyapunov pipeline, or cross-check against the reference solver.
//
// Exit codes: 0 success, 1 input/schema error, 2 check failure with
// witness, 3 partial solve (non-convergence or ball exit).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "volterra/catalog.hpp"
#include "volterra/instance.hpp"
#include "volterra/lyapunov.hpp"
#include "volterra/oracle.hpp"
#include "volterra/picard.hpp"

namespace {

using nlohmann::json;
using namespace volterra;

json cert_to_json(const BoundsCertificate& c) {
    return json{{"K0", c.K0},           {"H0", c.H0},   {"k1", c.k1},
                {"L", c.L},             {"samples", c.sample_count},
                {"seed", c.seed}};
}

BoundsCertificate cert_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw instance::InstanceError("cannot open certificate file: " + path);
    json j = json::parse(in);
    BoundsCertificate c;
    c.K0 = j.at("K0").get<double>();
    c.H0 = j.at("H0").get<double>();
    c.k1 = j.at("k1").get<double>();
    c.L = j.at("L").get<double>();
    if (j.contains("samples")) c.sample_count = j.at("samples").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

json report_to_json(const SolveReport& r) {
    json segments = json::array();
    for (const auto& s : r.segments)
        segments.push_back(json{{"sigma_start", s.sigma_start},
                                {"sigma_end", s.sigma_end},
                                {"iterations", s.iterations},
                                {"final_delta", s.final_delta}});
    json j{{"eta", r.eta},
           {"segments", segments},
           {"converged", r.converged},
           {"iterate_deltas", r.iterate_deltas},
           {"ball_margin", r.ball_margin}};
    if (!r.failure.empty()) j["failure"] = r.failure;
    return j;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << j.dump(2) << "\n";
}

int cmd_verify_bounds(const std::string& instance_path, std::size_t samples, std::uint64_t seed,
                      const std::string& out_path) {
    instance::Instance inst = instance::load(instance_path);
    BoundsCertificate cert = certify_bounds(inst.problem, samples, seed);
    json j = cert_to_json(cert);

    int exit_code = 0;
    json violations = json::array();
    auto check_claim = [&](const char* name, std::optional<double> claimed, double measured) {
        if (claimed && measured > *claimed + 1e-12) {
            violations.push_back(json{{"bound", name},
                                      {"claimed", *claimed},
                                      {"measured_witness", measured}});
            exit_code = 2;
        }
    };
    check_claim("K0", inst.claims.K0, cert.K0);
    check_claim("H0", inst.claims.H0, cert.H0);
    check_claim("k1", inst.claims.k1, cert.k1);
    check_claim("L", inst.claims.L, cert.L);
    if (!violations.empty()) j["violations"] = violations;

    if (!out_path.empty()) write_json(out_path, j);
    std::cout << j.dump(2) << "\n";
    return exit_code;
}

int cmd_lyapunov(const std::string& instance_path, const std::string& out_prefix,
                 std::size_t samples, std::uint64_t seed) {
    instance::Instance inst = instance::load(instance_path);
    if (!inst.lyapunov) {
        std::cerr << "error: instance has no lyapunov object\n";
        return 1;
    }
    const VolterraProblem& prob = inst.problem;
    const lyapunov::LyapunovSpec& spec = *inst.lyapunov;
    BoundsCertificate cert = certify_bounds(prob, samples, seed);
    if (cert.K0 > 1.0)
        std::cerr << "warning: K0 = " << cert.K0
                  << " > 1; the dissipativity condition presumes K0*B inside B\n";

    json j;
    bool all_ok = true;

    auto axioms = lyapunov::check_V_axioms(spec, prob.B, prob.x0, prob.N, prob.T, samples, seed);
    j["axioms"] = {{"passed", axioms.passed()},
                   {"max_diagonal", axioms.max_diagonal},
                   {"max_lipschitz_ratio", axioms.max_lipschitz_ratio}};
    if (!axioms.failures.empty()) {
        json f = json::array();
        for (const auto& w : axioms.failures)
            f.push_back(json{{"t", w.t}, {"x", w.x}, {"y", w.y}, {"value", w.value}, {"what", w.what}});
        j["axioms"]["witnesses"] = f;
    }
    all_ok = all_ok && axioms.passed();

    // two solution trajectories with separated initial states
    SolveResult base = solve(prob, cert, inst.solver);
    VolterraProblem shifted = prob;
    shifted.x0 = prob.x0;
    shifted.x0[0] += 0.25 * prob.B.weights[0] * prob.B.radius;
    SolveResult other = solve(shifted, certify_bounds(shifted, samples, seed), inst.solver);
    if (!base.report.converged || !other.report.converged) {
        std::cerr << "error: baseline solves did not converge\n";
        return 3;
    }

    double horizon = std::min(base.traj.t_end(), other.traj.t_end());
    std::vector<double> t_samples;
    for (int i = 1; i <= 8; ++i) {
        double t = horizon * static_cast<double>(i) / 8.0;
        if (t > 0.02) t_samples.push_back(t);
    }
    auto diss = lyapunov::check_dissipative(prob, spec, base.traj, other.traj, t_samples);
    j["dissipativity"] = {{"passed", diss.passed()},
                          {"max_margin", diss.max_margin},
                          {"witness_t", diss.witness_t},
                          {"witness_V", diss.witness_V},
                          {"S_bound_ok", diss.s_bound_ok},
                          {"max_abs_S", diss.max_abs_S}};
    all_ok = all_ok && diss.passed();

    std::vector<double> epsilons;
    for (int n = 1; n <= 8; ++n) epsilons.push_back(std::pow(2.0, -n));
    auto seq = lyapunov::generate_eps_approximations(prob, cert, inst.solver, epsilons);
    Disk D = scale_disk(prob.B, 2.0);
    auto mutual = lyapunov::check_mutual_convergence(seq, spec, prob.B, D, &base.traj);
    j["eps_approximations"] = {{"epsilons", seq.epsilons}, {"defects", seq.defects}};
    j["mutual_convergence"] = {{"passed", mutual.passed()},
                               {"V_matrix", mutual.V_matrix},
                               {"tail_max", mutual.tail_max},
                               {"tail_max_D", mutual.tail_max_D},
                               {"baseline_distance", mutual.baseline_distance}};
    all_ok = all_ok && mutual.passed();

    j["passed"] = all_ok;
    if (!out_prefix.empty()) write_json(out_prefix + ".lyapunov.json", j);
    std::cout << j.dump(2) << "\n";
    return all_ok ? 0 : 2;
}

int cmd_oracle_compare(const std::string& instance_path, const std::string& out_prefix,
                       double compare_tol, std::size_t samples, std::uint64_t seed) {
    instance::Instance inst = instance::load(instance_path);
    BoundsCertificate cert = certify_bounds(inst.problem, samples, seed);
    SolveResult res = solve(inst.problem, cert, inst.solver);
    if (!res.report.converged) {
        std::cerr << "error: picard solve did not converge: " << res.report.failure << "\n";
        return 3;
    }
    Trajectory ref = oracle::reference_solve(inst.problem, inst.oracle, res.traj.t_end());
    double sup = oracle::compare(res.traj, ref, inst.problem.B);
    json j{{"sup_distance", sup}, {"tolerance", compare_tol}, {"eta", res.report.eta}};
    if (!out_prefix.empty()) write_json(out_prefix + ".compare.json", j);
    std::cout << j.dump(2) << "\n";
    return sup <= compare_tol ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volterra integro-differential equation solver"};
    app.require_subcommand(1);

    std::string instance_path, out, cert_path;
    std::size_t samples = 2000;
    std::uint64_t seed = 42;
    double h = 0.0, tol = 0.0, compare_tol = 1e-4;
    std::size_t max_iter = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("instance", instance_path, "instance JSON file")->required();
        cmd->add_option("--samples", samples, "certificate sample count");
        cmd->add_option("--seed", seed, "seed for all sampling");
        cmd->add_option("--out", out, "output path or prefix");
    };

    CLI::App* verify = app.add_subcommand("verify-bounds", "compute the sampled bound certificate");
    add_common(verify);

    CLI::App* solve_cmd = app.add_subcommand("solve", "successive-approximation solve to eta");
    solve_cmd->set_help_flag("--help", "print help");  // frees -h for the grid step
    add_common(solve_cmd);
    solve_cmd->add_option("--cert", cert_path, "certificate JSON (computed inline when absent)");
    solve_cmd->add_option("--h", h, "grid step override");
    solve_cmd->add_option("--tol", tol, "convergence tolerance override");
    solve_cmd->add_option("--max-iter", max_iter, "iteration cap override");

    CLI::App* lyap = app.add_subcommand("lyapunov", "run the dissipativity pipeline");
    add_common(lyap);

    CLI::App* oracle_cmd = app.add_subcommand("oracle-compare", "cross-check against the reference solver");
    add_common(oracle_cmd);
    oracle_cmd->add_option("--compare-tol", compare_tol, "acceptance threshold for the sup distance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (verify->parsed()) return cmd_verify_bounds(instance_path, samples, seed, out);
        if (solve_cmd->parsed()) {
            instance::Instance inst = instance::load(instance_path);
            if (h > 0.0) inst.solver.h = h;
            if (tol > 0.0) inst.solver.tol = tol;
            if (max_iter > 0) inst.solver.max_iter = max_iter;
            BoundsCertificate cert = cert_path.empty()
                                         ? certify_bounds(inst.problem, samples, seed)
                                         : cert_from_file(cert_path);
            SolveResult res = solve(inst.problem, cert, inst.solver);
            if (!out.empty()) {
                res.traj.write_csv(out + ".csv");
                write_json(out + ".report.json", report_to_json(res.report));
            }
            std::cout << report_to_json(res.report).dump(2) << "\n";
            return res.report.converged ? 0 : 3;
        }
        if (lyap->parsed()) return cmd_lyapunov(instance_path, out, samples, seed);
        if (oracle_cmd->parsed())
            return cmd_oracle_compare(instance_path, out, compare_tol, samples, seed);
    } catch (const instance::InstanceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const BallExitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
