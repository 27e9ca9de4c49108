#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace volterra {

// Thrown when a map (kernel, field, Lyapunov component) produces a
// non-finite value or an expression fails at evaluation time. Carries the
// point at which evaluation broke down.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(std::string what, double t, double s = 0.0)
        : std::runtime_error(std::move(what)), t_(t), s_(s) {}
    double witness_t() const { return t_; }
    double witness_s() const { return s_; }

private:
    double t_;
    double s_;
};

// Successive approximation did not reach the tolerance within max_iter.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(std::string what, std::vector<double> deltas)
        : std::runtime_error(std::move(what)), deltas_(std::move(deltas)) {}
    const std::vector<double>& delta_history() const { return deltas_; }

private:
    std::vector<double> deltas_;
};

// An iterate left the ball x0 + N*B, invalidating the bound certificate.
class BallExitError : public std::runtime_error {
public:
    BallExitError(std::string what, double t)
        : std::runtime_error(std::move(what)), t_(t) {}
    double witness_t() const { return t_; }

private:
    double t_;
};

// A stated precondition (e.g. B subset of D) failed.
class PreconditionError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An epsilon-approximation failed its a-posteriori defect certification.
class DefectError : public std::runtime_error {
public:
    DefectError(std::string what, double measured)
        : std::runtime_error(std::move(what)), measured_(measured) {}
    double measured_defect() const { return measured_; }

private:
    double measured_;
};

}  // namespace volterra
