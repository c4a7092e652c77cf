#pragma once

#include <stdexcept>
#include <string>

namespace nlrd {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grid too coarse for a kernel support or an initial-data feature.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Iterative eigen solver hit its iteration cap.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, long iterations)
        : Error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    long iterations() const noexcept { return iterations_; }

private:
    double residual_;
    long iterations_;
};

/// Singular or ill-conditioned linear system.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Adaptive step collapsed (dt < 1e-14 t).
class StiffnessError : public Error {
public:
    StiffnessError(const std::string& what, double t, double dt)
        : Error(what), t_(t), dt_(dt) {}

    double time() const noexcept { return t_; }
    double dt() const noexcept { return dt_; }

private:
    double t_;
    double dt_;
};

/// Verifier invoked outside the exponent regime it is defined for.
class WrongRegimeError : public Error {
public:
    using Error::Error;
};

/// Blow-up rate fit could not be performed on the supplied series.
class FitError : public Error {
public:
    using Error::Error;
};

/// Caller broke a documented precondition (shape mismatch, bad sign, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Invalid problem/plan document. `what()` lists every violated invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace nlrd
