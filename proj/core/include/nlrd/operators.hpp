#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "nlrd/model.hpp"

namespace nlrd {

enum class OperatorKind { NonlocalL, LaplacianD };

/// Linear operator on interior-node fields with the Dirichlet condition built in.
///
/// NonlocalL represents J*u - u with u fixed outside the domain (zero by
/// default); LaplacianD is the centred second difference with boundary rows
/// eliminated. Both accept an `exterior` value used in place of the zero
/// Dirichlet datum, which the regularized continuation needs.
///
/// Instances are immutable after assembly and safe to share across threads.
class DiscreteOperator {
public:
    OperatorKind kind() const noexcept { return kind_; }
    const DomainSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return grid_.size(); }
    double scale() const noexcept { return scale_; }

    /// y = Op x, with exterior/boundary value `exterior`.
    void apply(std::span<const double> x, std::span<double> y, double exterior = 0.0) const;
    Field apply(const Field& x, double exterior = 0.0) const;

    double diagonal(std::size_t i) const;
    /// Largest dt for which I + dt Op has nonnegative entries (forward Euler
    /// keeps ordering and positivity): h^2/2 per Laplacian axis pair, 1 for
    /// the nonlocal part, divided by the scale factor.
    double max_monotone_dt() const;

    /// Quadrature mass sum_j w_j J(x_i - x_j) over interior nodes (NonlocalL only).
    std::span<const double> kernel_row_mass() const noexcept { return row_mass_; }
    /// Factor applied to J so that the lattice sum over R^dim equals 1.
    double kernel_renormalization() const noexcept { return renorm_; }

    /// Same operator multiplied by c > 0.
    DiscreteOperator scaled(double c) const;

    /// Dense row-major copy (n x n); exterior contributions excluded.
    std::vector<double> to_dense() const;

private:
    friend DiscreteOperator assemble_nonlocal(const DomainSpec& grid, const KernelSpec& kernel);
    friend DiscreteOperator assemble_laplacian(const DomainSpec& grid);

    OperatorKind kind_ = OperatorKind::LaplacianD;
    DomainSpec grid_{};
    double scale_ = 1.0;

    // NonlocalL: dense K_ij = w_j J(x_i - x_j) and the column band holding
    // the nonzeros of each row.
    std::vector<double> weights_;
    std::vector<std::pair<std::size_t, std::size_t>> band_;
    std::vector<double> row_mass_;
    double renorm_ = 1.0;
};

/// Trapezoid quadrature of J*u - u over interior nodes, kernel renormalized
/// once so that its full-lattice quadrature sum is exactly 1.
/// Throws ResolutionError when radius < 2h.
DiscreteOperator assemble_nonlocal(const DomainSpec& grid, const KernelSpec& kernel);

/// Second-order centred Laplacian with homogeneous Dirichlet rows eliminated.
/// Requires n >= 3.
DiscreteOperator assemble_laplacian(const DomainSpec& grid);

/// a = 1 - max_i kernel_row_mass[i]; lies in [0, 1).
double mass_deficit_constant(const DiscreteOperator& nonlocal);

/// Principal Dirichlet eigenpair of -Op.
struct EigenPair {
    double value = 0.0;
    Field vector;  // positive, sup-normalized
    double min_vector = 0.0;
    double residual = 0.0;
    long iterations = 0;
};

/// Smallest eigenvalue of -Op with its positive eigenvector.
///
/// LaplacianD uses inverse iteration with shift 0; NonlocalL uses power
/// iteration on scale*I + Op, whose dominant eigenvalue is scale - lambda_1.
/// Converged when ||(-Op)x - value x||_inf <= tol * max(1, value).
/// Throws ConvergenceError past `max_iter` iterations.
EigenPair principal_eigenpair(const DiscreteOperator& op, double tol = 1e-10, long max_iter = 100000);

/// Solves (-Op) x = 1. Throws SolverError on a singular system.
Field solve_torsion(const DiscreteOperator& op);

}  // namespace nlrd
