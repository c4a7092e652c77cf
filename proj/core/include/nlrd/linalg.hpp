#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nlrd::linalg {

double sup_norm(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);

/// LU factorization with partial pivoting of a dense row-major n x n matrix.
class DenseLU {
public:
    /// Throws SolverError when a pivot falls below `pivot_tol` times the
    /// largest entry of the matrix.
    DenseLU(std::vector<double> matrix, std::size_t n, double pivot_tol = 1e-13);

    std::vector<double> solve(std::span<const double> rhs) const;
    std::size_t size() const noexcept { return n_; }

private:
    std::vector<double> lu_;
    std::vector<std::size_t> perm_;
    std::size_t n_;
};

/// Solves a tridiagonal system with constant off-diagonal `off` and diagonal
/// `diag` (Thomas algorithm). Throws SolverError on a vanishing pivot.
std::vector<double> solve_tridiagonal(double diag, double off, std::span<const double> rhs);

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0;
};

/// Conjugate gradients for a symmetric positive definite map.
/// Throws SolverError when the relative residual stays above `rel_tol`.
CgResult conjugate_gradient(const LinearMap& apply, std::span<const double> rhs, double rel_tol = 1e-13,
                            int max_iter = 100000);

}  // namespace nlrd::linalg
