#include "nlrd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nlrd/errors.hpp"

namespace nlrd::linalg {

double sup_norm(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

DenseLU::DenseLU(std::vector<double> matrix, std::size_t n, double pivot_tol)
    : lu_(std::move(matrix)), perm_(n), n_(n) {
    if (lu_.size() != n * n) throw ContractViolation("DenseLU: matrix size does not match n*n");
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    const double scale = std::max(sup_norm(lu_), 1e-300);
    auto at = [&](std::size_t r, std::size_t c) -> double& { return lu_[r * n_ + c]; };

    for (std::size_t k = 0; k < n_; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < n_; ++r) {
            if (std::abs(at(r, k)) > std::abs(at(piv, k))) piv = r;
        }
        if (std::abs(at(piv, k)) <= pivot_tol * scale) {
            throw SolverError("DenseLU: matrix is numerically singular at column " + std::to_string(k));
        }
        if (piv != k) {
            std::swap_ranges(lu_.begin() + static_cast<std::ptrdiff_t>(k * n_),
                             lu_.begin() + static_cast<std::ptrdiff_t>((k + 1) * n_),
                             lu_.begin() + static_cast<std::ptrdiff_t>(piv * n_));
            std::swap(perm_[k], perm_[piv]);
        }
        const double inv = 1.0 / at(k, k);
        for (std::size_t r = k + 1; r < n_; ++r) {
            const double f = at(r, k) * inv;
            if (f == 0.0) continue;
            at(r, k) = f;
            double* row = &lu_[r * n_];
            const double* prow = &lu_[k * n_];
            for (std::size_t c = k + 1; c < n_; ++c) row[c] -= f * prow[c];
        }
    }
}

std::vector<double> DenseLU::solve(std::span<const double> rhs) const {
    if (rhs.size() != n_) throw ContractViolation("DenseLU::solve: rhs size mismatch");
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = rhs[perm_[i]];
    for (std::size_t i = 0; i < n_; ++i) {
        double s = x[i];
        for (std::size_t c = 0; c < i; ++c) s -= lu_[i * n_ + c] * x[c];
        x[i] = s;
    }
    for (std::size_t i = n_; i-- > 0;) {
        double s = x[i];
        for (std::size_t c = i + 1; c < n_; ++c) s -= lu_[i * n_ + c] * x[c];
        x[i] = s / lu_[i * n_ + i];
    }
    return x;
}

std::vector<double> solve_tridiagonal(double diag, double off, std::span<const double> rhs) {
    const std::size_t n = rhs.size();
    std::vector<double> c(n), d(n), x(n);
    double denom = diag;
    if (std::abs(denom) < 1e-300) throw SolverError("tridiagonal solve: zero pivot");
    c[0] = off / denom;
    d[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag - off * c[i - 1];
        if (std::abs(denom) < 1e-300) throw SolverError("tridiagonal solve: zero pivot");
        c[i] = off / denom;
        d[i] = (rhs[i] - off * d[i - 1]) / denom;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

CgResult conjugate_gradient(const LinearMap& apply, std::span<const double> rhs, double rel_tol, int max_iter) {
    const std::size_t n = rhs.size();
    CgResult res;
    res.x.assign(n, 0.0);
    std::vector<double> r(rhs.begin(), rhs.end()), p = r, ap(n);
    const double bnorm = std::sqrt(dot(rhs, rhs));
    if (bnorm == 0.0) return res;
    double rr = dot(r, r);
    for (int it = 0; it < max_iter; ++it) {
        apply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0)) throw SolverError("conjugate gradient: operator is not positive definite");
        const double a = rr / pap;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += a * p[i];
            r[i] -= a * ap[i];
        }
        const double rr_new = dot(r, r);
        res.iterations = it + 1;
        res.residual = std::sqrt(rr_new) / bnorm;
        if (res.residual <= rel_tol) return res;
        const double b = rr_new / rr;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + b * p[i];
        rr = rr_new;
    }
    throw SolverError("conjugate gradient did not converge; relative residual " + std::to_string(res.residual));
}

}  // namespace nlrd::linalg
