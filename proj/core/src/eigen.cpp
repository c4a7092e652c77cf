#include <algorithm>
#include <cmath>

#include "nlrd/errors.hpp"
#include "nlrd/linalg.hpp"
#include "nlrd/operators.hpp"

namespace nlrd {

namespace {

void sup_normalize(Field& x) {
    const double m = linalg::sup_norm(x);
    for (double& v : x) v /= m;
}

double eigen_residual(const DiscreteOperator& op, const Field& x, double value, Field& work) {
    op.apply(std::span<const double>(x), std::span<double>(work));
    double r = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, std::abs(-work[i] - value * x[i]));
    return r;
}

EigenPair finish(Field x, double value, double residual, long iterations) {
    EigenPair out;
    out.value = value;
    out.min_vector = *std::min_element(x.begin(), x.end());
    out.vector = std::move(x);
    out.residual = residual;
    out.iterations = iterations;
    return out;
}

EigenPair nonlocal_power_iteration(const DiscreteOperator& op, double tol, long max_iter) {
    const std::size_t n = op.size();
    const double shift = op.scale();
    Field x(n, 1.0), y(n);
    double residual = 0.0;
    for (long it = 1; it <= max_iter; ++it) {
        // y = (shift I + Op) x; its dominant eigenvalue is shift - lambda_1
        op.apply(std::span<const double>(x), std::span<double>(y));
        for (std::size_t i = 0; i < n; ++i) y[i] += shift * x[i];
        const double theta = linalg::dot(x, y) / linalg::dot(x, x);
        const double value = shift - theta;
        residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(y[i] - theta * x[i]));
        if (residual <= tol * std::max(1.0, std::abs(value))) return finish(std::move(x), value, residual, it);
        x = y;
        sup_normalize(x);
    }
    throw ConvergenceError("nonlocal power iteration did not converge; residual " + std::to_string(residual),
                           residual, max_iter);
}

EigenPair laplacian_inverse_iteration(const DiscreteOperator& op, double tol, long max_iter) {
    const std::size_t n = op.size();
    const auto& grid = op.grid();
    Field x(n, 1.0), work(n);
    auto neg = [&op](std::span<const double> in, std::span<double> out) {
        op.apply(in, out);
        for (double& v : out) v = -v;
    };
    double residual = 0.0;
    for (long it = 1; it <= max_iter; ++it) {
        Field y;
        if (grid.dim == 1) {
            const double h2 = grid.h(0) * grid.h(0);
            y = linalg::solve_tridiagonal(2.0 * op.scale() / h2, -op.scale() / h2, x);
        } else {
            y = linalg::conjugate_gradient(neg, x, 1e-14).x;
        }
        x = std::move(y);
        sup_normalize(x);
        neg(x, work);
        const double value = linalg::dot(x, work) / linalg::dot(x, x);
        residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(work[i] - value * x[i]));
        if (residual <= tol * std::max(1.0, std::abs(value))) return finish(std::move(x), value, residual, it);
    }
    throw ConvergenceError("Laplacian inverse iteration did not converge; residual " + std::to_string(residual),
                           residual, max_iter);
}

}  // namespace

EigenPair principal_eigenpair(const DiscreteOperator& op, double tol, long max_iter) {
    if (!(tol > 0)) throw ContractViolation("eigen tolerance must be positive");
    EigenPair pair = op.kind() == OperatorKind::NonlocalL ? nonlocal_power_iteration(op, tol, max_iter)
                                                          : laplacian_inverse_iteration(op, tol, max_iter);
    Field work(op.size());
    pair.residual = eigen_residual(op, pair.vector, pair.value, work);
    return pair;
}

}  // namespace nlrd
