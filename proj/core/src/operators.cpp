#include "nlrd/operators.hpp"

#include <algorithm>
#include <cmath>

#include "nlrd/errors.hpp"
#include "nlrd/kernel.hpp"
#include "nlrd/linalg.hpp"

namespace nlrd {

namespace {

void check_span_sizes(const DiscreteOperator& op, std::size_t in, std::size_t out) {
    if (in != op.size() || out != op.size()) {
        throw ContractViolation("operator applied to a field of size " + std::to_string(in) + " (expected " +
                                std::to_string(op.size()) + ")");
    }
}

// Lattice quadrature sum of J over R^dim at the grid spacing.
double lattice_sum(const Kernel& kernel, const DomainSpec& grid) {
    const double r = kernel.radius();
    if (grid.dim == 1) {
        const double h = grid.h(0);
        const auto reach = static_cast<long>(std::ceil(r / h));
        double s = 0.0;
        for (long k = -reach; k <= reach; ++k) s += h * kernel(std::abs(static_cast<double>(k) * h));
        return s;
    }
    const double hx = grid.h(0), hy = grid.h(1);
    const auto kx = static_cast<long>(std::ceil(r / hx));
    const auto ky = static_cast<long>(std::ceil(r / hy));
    double s = 0.0;
    for (long j = -ky; j <= ky; ++j) {
        for (long i = -kx; i <= kx; ++i) {
            s += hx * hy * kernel(std::hypot(static_cast<double>(i) * hx, static_cast<double>(j) * hy));
        }
    }
    return s;
}

}  // namespace

DiscreteOperator assemble_nonlocal(const DomainSpec& grid, const KernelSpec& spec) {
    if (spec.dimension != grid.dim) throw ValidationError("kernel dimension does not match the domain");
    const Kernel kernel(spec);
    double hmax = grid.h(0);
    if (grid.dim == 2) hmax = std::max(hmax, grid.h(1));
    if (spec.radius < 2.0 * hmax) {
        throw ResolutionError("kernel radius " + std::to_string(spec.radius) + " below 2h = " +
                              std::to_string(2.0 * hmax));
    }

    DiscreteOperator op;
    op.kind_ = OperatorKind::NonlocalL;
    op.grid_ = grid;
    const std::size_t n = grid.size();
    op.renorm_ = 1.0 / lattice_sum(kernel, grid);
    op.weights_.assign(n * n, 0.0);
    op.band_.resize(n);
    op.row_mass_.assign(n, 0.0);

    const double w = grid.cell_volume();
    const auto nn = static_cast<std::size_t>(grid.n);
    std::size_t reach = static_cast<std::size_t>(std::ceil(spec.radius / grid.h(0)));
    if (grid.dim == 2) {
        const auto ry = static_cast<std::size_t>(std::ceil(spec.radius / grid.h(1)));
        reach = ry * nn + reach;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i > reach ? i - reach : 0;
        const std::size_t hi = std::min(n, i + reach + 1);
        op.band_[i] = {lo, hi};
        const auto xi = grid.coord(i);
        double mass = 0.0;
        for (std::size_t j = lo; j < hi; ++j) {
            const auto xj = grid.coord(j);
            const double dist = grid.dim == 1 ? std::abs(xi[0] - xj[0]) : std::hypot(xi[0] - xj[0], xi[1] - xj[1]);
            const double kij = w * kernel(dist) * op.renorm_;
            op.weights_[i * n + j] = kij;
            mass += kij;
        }
        op.row_mass_[i] = mass;
    }
    return op;
}

DiscreteOperator assemble_laplacian(const DomainSpec& grid) {
    if (grid.n < 3) throw ValidationError("Laplacian needs n >= 3 interior nodes per axis");
    DiscreteOperator op;
    op.kind_ = OperatorKind::LaplacianD;
    op.grid_ = grid;
    return op;
}

void DiscreteOperator::apply(std::span<const double> x, std::span<double> y, double exterior) const {
    check_span_sizes(*this, x.size(), y.size());
    const std::size_t n = size();
    if (kind_ == OperatorKind::NonlocalL) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto [lo, hi] = band_[i];
            const double* row = &weights_[i * n];
            double s = 0.0;
            for (std::size_t j = lo; j < hi; ++j) s += row[j] * x[j];
            if (exterior != 0.0) s += exterior * (1.0 - row_mass_[i]);
            y[i] = scale_ * (s - x[i]);
        }
        return;
    }

    const auto nn = static_cast<std::size_t>(grid_.n);
    const double cx = scale_ / (grid_.h(0) * grid_.h(0));
    if (grid_.dim == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            const double left = i > 0 ? x[i - 1] : exterior;
            const double right = i + 1 < n ? x[i + 1] : exterior;
            y[i] = cx * (left - 2.0 * x[i] + right);
        }
        return;
    }
    const double cy = scale_ / (grid_.h(1) * grid_.h(1));
    for (std::size_t j = 0; j < nn; ++j) {
        for (std::size_t i = 0; i < nn; ++i) {
            const std::size_t k = j * nn + i;
            const double left = i > 0 ? x[k - 1] : exterior;
            const double right = i + 1 < nn ? x[k + 1] : exterior;
            const double down = j > 0 ? x[k - nn] : exterior;
            const double up = j + 1 < nn ? x[k + nn] : exterior;
            y[k] = cx * (left - 2.0 * x[k] + right) + cy * (down - 2.0 * x[k] + up);
        }
    }
}

Field DiscreteOperator::apply(const Field& x, double exterior) const {
    Field y(x.size());
    apply(std::span<const double>(x), std::span<double>(y), exterior);
    return y;
}

double DiscreteOperator::diagonal(std::size_t i) const {
    if (kind_ == OperatorKind::NonlocalL) return scale_ * (weights_[i * size() + i] - 1.0);
    double d = -2.0 / (grid_.h(0) * grid_.h(0));
    if (grid_.dim == 2) d -= 2.0 / (grid_.h(1) * grid_.h(1));
    return scale_ * d;
}

double DiscreteOperator::max_monotone_dt() const {
    if (kind_ == OperatorKind::NonlocalL) return 1.0 / scale_;
    return -1.0 / diagonal(0);
}

DiscreteOperator DiscreteOperator::scaled(double c) const {
    if (!(c > 0)) throw ContractViolation("operator scale factor must be positive");
    DiscreteOperator out = *this;
    out.scale_ *= c;
    return out;
}

std::vector<double> DiscreteOperator::to_dense() const {
    const std::size_t n = size();
    std::vector<double> dense(n * n, 0.0);
    Field e(n, 0.0), col(n);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        apply(std::span<const double>(e), std::span<double>(col));
        for (std::size_t i = 0; i < n; ++i) dense[i * n + j] = col[i];
        e[j] = 0.0;
    }
    return dense;
}

double mass_deficit_constant(const DiscreteOperator& nonlocal) {
    if (nonlocal.kind() != OperatorKind::NonlocalL) {
        throw ContractViolation("mass deficit constant is defined for the nonlocal operator only");
    }
    const auto mass = nonlocal.kernel_row_mass();
    return std::max(0.0, 1.0 - *std::max_element(mass.begin(), mass.end()));
}

Field solve_torsion(const DiscreteOperator& op) {
    const std::size_t n = op.size();
    const Field ones(n, 1.0);
    Field x;
    if (op.kind() == OperatorKind::LaplacianD && op.grid().dim == 1) {
        const double h2 = op.grid().h(0) * op.grid().h(0);
        x = linalg::solve_tridiagonal(2.0 * op.scale() / h2, -op.scale() / h2, ones);
    } else if (op.kind() == OperatorKind::LaplacianD) {
        auto neg = [&op](std::span<const double> in, std::span<double> out) {
            op.apply(in, out);
            for (double& v : out) v = -v;
        };
        x = linalg::conjugate_gradient(neg, ones, 1e-14).x;
    } else {
        auto dense = op.to_dense();
        for (double& v : dense) v = -v;
        x = linalg::DenseLU(std::move(dense), n).solve(ones);
    }

    Field check = op.apply(x);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(-check[i] - 1.0));
    const double tol = 1e-8 * std::max(1.0, linalg::sup_norm(x) * std::abs(op.diagonal(0)));
    if (!(residual <= tol)) {
        throw SolverError("torsion solve residual " + std::to_string(residual) + " exceeds tolerance");
    }
    if (std::any_of(x.begin(), x.end(), [](double v) { return !(v > 0); })) {
        throw SolverError("torsion solution is not positive");
    }
    return x;
}

}  // namespace nlrd
