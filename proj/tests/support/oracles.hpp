#pragma once

// Independent reference computations. Nothing here calls into nlrd; every
// quantity is rebuilt from its definition with Eigen dense linear algebra or
// plain scalar loops.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline double tent(double r, double radius) { return std::abs(r) < radius ? (1.0 - std::abs(r) / radius) / radius : 0.0; }

/// K - I with K_ij = h J(x_i - x_j) / (lattice sum of h J), on (a, b) with n interior nodes.
inline Eigen::MatrixXd nonlocal_tent(double a, double b, int n, double radius) {
    const double h = (b - a) / (n + 1);
    double lattice = 0.0;
    for (int k = -4 * n - 4; k <= 4 * n + 4; ++k) lattice += h * tent(k * h, radius);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) A(i, j) = h * tent((i - j) * h, radius) / lattice;
        A(i, i) -= 1.0;
    }
    return A;
}

inline Eigen::MatrixXd laplacian(double a, double b, int n) {
    const double h = (b - a) / (n + 1);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        A(i, i) = -2.0 / (h * h);
        if (i > 0) A(i, i - 1) = 1.0 / (h * h);
        if (i + 1 < n) A(i, i + 1) = 1.0 / (h * h);
    }
    return A;
}

struct Eig {
    double value;
    Eigen::VectorXd vector;  // positive, sup-normalized
};

/// Smallest eigenvalue of -A (A symmetric) with its sup-normalized positive eigenvector.
inline Eig principal(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-A);
    Eigen::VectorXd v = es.eigenvectors().col(0);
    if (v.sum() < 0) v = -v;
    v /= v.cwiseAbs().maxCoeff();
    return {es.eigenvalues()(0), v};
}

inline Eigen::VectorXd solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) { return A.partialPivLu().solve(b); }

/// exp(tA) x for symmetric A.
inline Eigen::VectorXd expm_apply(const Eigen::MatrixXd& A, const Eigen::VectorXd& x, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const Eigen::MatrixXd& V = es.eigenvectors();
    Eigen::VectorXd c = V.transpose() * x;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(t * es.eigenvalues()(k));
    return V * c;
}

/// Classical RK4 for y' = f(y) with a fixed number of steps.
inline std::vector<double> rk4(const std::function<std::vector<double>(const std::vector<double>&)>& f,
                               std::vector<double> y, double t1, int steps) {
    const double h = t1 / steps;
    auto axpy = [](const std::vector<double>& a, double s, const std::vector<double>& b) {
        std::vector<double> out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
        return out;
    };
    for (int k = 0; k < steps; ++k) {
        const auto k1 = f(y);
        const auto k2 = f(axpy(y, h / 2, k1));
        const auto k3 = f(axpy(y, h / 2, k2));
        const auto k4 = f(axpy(y, h, k3));
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    return y;
}

/// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return s * h / 3.0;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& x) {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

}  // namespace oracle
