#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nlrd/errors.hpp"
#include "nlrd/model.hpp"

namespace nlrd {

namespace {

// Node lies in {d(x, boundary) > eps}; the relative slack absorbs rounding of
// node coordinates that sit exactly on the level set.
bool in_inner_set(const DomainSpec& grid, std::size_t idx, double eps) {
    return grid.distance_to_boundary(idx) > eps * (1.0 + 1e-12);
}

// C^2 polynomial bump (1 - s^2)^3 on the inner interval of one axis.
double bump_axis(double x, double a, double b, double eps) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a) - eps;
    const double s = (x - centre) / half;
    if (std::abs(s) >= 1.0) return 0.0;
    const double t = 1.0 - s * s;
    return t * t * t;
}

// sin^2 profile: zero with zero slope at the boundary, convex in a boundary
// layer of width W/4, equal to 1 on the level set d = eps.
double sin2_axis(double x, double a, double b, double eps) {
    const double w = b - a;
    const double num = std::sin(std::numbers::pi * (x - a) / w);
    const double den = std::sin(std::numbers::pi * eps / w);
    return (num * num) / (den * den);
}

double sin_axis(double x, double a, double b) {
    return std::sin(std::numbers::pi * (x - a) / (b - a));
}

}  // namespace

Field make_initial_data(const InitialDataSpec& spec, const DomainSpec& grid) {
    const auto problems = spec.violations(grid);
    if (!problems.empty()) {
        std::string msg = "invalid initial data:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw ValidationError(msg);
    }

    const std::size_t size = grid.size();
    Field out(size, 0.0);

    if (spec.shape == InitialShape::BumpF || spec.shape == InitialShape::BumpG) {
        std::size_t inner = 0;
        for (std::size_t i = 0; i < size; ++i) inner += in_inner_set(grid, i, spec.eps_geom) ? 1 : 0;
        if (inner < 3) {
            throw ResolutionError("grid too coarse: fewer than 3 nodes at distance > eps_geom = " +
                                  std::to_string(spec.eps_geom) + " from the boundary");
        }
    }

    for (std::size_t i = 0; i < size; ++i) {
        const auto x = grid.coord(i);
        double value = 1.0;
        switch (spec.shape) {
            case InitialShape::BumpF:
                if (!in_inner_set(grid, i, spec.eps_geom)) {
                    value = 0.0;
                    break;
                }
                for (int axis = 0; axis < grid.dim; ++axis) {
                    value *= bump_axis(x[static_cast<std::size_t>(axis)], grid.lower(axis), grid.upper(axis),
                                       spec.eps_geom);
                }
                break;
            case InitialShape::BumpG:
                value = spec.m;
                for (int axis = 0; axis < grid.dim; ++axis) {
                    value *= sin2_axis(x[static_cast<std::size_t>(axis)], grid.lower(axis), grid.upper(axis),
                                       spec.eps_geom);
                }
                break;
            case InitialShape::Eigenfunction:
                for (int axis = 0; axis < grid.dim; ++axis) {
                    value *= sin_axis(x[static_cast<std::size_t>(axis)], grid.lower(axis), grid.upper(axis));
                }
                break;
            case InitialShape::Constant:
                break;
            case InitialShape::Custom:
                value = spec.values[i];
                break;
        }
        out[i] = value * spec.amplitude;
    }
    return out;
}

double min_interior(const Field& field, const DomainSpec& grid, double eps_geom) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (in_inner_set(grid, i, 2.0 * eps_geom)) best = std::min(best, field[i]);
    }
    return best;
}

}  // namespace nlrd
