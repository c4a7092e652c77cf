#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace nlrd {

/// Nodal values on the interior nodes of a grid (row-major in 2D, x fastest).
using Field = std::vector<double>;

enum class KernelProfile { Tent, TruncatedGaussian, Custom };

/// Radial, compactly supported convolution kernel J.
///
/// Built-in profiles carry their analytic unit-mass normalization. A custom
/// profile is a table of radial values on a uniform grid over [0, radius],
/// linearly interpolated; its normalization is computed by exact integration
/// of the interpolant.
struct KernelSpec {
    KernelProfile profile = KernelProfile::Tent;
    double radius = 0.3;
    int dimension = 1;
    std::vector<double> table;
};

/// Interval (dim 1) or axis-aligned box (dim 2) with `n` interior nodes per axis.
struct DomainSpec {
    int dim = 1;
    std::array<double, 4> bounds{0.0, 1.0, 0.0, 1.0};
    int n = 50;

    double lower(int axis) const { return bounds[static_cast<std::size_t>(2 * axis)]; }
    double upper(int axis) const { return bounds[static_cast<std::size_t>(2 * axis + 1)]; }
    double width(int axis) const { return upper(axis) - lower(axis); }
    double h(int axis = 0) const { return width(axis) / (n + 1); }
    /// Quadrature weight of one node: h in 1D, hx*hy in 2D.
    double cell_volume() const { return dim == 1 ? h(0) : h(0) * h(1); }
    std::size_t size() const {
        return dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
    }
    /// Coordinates of interior node `idx` (second entry is 0 in 1D).
    std::array<double, 2> coord(std::size_t idx) const;
    /// Distance from node `idx` to the boundary of the domain.
    double distance_to_boundary(std::size_t idx) const;
};

/// Full problem definition: exponents, regularization level, kernel, domain.
struct SystemParams {
    double alpha = 1.0;
    double beta = 1.0;
    double p = 1.0;
    double q = 1.0;
    double eps_reg = 0.0;
    KernelSpec kernel{};
    DomainSpec domain{};

    /// Every violated invariant, empty when valid. `scalar_mode` relaxes the
    /// strict positivity of p and q (diffusionless ODE checks decouple the
    /// equations with p = 0 or q = 0).
    std::vector<std::string> violations(bool scalar_mode = false) const;
};

enum class InitialShape { BumpF, BumpG, Eigenfunction, Constant, Custom };

/// Initial datum: shape times amplitude.
///
/// BumpF is a C^2 polynomial bump supported on the inner set
/// {d(x, boundary) > eps_geom}; BumpG is positive inside, vanishes on the
/// boundary, is convex in a boundary layer and satisfies g >= m on the inner set.
struct InitialDataSpec {
    InitialShape shape = InitialShape::Constant;
    double amplitude = 1.0;
    double eps_geom = 0.1;
    double m = 0.5;
    Field values;  // Custom only

    std::vector<std::string> violations(const DomainSpec& grid) const;
};

/// Time plus the two nodal fields.
struct CoupledState {
    double t = 0.0;
    Field u;
    Field v;
};

enum class PredictedRegion { AllGlobal, Mixed };

/// pq - (1 - alpha)(1 - beta).
double kappa(const SystemParams& params);

/// AllGlobal when alpha < 1, beta < 1 and kappa <= 0; Mixed otherwise.
PredictedRegion classify_region(const SystemParams& params);

std::string to_string(KernelProfile profile);
std::string to_string(InitialShape shape);
std::string to_string(PredictedRegion region);
KernelProfile kernel_profile_from_string(const std::string& name);
InitialShape initial_shape_from_string(const std::string& name);

/// Samples the initial datum on the interior nodes.
/// Throws ResolutionError when fewer than 3 nodes fall inside the inner set
/// of a bump, ValidationError on an invalid spec.
Field make_initial_data(const InitialDataSpec& spec, const DomainSpec& grid);

/// Minimum of the datum over nodes at distance > 2 eps_geom from the boundary.
/// Exposed as a diagnostic for the interior floor used by the non-simultaneous
/// blow-up construction.
double min_interior(const Field& field, const DomainSpec& grid, double eps_geom);

}  // namespace nlrd
