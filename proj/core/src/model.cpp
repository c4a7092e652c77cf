#include "nlrd/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlrd/errors.hpp"

namespace nlrd {

std::array<double, 2> DomainSpec::coord(std::size_t idx) const {
    const auto nn = static_cast<std::size_t>(n);
    if (dim == 1) {
        return {lower(0) + static_cast<double>(idx + 1) * h(0), 0.0};
    }
    const std::size_t i = idx % nn;
    const std::size_t j = idx / nn;
    return {lower(0) + static_cast<double>(i + 1) * h(0),
            lower(1) + static_cast<double>(j + 1) * h(1)};
}

double DomainSpec::distance_to_boundary(std::size_t idx) const {
    const auto x = coord(idx);
    double d = std::min(x[0] - lower(0), upper(0) - x[0]);
    if (dim == 2) {
        d = std::min({d, x[1] - lower(1), upper(1) - x[1]});
    }
    return d;
}

std::vector<std::string> SystemParams::violations(bool scalar_mode) const {
    std::vector<std::string> out;
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(alpha) || alpha < 0) out.emplace_back("alpha must be finite and >= 0");
    if (!finite(beta) || beta < 0) out.emplace_back("beta must be finite and >= 0");
    if (scalar_mode) {
        if (!finite(p) || p < 0) out.emplace_back("p must be finite and >= 0");
        if (!finite(q) || q < 0) out.emplace_back("q must be finite and >= 0");
    } else {
        if (!finite(p) || p <= 0) out.emplace_back("p must be finite and > 0");
        if (!finite(q) || q <= 0) out.emplace_back("q must be finite and > 0");
    }
    if (!finite(eps_reg) || eps_reg < 0) out.emplace_back("eps_reg must be finite and >= 0");
    const double min_exp = std::min({alpha, beta, p, q});
    if (min_exp < 1.0 && eps_reg <= 0.0 && !scalar_mode) {
        out.emplace_back("eps_reg > 0 required when min(alpha, beta, p, q) < 1 (non-Lipschitz reaction)");
    }
    if (kernel.dimension != 1 && kernel.dimension != 2) out.emplace_back("kernel.dimension must be 1 or 2");
    if (!(kernel.radius > 0)) out.emplace_back("kernel.radius must be > 0");
    if (kernel.profile == KernelProfile::Custom) {
        if (kernel.table.size() < 2) {
            out.emplace_back("custom kernel needs a table with at least 2 radial values");
        } else {
            if (!(kernel.table.front() > 0)) out.emplace_back("custom kernel must be positive at 0");
            if (std::any_of(kernel.table.begin(), kernel.table.end(),
                            [](double x) { return !(x >= 0) || !std::isfinite(x); })) {
                out.emplace_back("custom kernel table must be finite and nonnegative");
            }
        }
    }
    if (domain.dim != 1 && domain.dim != 2) out.emplace_back("domain.dim must be 1 or 2");
    if (kernel.dimension != domain.dim) out.emplace_back("kernel.dimension must match domain.dim");
    if (domain.n < 3) out.emplace_back("domain.n must be >= 3");
    for (int axis = 0; axis < std::clamp(domain.dim, 1, 2); ++axis) {
        if (!(domain.upper(axis) > domain.lower(axis))) {
            out.emplace_back("domain.bounds must satisfy lower < upper on every axis");
        }
    }
    return out;
}

std::vector<std::string> InitialDataSpec::violations(const DomainSpec& grid) const {
    std::vector<std::string> out;
    if (!(amplitude >= 0) || !std::isfinite(amplitude)) out.emplace_back("amplitude must be finite and >= 0");
    if (shape == InitialShape::BumpF || shape == InitialShape::BumpG) {
        if (!(eps_geom > 0)) out.emplace_back("eps_geom must be > 0");
        for (int axis = 0; axis < grid.dim; ++axis) {
            if (!(eps_geom < 0.5 * grid.width(axis))) {
                out.emplace_back("eps_geom must be smaller than half the domain width");
                break;
            }
        }
    }
    if (shape == InitialShape::BumpG && !(m > 0)) out.emplace_back("m must be > 0");
    if (shape == InitialShape::Custom) {
        if (values.size() != grid.size()) out.emplace_back("custom data length must match the grid size");
        if (std::any_of(values.begin(), values.end(), [](double x) { return !(x >= 0) || !std::isfinite(x); })) {
            out.emplace_back("custom data must be finite and nonnegative");
        }
    }
    return out;
}

double kappa(const SystemParams& params) {
    return params.p * params.q - (1.0 - params.alpha) * (1.0 - params.beta);
}

PredictedRegion classify_region(const SystemParams& params) {
    if (params.alpha < 1.0 && params.beta < 1.0 && kappa(params) <= 0.0) {
        return PredictedRegion::AllGlobal;
    }
    return PredictedRegion::Mixed;
}

std::string to_string(KernelProfile profile) {
    switch (profile) {
        case KernelProfile::Tent: return "tent";
        case KernelProfile::TruncatedGaussian: return "truncated_gaussian";
        case KernelProfile::Custom: return "custom";
    }
    return "tent";
}

std::string to_string(InitialShape shape) {
    switch (shape) {
        case InitialShape::BumpF: return "bump_f";
        case InitialShape::BumpG: return "bump_g";
        case InitialShape::Eigenfunction: return "eigenfunction";
        case InitialShape::Constant: return "constant";
        case InitialShape::Custom: return "custom";
    }
    return "constant";
}

std::string to_string(PredictedRegion region) {
    return region == PredictedRegion::AllGlobal ? "AllGlobal" : "Mixed";
}

KernelProfile kernel_profile_from_string(const std::string& name) {
    if (name == "tent") return KernelProfile::Tent;
    if (name == "truncated_gaussian" || name == "gaussian") return KernelProfile::TruncatedGaussian;
    if (name == "custom") return KernelProfile::Custom;
    throw ValidationError("unknown kernel profile '" + name + "'");
}

InitialShape initial_shape_from_string(const std::string& name) {
    if (name == "bump_f") return InitialShape::BumpF;
    if (name == "bump_g") return InitialShape::BumpG;
    if (name == "eigenfunction") return InitialShape::Eigenfunction;
    if (name == "constant") return InitialShape::Constant;
    if (name == "custom") return InitialShape::Custom;
    throw ValidationError("unknown initial data shape '" + name + "'");
}

}  // namespace nlrd
