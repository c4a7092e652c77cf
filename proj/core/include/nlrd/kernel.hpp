#pragma once

#include "nlrd/model.hpp"

namespace nlrd {

/// Radial kernel J with unit continuum mass.
class Kernel {
public:
    explicit Kernel(KernelSpec spec);

    /// J evaluated at distance `r` from the origin; zero for r >= radius.
    double operator()(double r) const { return profile(r) / mass_; }

    double radius() const noexcept { return spec_.radius; }
    const KernelSpec& spec() const noexcept { return spec_; }
    /// Integral of the unnormalized profile over R^dim.
    double unnormalized_mass() const noexcept { return mass_; }

private:
    double profile(double r) const;

    KernelSpec spec_;
    double mass_ = 1.0;
};

}  // namespace nlrd
