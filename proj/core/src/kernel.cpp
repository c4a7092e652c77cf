#include "nlrd/kernel.hpp"

#include <cmath>
#include <numbers>

#include "nlrd/errors.hpp"

namespace nlrd {

namespace {

constexpr double kPi = std::numbers::pi;

// Truncated Gaussian uses sigma = radius / 2 and subtracts the value at the
// support edge so the profile is continuous.
double gaussian_sigma(double radius) { return 0.5 * radius; }

double custom_mass(const KernelSpec& spec) {
    const auto& t = spec.table;
    const std::size_t m = t.size() - 1;
    const double ds = spec.radius / static_cast<double>(m);
    double total = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        if (spec.dimension == 1) {
            total += 0.5 * ds * (t[k] + t[k + 1]);
        } else {
            const double s0 = ds * static_cast<double>(k);
            const double s1 = s0 + ds;
            // exact integral of the linear interpolant times s
            total += ds * (t[k] * (2.0 * s0 + s1) + t[k + 1] * (s0 + 2.0 * s1)) / 6.0;
        }
    }
    return spec.dimension == 1 ? 2.0 * total : 2.0 * kPi * total;
}

}  // namespace

Kernel::Kernel(KernelSpec spec) : spec_(std::move(spec)) {
    if (!(spec_.radius > 0)) throw ValidationError("kernel radius must be positive");
    if (spec_.dimension != 1 && spec_.dimension != 2) throw ValidationError("kernel dimension must be 1 or 2");
    const double r = spec_.radius;
    switch (spec_.profile) {
        case KernelProfile::Tent:
            mass_ = spec_.dimension == 1 ? r : kPi * r * r / 3.0;
            break;
        case KernelProfile::TruncatedGaussian: {
            const double sigma = gaussian_sigma(r);
            const double tail = std::exp(-r * r / (2.0 * sigma * sigma));
            if (spec_.dimension == 1) {
                mass_ = sigma * std::sqrt(2.0 * kPi) * std::erf(r / (sigma * std::sqrt(2.0))) - 2.0 * r * tail;
            } else {
                mass_ = 2.0 * kPi * sigma * sigma * (1.0 - tail) - kPi * r * r * tail;
            }
            break;
        }
        case KernelProfile::Custom:
            if (spec_.table.size() < 2 || !(spec_.table.front() > 0)) {
                throw ValidationError("custom kernel table needs >= 2 values and a positive value at 0");
            }
            mass_ = custom_mass(spec_);
            break;
    }
}

double Kernel::profile(double r) const {
    r = std::abs(r);
    const double radius = spec_.radius;
    if (r >= radius) return 0.0;
    switch (spec_.profile) {
        case KernelProfile::Tent:
            return 1.0 - r / radius;
        case KernelProfile::TruncatedGaussian: {
            const double sigma = gaussian_sigma(radius);
            return std::exp(-r * r / (2.0 * sigma * sigma)) - std::exp(-radius * radius / (2.0 * sigma * sigma));
        }
        case KernelProfile::Custom: {
            const auto& t = spec_.table;
            const double pos = r / radius * static_cast<double>(t.size() - 1);
            const auto k = static_cast<std::size_t>(pos);
            if (k + 1 >= t.size()) return t.back();
            const double frac = pos - static_cast<double>(k);
            return t[k] + frac * (t[k + 1] - t[k]);
        }
    }
    return 0.0;
}

}  // namespace nlrd
