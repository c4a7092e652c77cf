#pragma once

#include <span>

#include "nlrd/trajectory.hpp"

namespace nlrd {

/// Least-squares fit of y ~ c (T - t)^exponent near a singular time.
struct RateFit {
    double T_est = 0.0;
    double exponent = 0.0;
    double c = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double rms_residual = 0.0;
    std::size_t samples_used = 0;
};

struct RateFitOptions {
    double decades = 2.0;        // window: final stretch with y >= y_last / 10^decades
    std::size_t min_samples = 30;
    double bracket_factor = 10.0;  // T searched in (t_last, t_last + factor * window length)
};

/// Fits the sup-norm of `component` over the final growth window.
/// Throws FitError when fewer than `min_samples` samples fall in the window or
/// when the tail is not monotone.
RateFit fit_blowup_rate(const Trajectory& traj, Component component, const RateFitOptions& options = {});

/// Same fit on raw series (t strictly increasing, y > 0).
RateFit fit_power_law(std::span<const double> t, std::span<const double> y, const RateFitOptions& options = {});

/// Slope of log y against log(T - t) over samples with t in [t_lo, t_hi].
double log_log_slope(std::span<const double> t, std::span<const double> y, double T, double t_lo, double t_hi);

}  // namespace nlrd
