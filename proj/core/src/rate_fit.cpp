#include "nlrd/rate_fit.hpp"

#include <cmath>
#include <vector>

#include "nlrd/errors.hpp"

namespace nlrd {

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
};

LineFit regress(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    LineFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double r = y[k] - (f.intercept + f.slope * x[k]);
        ss += r * r;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

}  // namespace

RateFit fit_power_law(std::span<const double> t, std::span<const double> y, const RateFitOptions& options) {
    if (t.size() != y.size()) throw ContractViolation("fit_power_law: t and y differ in length");
    const std::size_t n = t.size();
    if (n < options.min_samples) {
        throw FitError("insufficient samples: " + std::to_string(n) + " < " + std::to_string(options.min_samples));
    }
    const double y_last = y[n - 1];
    if (!(y_last > 0) || !std::isfinite(y_last)) throw FitError("series must end with a positive finite value");
    const double floor = y_last / std::pow(10.0, options.decades);
    std::size_t start = n - 1;
    while (start > 0 && y[start - 1] >= floor) --start;
    const std::size_t count = n - start;
    if (count < options.min_samples) {
        throw FitError("insufficient samples in the final " + std::to_string(options.decades) +
                       " decades: " + std::to_string(count) + " < " + std::to_string(options.min_samples));
    }
    for (std::size_t k = start + 1; k < n; ++k) {
        if (y[k] < y[k - 1] * (1.0 - 1e-12)) {
            throw FitError("non-monotone tail at t = " + std::to_string(t[k]) + " (" + std::to_string(y[k - 1]) +
                           " -> " + std::to_string(y[k]) + ")");
        }
        if (!(t[k] > t[k - 1])) throw FitError("sample times must be strictly increasing");
    }

    const double t_last = t[n - 1];
    const double width = t_last - t[start];
    if (!(width > 0)) throw FitError("degenerate fit window");

    std::vector<double> logy(count), gaps(count), logx(count);
    for (std::size_t k = 0; k < count; ++k) {
        logy[k] = std::log(y[start + k]);
        gaps[k] = t_last - t[start + k];
    }
    auto objective = [&](double z, LineFit* out) {
        const double d = std::exp(z);
        for (std::size_t k = 0; k < count; ++k) logx[k] = std::log(gaps[k] + d);
        const LineFit f = regress(logx, logy);
        if (out) *out = f;
        return f.rms;
    };

    const double z_lo = std::log(width * 1e-9);
    const double z_hi = std::log(width * options.bracket_factor);
    constexpr int kScan = 240;
    int best = 0;
    double best_val = INFINITY;
    for (int i = 0; i <= kScan; ++i) {
        const double z = z_lo + (z_hi - z_lo) * i / kScan;
        const double v = objective(z, nullptr);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const double step = (z_hi - z_lo) / kScan;
    double a = z_lo + step * std::max(best - 1, 0);
    double b = z_lo + step * std::min(best + 1, kScan);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = objective(c, nullptr), fd = objective(d, nullptr);
    while (b - a > 1e-12) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = objective(c, nullptr);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = objective(d, nullptr);
        }
    }
    const double z = 0.5 * (a + b);
    LineFit line;
    objective(z, &line);

    RateFit fit;
    fit.T_est = t_last + std::exp(z);
    fit.exponent = line.slope;
    fit.c = std::exp(line.intercept);
    fit.t_lo = t[start];
    fit.t_hi = t_last;
    fit.rms_residual = line.rms;
    fit.samples_used = count;
    return fit;
}

RateFit fit_blowup_rate(const Trajectory& traj, Component component, const RateFitOptions& options) {
    std::vector<double> t, y;
    t.reserve(traj.samples.size());
    y.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        t.push_back(s.t);
        y.push_back(component == Component::U ? s.max_u : s.max_v);
    }
    return fit_power_law(t, y, options);
}

double log_log_slope(std::span<const double> t, std::span<const double> y, double T, double t_lo, double t_hi) {
    std::vector<double> x, ly;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < t_lo || t[k] > t_hi || !(T > t[k]) || !(y[k] > 0)) continue;
        x.push_back(std::log(T - t[k]));
        ly.push_back(std::log(y[k]));
    }
    if (x.size() < 2) return 0.0;
    return regress(x, ly).slope;
}

}  // namespace nlrd
