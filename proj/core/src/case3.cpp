#include <algorithm>
#include <cmath>
#include <numbers>

#include "nlrd/errors.hpp"
#include "nlrd/kernel.hpp"
#include "nlrd/verifiers.hpp"

namespace nlrd {

std::vector<std::string> Case3Spec::violations() const {
    std::vector<std::string> out;
    if (!(T > 0)) out.emplace_back("T must be > 0");
    if (!(R > 0) || !(L > R)) out.emplace_back("radii must satisfy 0 < R < L");
    if (!(delta > 0) || !(delta < R)) out.emplace_back("delta must lie in (0, R)");
    if (!(k > 0) || !(k * delta < 1.0)) out.emplace_back("k * delta must lie in (0, 1)");
    const double k_min = std::max({0.25, 0.0 / (R - delta), 1.0 / (L - R + delta)});
    if (!(k >= k_min)) out.push_back("k must be >= max{1/4, (d-1)/(R-delta), 1/(L-R+delta)} = " + std::to_string(k_min));
    if (!(eps_claim >= 0 && eps_claim < 1)) out.emplace_back("eps_claim must lie in [0, 1)");
    if (nodes_per_R < 4) out.emplace_back("nodes_per_R must be >= 4");
    if (!(s_span > 1)) out.emplace_back("s_span must be > 1");
    return out;
}

double case3_identity_error(double T, double q, double beta, int points) {
    if (!(T > 0) || !(q > 0) || points < 1) throw ContractViolation("identity check needs T > 0, q > 0, points >= 1");
    auto log_psi = [T](double t) { return 1.0 / (T - t); };
    double worst = 0.0;
    for (int j = 1; j <= points; ++j) {
        const double t = T * j / (points + 1.0);
        const double tau = T - t;
        const double h = 1e-3 * tau;
        const double dlog = (-log_psi(t + 2 * h) + 8 * log_psi(t + h) - 8 * log_psi(t - h) + log_psi(t - 2 * h)) /
                            (12.0 * h);
        const double log_lhs = std::log(dlog) + log_psi(t);
        const double log_phi = -(2.0 / q) * std::log(tau) + ((1.0 - beta) / q) / tau;
        const double log_rhs = q * log_phi + beta * log_psi(t);
        worst = std::max(worst, std::abs(std::expm1(log_lhs - log_rhs)));
    }
    return worst;
}

Case3Report case3_subsolution_check(const Case3Spec& spec, const SystemParams& params) {
    if (!(std::max(params.alpha, params.beta) < 1.0) || !(kappa(params) > 0)) {
        throw WrongRegimeError("Case 3 needs max(alpha, beta) < 1 and kappa > 0");
    }
    if (params.kernel.dimension != 1) throw WrongRegimeError("Case 3 is verified in dimension 1 only");
    if (auto errs = spec.violations(); !errs.empty()) {
        std::string msg;
        for (const auto& e : errs) msg += (msg.empty() ? "" : "; ") + e;
        throw ValidationError(msg);
    }
    const double al = params.alpha, be = params.beta, p = params.p, q = params.q;
    Case3Report r;
    r.epsilon = spec.epsilon();
    const double eps = r.epsilon;

    // (i)
    r.identity_max_rel_error = case3_identity_error(spec.T, q, be);
    r.identity_ok = r.identity_max_rel_error <= 1e-8;

    // grid on B_L centred at 0 with nodes on +-R
    const double h = spec.R / spec.nodes_per_R;
    const int mL = static_cast<int>(std::lround(spec.L / h));
    const double Lg = mL * h;
    const int n = 2 * mL - 1;
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<char> inside(x.size());
    for (int j = 0; j < n; ++j) {
        x[static_cast<std::size_t>(j)] = (j - (mL - 1)) * h;
        inside[static_cast<std::size_t>(j)] = std::abs(x[static_cast<std::size_t>(j)]) <= spec.R * (1 + 1e-12);
    }

    // (ii) W = w / e^{1/(T-t)} in s = 1/(T-t): W_s = s^{-2} W_xx + chi_R W^beta - W
    const double lambda_R = std::pow(std::numbers::pi / (2.0 * spec.R), 2);
    r.claim_A = std::pow(1.0 + lambda_R * spec.T * spec.T, -1.0 / (1.0 - be));
    std::vector<double> W(x.size()), Wn(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) W[j] = r.claim_A * std::cos(std::numbers::pi * x[j] / (2.0 * Lg));
    const double decay = eps * (2.0 - eps);
    auto check_claim = [&](double s) {
        const double bound = eps * std::exp(-decay * s);
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (inside[j]) r.claim_min_margin = std::min(r.claim_min_margin, W[j] - bound);
        }
    };
    double s = 1.0 / spec.T;
    const double s_end = spec.s_span / spec.T;
    check_claim(s);
    const double inv_h2 = 1.0 / (h * h);
    while (s < s_end) {
        const double diff = inv_h2 / (s * s);
        const double ds = std::min({0.02, 0.9 / (2.0 * diff + 1.0), s_end - s});
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double left = j > 0 ? W[j - 1] : 0.0;
            const double right = j + 1 < x.size() ? W[j + 1] : 0.0;
            const double react = (inside[j] ? std::pow(W[j], be) : 0.0) - W[j];
            Wn[j] = std::max(0.0, W[j] + ds * (diff * (left - 2.0 * W[j] + right) + react));
        }
        std::swap(W, Wn);
        s += ds;
        if (!std::all_of(W.begin(), W.end(), [](double w) { return std::isfinite(w); })) {
            r.claim_undetermined = true;
            break;
        }
        check_claim(s);
    }
    r.claim_ok = !r.claim_undetermined && r.claim_min_margin >= 0;

    // (iii) kernel mass of B_R seen from B_R, lattice-renormalized on the same grid
    const Kernel kernel(params.kernel);
    const auto reach = static_cast<long>(std::ceil(kernel.radius() / h));
    double lattice = 0.0;
    for (long k = -reach; k <= reach; ++k) lattice += h * kernel(std::abs(static_cast<double>(k) * h));
    r.kernel_mass_min = INFINITY;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!inside[i]) continue;
        double m = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (inside[j]) m += h * kernel(std::abs(x[i] - x[j]));
        }
        r.kernel_mass_min = std::min(r.kernel_mass_min, m / lattice);
    }
    const double rate = (1.0 - eps) * (1.0 - eps) * p - (1.0 - al) * (1.0 - be) / q;
    constexpr int kTau = 2000;
    for (int j = 0; j <= kTau; ++j) {
        const double tau = spec.T * std::pow(10.0, -6.0 * (1.0 - static_cast<double>(j) / kTau));
        const double lhs = (2.0 / q) / tau + ((1.0 - be) / q) / (tau * tau);
        const double log_term = p * std::log(eps) + (2.0 * (1.0 - al) / q) * std::log(tau) + rate / tau;
        if (log_term > 700.0) continue;
        const double rhs = r.kernel_mass_min - 1.0 + std::exp(log_term);
        r.inequality_min_margin = std::min(r.inequality_min_margin, (rhs - lhs) / std::max(1.0, lhs));
    }
    r.inequality_ok = r.inequality_min_margin >= 0;

    r.satisfied = r.identity_ok && r.claim_ok && r.inequality_ok;
    return r;
}

}  // namespace nlrd
