#include "nlrd/verifiers.hpp"

#include <algorithm>
#include <cmath>

#include "nlrd/errors.hpp"
#include "nlrd/linalg.hpp"

namespace nlrd {

namespace {

void require_positive_exponents(const SystemParams& params) {
    if (!(params.p > 0) || !(params.q > 0)) throw ContractViolation("supersolution checks need p > 0 and q > 0");
}

}  // namespace

std::string to_string(CertificateKind kind) {
    return kind == CertificateKind::SteadyAB ? "SteadyAB" : "ExponentialKappaZero";
}

SupersolutionCertificate verify_steady_supersolution(const SystemParams& params, double A, double B, double w_norm,
                                                     double z_norm) {
    if (!(A > 0) || !(B > 0)) throw ContractViolation("A and B must be positive");
    if (!(w_norm > 0) || !(z_norm > 0)) throw ContractViolation("torsion norms must be positive");
    require_positive_exponents(params);
    const double a = params.alpha, b = params.beta, p = params.p, q = params.q;
    SupersolutionCertificate c;
    c.kind = CertificateKind::SteadyAB;
    c.A = A;
    c.B = B;
    c.w_norm = w_norm;
    c.z_norm = z_norm;
    c.slack_u = 1.0 - std::pow(A, a - 1.0) * std::pow(B, p) * std::pow(w_norm, a) * std::pow(z_norm, p);
    c.slack_v = 1.0 - std::pow(A, q) * std::pow(B, b - 1.0) * std::pow(w_norm, q) * std::pow(z_norm, b);
    c.slack = std::min(c.slack_u, c.slack_v);
    c.satisfied = c.slack >= 0;
    return c;
}

LogInterval steady_feasible_log_B(const SystemParams& params, double A, double w_norm, double z_norm) {
    require_positive_exponents(params);
    const double a = std::log(A), lw = std::log(w_norm), lz = std::log(z_norm);
    const double al = params.alpha, be = params.beta, p = params.p, q = params.q;
    LogInterval iv;
    iv.hi = ((1.0 - al) * a - al * lw - p * lz) / p;
    const double c2 = q * a + q * lw + be * lz;
    if (be < 1.0) {
        iv.lo = c2 / (1.0 - be);
    } else if (be > 1.0) {
        iv.hi = std::min(iv.hi, -c2 / (be - 1.0));
    } else if (c2 > 0) {
        iv.lo = INFINITY;
    }
    return iv;
}

std::optional<SteadyFrontier> steady_frontier(const SystemParams& params, double w_norm, double z_norm) {
    require_positive_exponents(params);
    const double k = kappa(params);
    if (!(params.beta < 1.0) || k == 0.0) return std::nullopt;
    const double lw = std::log(w_norm), lz = std::log(z_norm);
    const double p = params.p, q = params.q;
    const double e = (-(p * q + params.alpha * (1.0 - params.beta)) / p * lw - lz) * p / k;
    return SteadyFrontier{std::exp(e), k > 0};
}

std::optional<SupersolutionCertificate> find_steady_certificate(const SystemParams& params, double w_norm,
                                                                double z_norm, double A_min, double B_min) {
    if (!(A_min > 0) || !(B_min > 0)) throw ContractViolation("search bounds must be positive");
    constexpr int kGrid = 1200;
    const double a0 = std::log(A_min);
    const double span = std::log(1e12);
    const double b_floor = std::log(B_min);
    for (int i = 0; i <= kGrid; ++i) {
        const double a = a0 + span * i / kGrid;
        auto iv = steady_feasible_log_B(params, std::exp(a), w_norm, z_norm);
        iv.lo = std::max(iv.lo, b_floor);
        if (iv.empty()) continue;
        double b;
        if (std::isfinite(iv.hi)) {
            b = 0.5 * (iv.lo + iv.hi);
        } else {
            b = iv.lo + std::log(10.0);
        }
        auto cert = verify_steady_supersolution(params, std::exp(a), std::exp(b), w_norm, z_norm);
        if (cert.satisfied) return cert;
    }
    return std::nullopt;
}

SupersolutionCertificate verify_exponential_supersolution(const SystemParams& params, double A, double B, double C) {
    const double k = kappa(params);
    if (std::abs(k) > 1e-12) throw WrongRegimeError("exponential supersolution needs kappa = 0 (got " +
                                                    std::to_string(k) + ")");
    if (!(std::max(params.alpha, params.beta) < 1.0)) {
        throw WrongRegimeError("exponential supersolution needs max(alpha, beta) < 1");
    }
    if (!(A > 0) || !(B > 0) || !(C > 0)) throw ContractViolation("A, B and C must be positive");
    require_positive_exponents(params);
    const double al = params.alpha, be = params.beta, p = params.p, q = params.q;
    SupersolutionCertificate c;
    c.kind = CertificateKind::ExponentialKappaZero;
    c.A = A;
    c.B = B;
    c.C = C;
    c.D = B * (1.0 - al) / p;
    c.slack_u = 1.0 - std::pow(A, al - 1.0) * std::pow(C, p) / B;
    c.slack_v = 1.0 - std::pow(A, q) * std::pow(C, be - 1.0) / c.D;
    c.slack = std::min(c.slack_u, c.slack_v);
    c.satisfied = c.slack >= 0;
    return c;
}

double exponential_rate_frontier(const SystemParams& params, double A, double C) {
    const double al = params.alpha, be = params.beta, p = params.p, q = params.q;
    return std::max(std::pow(A, al - 1.0) * std::pow(C, p), p / (1.0 - al) * std::pow(A, q) * std::pow(C, be - 1.0));
}

double discrete_decay(const Trajectory& traj, std::size_t step, double rate) {
    if (step > traj.step_sizes.size()) throw ContractViolation("step index beyond the recorded step sizes");
    double d = 1.0;
    for (std::size_t j = 0; j < step; ++j) d *= 1.0 - traj.step_sizes[j] * rate;
    return d;
}

LowerBoundReport lower_bound_check(const Trajectory& traj, const EigenPair& eig_L, const EigenPair& eig_D,
                                   double tol) {
    if (traj.snapshots.empty() || traj.snapshots.front().step != 0) {
        throw ContractViolation("lower_bound_check needs the initial snapshot");
    }
    const auto& s0 = traj.snapshots.front().state;
    const auto& phi = eig_L.vector;
    const auto& psi = eig_D.vector;
    if (phi.size() != s0.u.size() || psi.size() != s0.v.size()) {
        throw ContractViolation("eigenvectors and trajectory live on different grids");
    }
    LowerBoundReport r;
    r.lambda1 = eig_L.value;
    r.mu1 = eig_D.value;
    r.min_phi = eig_L.min_vector;
    r.k_u = INFINITY;
    r.k_v = INFINITY;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        r.k_u = std::min(r.k_u, s0.u[i] / phi[i]);
        r.k_v = std::min(r.k_v, s0.v[i] / psi[i]);
    }
    r.k = std::min(r.k_u, r.k_v);
    r.vacuous = !(r.k > 0);

    // running products over steps, snapshots are in step order
    double dl = 1.0, dd = 1.0;
    std::size_t done = 0;
    for (const auto& snap : traj.snapshots) {
        for (; done < snap.step; ++done) {
            dl *= 1.0 - traj.step_sizes[done] * r.lambda1;
            dd *= 1.0 - traj.step_sizes[done] * r.mu1;
        }
        const auto& st = snap.state;
        const double scale_u = std::max(1.0, r.k * dl);
        const double scale_v = std::max(1.0, r.k * dd);
        const double cont = r.k * std::exp(-r.lambda1 * st.t) * r.min_phi;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            r.min_margin_u = std::min(r.min_margin_u, (st.u[i] - r.k * dl * phi[i]) / scale_u);
            r.min_margin_v = std::min(r.min_margin_v, (st.v[i] - r.k * dd * psi[i]) / scale_v);
            r.continuous_margin = std::min(r.continuous_margin, (st.u[i] - cont) / std::max(1.0, cont));
        }
        ++r.snapshots_checked;
    }
    r.satisfied = r.min_margin_u >= -tol && r.min_margin_v >= -tol;
    return r;
}

KaplanReport kaplan_check(const Trajectory& traj, double mu1, double lambda1, const SystemParams& params,
                          double C0, double tol) {
    if (!(params.beta > 1.0)) throw WrongRegimeError("Kaplan's inequality needs beta > 1");
    KaplanReport r;
    r.C0 = C0;
    const auto& s = traj.samples;
    double decay = 1.0;
    std::size_t done = 0;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        for (; done < s[k].step; ++done) decay *= 1.0 - traj.step_sizes[done] * lambda1;
        if (s[k + 1].step != s[k].step + 1) continue;
        const double dt = s[k + 1].t - s[k].t;
        if (!(dt > 0)) continue;
        const double I = s[k].kaplan_v;
        const double lhs = (s[k + 1].kaplan_v - I) / dt;
        const double growth = C0 * std::pow(std::max(decay, 0.0), params.q) * std::pow(I, params.beta);
        const double rhs = -mu1 * I + growth;
        const double scale = std::abs(mu1 * I) + growth + std::abs(lhs);
        const double margin = scale > 0 ? (lhs - rhs) / scale : 0.0;
        r.margins.push_back(margin);
        r.times.push_back(s[k].t);
        r.min_margin = std::min(r.min_margin, margin);
        ++r.pairs_checked;
    }
    r.satisfied = r.pairs_checked > 0 && r.min_margin >= -tol;
    return r;
}

Case1Report case1_threshold_check(const SystemParams& params, const EigenPair& eig_D, const Field& u0,
                                  const Field& v0) {
    if (!(params.alpha > 1.0)) throw WrongRegimeError("Case 1 threshold needs alpha > 1");
    const auto& psi = eig_D.vector;
    if (psi.size() != u0.size() || psi.size() != v0.size()) throw ContractViolation("field sizes differ");
    const double al = params.alpha, p = params.p, mu1 = eig_D.value;
    const double denom = al + mu1 * p - 1.0;
    if (!(denom > 0)) throw ContractViolation("alpha + mu1 p - 1 must be positive");
    if (!(1.0 - mu1 * p - al < 0)) throw ContractViolation("1 - mu1 p - alpha must be negative");

    Case1Report r;
    r.k_v = INFINITY;
    for (std::size_t i = 0; i < psi.size(); ++i) r.k_v = std::min(r.k_v, v0[i] / psi[i]);
    r.C = std::pow(std::max(r.k_v, 0.0), p);
    if (!(r.C > 0)) return r;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double base = r.C * (al - 1.0) / denom * std::pow(psi[i], p);
        const double thr = std::pow(base, -1.0 / (al - 1.0));
        const double ratio = u0[i] / thr;
        if (ratio > r.ratio) {
            r.ratio = ratio;
            r.node = i;
            r.threshold = thr;
        }
    }
    r.predicted = r.ratio > 1.0;
    return r;
}

MonotoneResiduals verify_monotone_data(const Field& u0, const Field& v0, const SystemParams& params,
                                       const DiscreteOperator& Lh, const DiscreteOperator& Dh, double delta1,
                                       double delta2, const MonotoneOptions& options) {
    if (!(delta1 >= 0) || !(delta2 >= 0)) throw ContractViolation("delta1 and delta2 must be >= 0");
    const std::size_t n = u0.size();
    if (v0.size() != n || Lh.size() != n || Dh.size() != n) throw ContractViolation("field sizes differ");
    MonotoneResiduals r;
    r.r_u = Lh.apply(u0, options.exterior);
    r.r_v = Dh.apply(v0, options.exterior);
    const double e = params.eps_reg;
    r.min_u = INFINITY;
    r.min_v = INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
        const double fua = regularized_power(u0[i], params.alpha, e);
        const double fvb = regularized_power(v0[i], params.beta, e);
        r.r_u[i] += options.reaction_scale * fua * regularized_power(v0[i], params.p, e) - delta1 * fua;
        r.r_v[i] += options.reaction_scale * regularized_power(u0[i], params.q, e) * fvb - delta2 * fvb;
        r.min_u = std::min(r.min_u, r.r_u[i]);
        r.min_v = std::min(r.min_v, r.r_v[i]);
    }
    return r;
}

MonotoneTracker::MonotoneTracker(SystemParams params, double delta1, double delta2)
    : params_(std::move(params)), delta1_(delta1), delta2_(delta2) {}

StepObserver MonotoneTracker::observer() {
    return [this](std::size_t, const CoupledState& before, const CoupledState& after, double dt) {
        const double e = params_.eps_reg;
        const std::size_t n = before.u.size();
        double su = 1.0, sv = 1.0;
        double worst_u = INFINITY, worst_v = INFINITY;
        for (std::size_t i = 0; i < n; ++i) {
            const double ut = (after.u[i] - before.u[i]) / dt;
            const double vt = (after.v[i] - before.v[i]) / dt;
            const double fu = delta1_ * regularized_power(before.u[i], params_.alpha, e);
            const double fv = delta2_ * regularized_power(before.v[i], params_.beta, e);
            su = std::max({su, std::abs(ut), fu});
            sv = std::max({sv, std::abs(vt), fv});
            worst_u = std::min(worst_u, ut - fu);
            worst_v = std::min(worst_v, vt - fv);
        }
        min_u_ = std::min(min_u_, worst_u / su);
        min_v_ = std::min(min_v_, worst_v / sv);
        ++steps_;
    };
}

double flat_supersolution(const SystemParams& params, double delta1, double z0, double T, double t) {
    const double al = params.alpha, be = params.beta, q = params.q;
    if (!(al > 1.0)) throw WrongRegimeError("flat supersolution needs alpha > 1");
    if (!(delta1 > 0)) throw ContractViolation("flat supersolution needs delta1 > 0");
    if (!(t < T)) return INFINITY;
    const double C = std::pow(delta1 * (al - 1.0), -q / (al - 1.0));
    const double g = al - 1.0 - q;
    double G;
    if (std::abs(g) < 1e-12) {
        G = C * std::log(T / (T - t));
    } else {
        const double gamma = g / (al - 1.0);
        G = C * (al - 1.0) / g * (std::pow(T, gamma) - std::pow(T - t, gamma));
    }
    if (be == 1.0) return z0 * std::exp(G);
    const double base = std::pow(z0, 1.0 - be) + (1.0 - be) * G;
    if (!(base > 0)) return INFINITY;
    return std::pow(base, 1.0 / (1.0 - be));
}

NonsimReport check_nonsimultaneity_conditions(const RunResult& result, const SystemParams& params,
                                              const NonsimOptions& options) {
    NonsimReport r;
    r.classification = result.classification;
    const bool u_only = result.classification == Classification::UBlowsUpOnly;
    const bool v_only = result.classification == Classification::VBlowsUpOnly;
    if (!u_only && !v_only) {
        r.notes.emplace_back("run is not classified as non-simultaneous blow-up");
        return r;
    }
    const auto& fit = u_only ? result.fit_u : result.fit_v;
    const double own = u_only ? params.alpha : params.beta;
    if (own > 1.0) r.expected_exponent = -1.0 / (own - 1.0);
    if (v_only) {
        r.necessary_condition = params.beta > 1.0 + params.p;
        if (!*r.necessary_condition) r.notes.emplace_back("VBlowsUpOnly with beta <= 1 + p contradicts the theory");
    }
    if (!fit) {
        r.notes.emplace_back("no rate fit; report incomplete");
        return r;
    }
    r.complete = true;
    r.exponent = fit->exponent;
    if (r.expected_exponent) {
        r.exponent_ok = std::abs(*r.exponent - *r.expected_exponent) <= options.exponent_tol * std::abs(*r.expected_exponent);
    } else {
        r.notes.emplace_back("blowing-up component has exponent <= 1; no rate law to compare");
    }

    const double T = fit->T_est;
    const auto& samples = result.trajectory.samples;
    if (u_only && params.alpha > 1.0) {
        if (options.delta1 > 0) {
            const double z0 = options.v0_norm;
            for (const auto& s : samples) {
                if (!(s.t < T)) continue;
                const double zbar = flat_supersolution(params, options.delta1, z0, T, s.t);
                r.flat_max_ratio = std::max(r.flat_max_ratio, s.max_v / zbar);
            }
            r.flat_bound_ok = r.flat_max_ratio <= 1.0 + 1e-6;
        } else {
            r.notes.emplace_back("delta1 = 0: flat supersolution not evaluated");
        }
        const double C = std::pow(result.max_v, params.p);
        double ratio = INFINITY;
        for (const auto& s : samples) {
            if (!(s.t < T) || !(C > 0)) continue;
            const double w = std::exp(-options.a_constant * s.t) *
                             std::pow((params.alpha - 1.0) * C * (T - s.t), -1.0 / (params.alpha - 1.0));
            ratio = std::min(ratio, s.max_u / w);
        }
        if (std::isfinite(ratio)) r.envelope_min_ratio = ratio;
    }
    r.satisfied = r.exponent_ok && r.necessary_condition.value_or(true) && r.flat_bound_ok.value_or(true);
    return r;
}

double linear_flow_minimum(const DiscreteOperator& op, const Field& x0, double t1) {
    if (!(t1 >= 0)) throw ContractViolation("t1 must be >= 0");
    Field x = x0, y(x0.size());
    double t = 0.0;
    const double dt_max = 0.5 * op.max_monotone_dt();
    while (t < t1) {
        const double dt = std::min(dt_max, t1 - t);
        op.apply(std::span<const double>(x), std::span<double>(y));
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += dt * y[i];
        t += dt;
    }
    return *std::min_element(x.begin(), x.end());
}

}  // namespace nlrd
