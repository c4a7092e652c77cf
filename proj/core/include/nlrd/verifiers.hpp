#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlrd/dynamics.hpp"
#include "nlrd/operators.hpp"

namespace nlrd {

// ---------------------------------------------------------------- supersolutions

enum class CertificateKind { SteadyAB, ExponentialKappaZero };
std::string to_string(CertificateKind kind);

/// Steady: (A w, B z) with w, z the torsion functions of the two operators.
/// Exponential: (A e^{Bt}, C e^{Dt}) with D = B (1 - alpha) / p.
struct SupersolutionCertificate {
    CertificateKind kind = CertificateKind::SteadyAB;
    double A = 0.0, B = 0.0, C = 0.0, D = 0.0;
    double w_norm = 0.0, z_norm = 0.0;
    double slack_u = 0.0;  // margin of the u inequality (relative, 0 on the frontier)
    double slack_v = 0.0;
    double slack = 0.0;    // min of the two
    bool satisfied = false;
};

/// slack_u = 1 - A^{alpha-1} B^p |w|^alpha |z|^p, slack_v = 1 - A^q B^{beta-1} |w|^q |z|^beta.
/// Throws ContractViolation for nonpositive A, B or norms.
SupersolutionCertificate verify_steady_supersolution(const SystemParams& params, double A, double B, double w_norm,
                                                     double z_norm);

/// Interval [log B_lo, log B_hi] of admissible B at amplitude A (empty when lo > hi).
struct LogInterval {
    double lo = -INFINITY;
    double hi = INFINITY;
    bool empty() const { return lo > hi; }
};
LogInterval steady_feasible_log_B(const SystemParams& params, double A, double w_norm, double z_norm);

/// Closed-form frontier in A for beta < 1 and kappa != 0:
/// A* = (|w|^{-(pq + alpha(1-beta))/p} |z|^{-1})^{p/kappa}; feasible iff A <= A*
/// (kappa > 0) or A >= A* (kappa < 0).
struct SteadyFrontier {
    double A_star = 0.0;
    bool feasible_below = true;
};
std::optional<SteadyFrontier> steady_frontier(const SystemParams& params, double w_norm, double z_norm);

/// Searches a log grid of A in [A_min, A_min * 1e12] for a certificate with
/// A >= A_min and B >= B_min (B chosen mid-interval in log scale).
std::optional<SupersolutionCertificate> find_steady_certificate(const SystemParams& params, double w_norm,
                                                                double z_norm, double A_min = 1e-6,
                                                                double B_min = 1e-6);

/// Requires kappa = 0 within 1e-12 and max(alpha, beta) < 1 (WrongRegimeError otherwise).
/// Checks B >= A^{alpha-1} C^p and ((1-alpha)/p) B >= A^q C^{beta-1}.
SupersolutionCertificate verify_exponential_supersolution(const SystemParams& params, double A, double B, double C);

/// max{A^{alpha-1} C^p, (p/(1-alpha)) A^q C^{beta-1}}.
double exponential_rate_frontier(const SystemParams& params, double A, double C);

// ---------------------------------------------------------------- lower bounds

/// u(t) >= k Pi_j(1 - dt_j lambda1) phi and v(t) >= k Pi_j(1 - dt_j mu1) psi at
/// every snapshot, where the products run over the accepted steps so far
/// (the explicit Euler image of the eigen-decay e^{-lambda1 t}).
struct LowerBoundReport {
    double k = 0.0;    // min(k_u, k_v)
    double k_u = 0.0;  // min u0 / phi
    double k_v = 0.0;  // min v0 / psi
    double lambda1 = 0.0, mu1 = 0.0, min_phi = 0.0;
    double min_margin_u = INFINITY;  // min over snapshots and nodes of (u - bound) / scale
    double min_margin_v = INFINITY;
    double continuous_margin = INFINITY;  // same with e^{-lambda1 t} min phi, reported only
    std::size_t snapshots_checked = 0;
    bool vacuous = false;
    bool satisfied = false;
};

LowerBoundReport lower_bound_check(const Trajectory& traj, const EigenPair& eig_L, const EigenPair& eig_D,
                                   double tol = 1e-8);

/// Pi over accepted steps 1..step of (1 - dt_j rate).
double discrete_decay(const Trajectory& traj, std::size_t step, double rate);

// ---------------------------------------------------------------- Kaplan

/// Difference quotient of I_v = sum omega v (omega = psi / sum psi) against
/// -mu1 I + C0 Pi(1 - dt lambda1)^q I^beta on consecutive-step sample pairs.
/// C0 = (k_u min phi)^q. Requires beta > 1.
struct KaplanReport {
    double C0 = 0.0;
    double min_margin = INFINITY;  // relative margin
    std::vector<double> margins;
    std::vector<double> times;
    std::size_t pairs_checked = 0;
    bool satisfied = false;
};

KaplanReport kaplan_check(const Trajectory& traj, double mu1, double lambda1, const SystemParams& params,
                          double C0, double tol = 1e-6);

// ---------------------------------------------------------------- Case 1

/// Some node with u0 > (C (alpha-1) / (alpha + mu1 p - 1) psi^p)^{-1/(alpha-1)},
/// C = k_v^p, k_v = min v0 / psi. `ratio` is max over nodes of u0 / threshold,
/// so scaling u0 by more than 1/ratio makes the prediction true.
struct Case1Report {
    double C = 0.0;
    double k_v = 0.0;
    double ratio = 0.0;
    std::size_t node = 0;
    double threshold = INFINITY;  // at `node`
    bool predicted = false;
};

Case1Report case1_threshold_check(const SystemParams& params, const EigenPair& eig_D, const Field& u0,
                                  const Field& v0);

// ---------------------------------------------------------------- Case 3

struct Case3Spec {
    double T = 0.05;
    double R = 0.2;
    double L = 0.4;
    double eps_claim = 0.0;  // 0 means k * delta
    double delta = 0.02;
    double k = 5.0;
    int nodes_per_R = 40;
    double s_span = 100.0;  // auxiliary run until T - t = T / s_span

    double epsilon() const { return eps_claim > 0 ? eps_claim : k * delta; }
    std::vector<std::string> violations() const;
};

struct Case3Report {
    double identity_max_rel_error = 0.0;
    bool identity_ok = false;

    double claim_min_margin = INFINITY;  // min over B_R and time of W - eps e^{-eps(2-eps)/(T-t)}
    double claim_A = 0.0;
    bool claim_undetermined = false;
    bool claim_ok = false;

    double kernel_mass_min = 0.0;  // min over B_R of the kernel mass inside B_R
    double inequality_min_margin = INFINITY;
    bool inequality_ok = false;

    double epsilon = 0.0;
    bool satisfied = false;
};

/// max relative error of psi' = phi^q psi^beta on a grid of (0, T), with
/// psi' from a five-point difference of log psi.
double case3_identity_error(double T, double q, double beta, int points = 200);

/// Requires max(alpha, beta) < 1, kappa > 0 (WrongRegimeError) and a 1D kernel.
Case3Report case3_subsolution_check(const Case3Spec& spec, const SystemParams& params);

// ---------------------------------------------------------------- monotone data

struct MonotoneOptions {
    double exterior = 0.0;
    double reaction_scale = 1.0;  // multiplies both reaction products
};

struct MonotoneResiduals {
    Field r_u, r_v;
    double min_u = 0.0, min_v = 0.0;
    bool satisfied() const { return min_u >= 0 && min_v >= 0; }
};

/// r_u = L u0 + f(u0,alpha) f(v0,p) - delta1 f(u0,alpha);
/// r_v = D v0 + f(u0,q) f(v0,beta) - delta2 f(v0,beta).
MonotoneResiduals verify_monotone_data(const Field& u0, const Field& v0, const SystemParams& params,
                                       const DiscreteOperator& Lh, const DiscreteOperator& Dh, double delta1,
                                       double delta2, const MonotoneOptions& options = {});

/// Step observer recording min over steps and nodes of
/// ((u_{n+1} - u_n)/dt - delta1 f(u_n, alpha)) / scale and the v twin, where
/// scale = max(1, |u_t|_inf, delta1 |f(u,alpha)|_inf) at that step.
class MonotoneTracker {
public:
    MonotoneTracker(SystemParams params, double delta1, double delta2);

    StepObserver observer();
    double min_u() const noexcept { return min_u_; }
    double min_v() const noexcept { return min_v_; }
    std::size_t steps() const noexcept { return steps_; }
    bool holds(double tol = 1e-6) const { return min_u_ >= -tol && min_v_ >= -tol; }

private:
    SystemParams params_;
    double delta1_, delta2_;
    double min_u_ = INFINITY, min_v_ = INFINITY;
    std::size_t steps_ = 0;
};

// ---------------------------------------------------------------- non-simultaneous blow-up

struct NonsimOptions {
    double delta1 = 0.0;      // flat supersolution constant (UBlowsUpOnly)
    double v0_norm = 0.0;     // |v0|_inf
    double a_constant = 0.0;  // 1 - max kernel row mass
    double exponent_tol = 0.1;
};

struct NonsimReport {
    Classification classification = Classification::Undetermined;
    bool complete = false;
    std::optional<double> exponent, expected_exponent;
    bool exponent_ok = false;
    std::optional<bool> necessary_condition;  // beta > 1 + p (VBlowsUpOnly)
    std::optional<bool> flat_bound_ok;        // |v| <= flat supersolution (UBlowsUpOnly)
    double flat_max_ratio = 0.0;              // max over samples of |v| / zbar
    std::optional<double> envelope_min_ratio; // min over samples of |u| / w_envelope
    std::vector<std::string> notes;
    bool satisfied = false;
};

/// zbar(t) for the partner v of a blowing-up u.
double flat_supersolution(const SystemParams& params, double delta1, double z0, double T, double t);

NonsimReport check_nonsimultaneity_conditions(const RunResult& result, const SystemParams& params,
                                              const NonsimOptions& options);

/// min over nodes of the explicit Euler linear flow x' = Op x from x0 at time t1.
double linear_flow_minimum(const DiscreteOperator& op, const Field& x0, double t1);

}  // namespace nlrd
