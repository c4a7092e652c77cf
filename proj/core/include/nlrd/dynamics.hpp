#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nlrd/model.hpp"
#include "nlrd/operators.hpp"
#include "nlrd/rate_fit.hpp"
#include "nlrd/trajectory.hpp"

namespace nlrd {

/// Adaptive explicit Euler controls.
struct StepPolicy {
    double dt_max = 1e-2;
    double cfl_safety = 0.9;
    double reaction_target = 0.05;   // max relative growth per step
    double blowup_threshold = 1e8;   // M
    double bounded_threshold = 0.0;  // partner bound; 0 means sqrt(M)
    double t_max = 10.0;
    int sample_every = 10;           // also samples whenever a norm moved >= 1%
    double snapshot_interval = 0.0;  // full-field snapshots; 0 keeps only first and last
    long max_steps = 50'000'000;
    double divergence_slope = 0.05;  // partner diverges when d log|.| / d log(T - t) < -this

    double bounded_level() const;
    std::vector<std::string> violations() const;
};

/// A problem document: parameters, initial data and integration switches.
///
/// `exterior_value` replaces the homogeneous Dirichlet datum (u outside the
/// domain, v on the boundary); `data_shift` is added to both initial fields.
/// Both are zero except in the regularized continuation.
struct Problem {
    SystemParams params;
    InitialDataSpec init_u{};
    InitialDataSpec init_v{};
    bool diffusion = true;
    bool reaction = true;
    double exterior_value = 0.0;
    double data_shift = 0.0;

    /// Scalar mode (diffusion off) allows p = 0 or q = 0.
    std::vector<std::string> violations() const;
    CoupledState initial_state() const;
};

/// f_eps(w, gamma): w^gamma for w >= eps, eps^gamma below.
inline double regularized_power(double w, double gamma, double eps) {
    return std::pow(w >= eps ? w : eps, gamma);
}

/// Operators shared by every run on one grid/kernel pair.
struct OperatorSet {
    DiscreteOperator nonlocal;
    DiscreteOperator laplacian;
    Field kaplan_weights;  // principal Laplacian eigenvector scaled to unit sum
};

std::shared_ptr<const OperatorSet> build_operators(const SystemParams& params);

struct RhsOptions {
    bool diffusion = true;
    bool reaction = true;
    double exterior = 0.0;
};

/// (L u + f(u,alpha) f(v,p), D v + f(u,q) f(v,beta)) nodewise.
std::pair<Field, Field> rhs(const CoupledState& state, const SystemParams& params, const DiscreteOperator& Lh,
                            const DiscreteOperator& Dh, const RhsOptions& options = {});

/// Single-problem explicit Euler stepper.
class Integrator {
public:
    Integrator(SystemParams params, std::shared_ptr<const OperatorSet> ops, RhsOptions options, StepPolicy policy);

    void evaluate(const CoupledState& state, Field& ru, Field& rv) const;
    /// min(dt_max, cfl * stability bound, eta / growth rate), before t_max clipping.
    double propose_dt(const CoupledState& state, const Field& ru, const Field& rv) const;
    /// Forward Euler with dt. Returns false when an entry drops below the
    /// rounding floor (caller halves dt); rounding negatives are clamped.
    bool advance(const CoupledState& state, const Field& ru, const Field& rv, double dt, CoupledState& out,
                 std::size_t& clamped) const;

    const SystemParams& params() const noexcept { return params_; }
    const OperatorSet& operators() const noexcept { return *ops_; }
    const StepPolicy& policy() const noexcept { return policy_; }
    const RhsOptions& options() const noexcept { return options_; }

private:
    SystemParams params_;
    std::shared_ptr<const OperatorSet> ops_;
    RhsOptions options_;
    StepPolicy policy_;
};

struct StepResult {
    CoupledState state;
    double dt = 0.0;
    std::size_t clamped = 0;
};

/// One accepted step (halving dt on rejected steps).
/// Throws StiffnessError when dt < 1e-14 t.
StepResult step(const CoupledState& state, const Integrator& integrator);

enum class Classification { Global, UBlowsUpOnly, VBlowsUpOnly, Simultaneous, Undetermined };
std::string to_string(Classification c);
Classification classification_from_string(const std::string& name);

struct Verdict {
    bool satisfied = false;
    double residual = 0.0;
};

struct RunResult {
    Classification classification = Classification::Undetermined;
    std::optional<double> T_u, T_v;
    std::optional<double> exponent_u, exponent_v;
    std::optional<RateFit> fit_u, fit_v;
    double max_u = 0.0;  // over the whole run
    double max_v = 0.0;
    std::optional<double> partner_slope;
    Trajectory trajectory;
    std::map<std::string, Verdict> verdicts;
    std::vector<std::string> diagnostics;
};

/// Called after every accepted step with the member index in the ensemble.
using StepObserver =
    std::function<void(std::size_t member, const CoupledState& before, const CoupledState& after, double dt)>;

/// Integrates one problem until a component crosses M or t reaches t_max.
RunResult run(const Problem& problem, const StepPolicy& policy, const StepObserver& observer = {});
RunResult run(const Problem& problem, const StepPolicy& policy, std::shared_ptr<const OperatorSet> ops,
              const StepObserver& observer = {});

/// Integrates several problems on the same grid and kernel with a common
/// step sequence, so samples and snapshots of members are taken at
/// identical times while they are active.
std::vector<RunResult> run_ensemble(std::span<const Problem> problems, const StepPolicy& policy,
                                    std::shared_ptr<const OperatorSet> ops = nullptr,
                                    const StepObserver& observer = {});

struct ContinuationReport {
    std::vector<double> eps_schedule;
    std::vector<RunResult> runs;
    /// sup over shared snapshots and nodes of |u_k - u_{k+1}|, |v_k - v_{k+1}|.
    std::vector<double> distances;
    /// Largest violation of u_{eps_k} >= u_{eps_{k+1}} (and for v) at shared snapshots.
    double ordering_violation = 0.0;
    bool any_undetermined = false;
    std::size_t shared_snapshots = 0;
};

/// Regularized problems: powers f_eps, data + eps, exterior value eps.
Problem regularized_problem(const Problem& problem, double eps);

/// Runs the problem at each eps of a strictly decreasing positive schedule.
ContinuationReport maximal_continuation(const Problem& problem, const std::vector<double>& eps_schedule,
                                        const StepPolicy& policy);

}  // namespace nlrd
