#include "nlrd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlrd/errors.hpp"
#include "nlrd/linalg.hpp"

namespace nlrd {

namespace {

constexpr double kNegativeFloor = 1e-13;
constexpr double kSampleChange = 0.01;

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

double weighted_mean(const Field& weights, const Field& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
    return s;
}

enum class Halt { None, Threshold, Tmax, Stiff, StepCap };

struct Member {
    const Problem* problem = nullptr;
    Integrator integrator;
    CoupledState state;
    Field ru, rv;
    RunResult result;
    Halt halt = Halt::None;
    double last_sample_u = 0.0;
    double last_sample_v = 0.0;
    std::size_t last_sample_step = 0;
    bool crossed_u = false;
    bool crossed_v = false;
};

bool moved(double now, double before) {
    if (now == before) return false;
    return std::abs(now - before) >= kSampleChange * std::abs(before);
}

void record_sample(Member& m, std::size_t step, double dt, const Field& weights) {
    Sample s;
    s.t = m.state.t;
    s.max_u = linalg::sup_norm(m.state.u);
    s.max_v = linalg::sup_norm(m.state.v);
    s.kaplan_u = weighted_mean(weights, m.state.u);
    s.kaplan_v = weighted_mean(weights, m.state.v);
    s.dt = dt;
    s.step = step;
    m.result.trajectory.samples.push_back(s);
    m.last_sample_u = s.max_u;
    m.last_sample_v = s.max_v;
    m.last_sample_step = step;
}

void record_snapshot(Member& m, std::size_t step) {
    auto& snaps = m.result.trajectory.snapshots;
    if (!snaps.empty() && snaps.back().step == step) return;
    snaps.push_back(Snapshot{step, m.state});
}

std::vector<double> series(const Trajectory& traj, Component c) {
    std::vector<double> y;
    y.reserve(traj.samples.size());
    for (const auto& s : traj.samples) y.push_back(c == Component::U ? s.max_u : s.max_v);
    return y;
}

std::vector<double> times(const Trajectory& traj) {
    std::vector<double> t;
    t.reserve(traj.samples.size());
    for (const auto& s : traj.samples) t.push_back(s.t);
    return t;
}

std::optional<RateFit> try_fit(RunResult& r, Component c) {
    try {
        return fit_blowup_rate(r.trajectory, c);
    } catch (const FitError& e) {
        r.diagnostics.push_back(std::string(c == Component::U ? "u" : "v") + " rate fit failed: " + e.what());
        return std::nullopt;
    }
}

void store_fit(RunResult& r, Component c, const RateFit& fit) {
    if (c == Component::U) {
        r.fit_u = fit;
        r.T_u = fit.T_est;
        r.exponent_u = fit.exponent;
    } else {
        r.fit_v = fit;
        r.T_v = fit.T_est;
        r.exponent_v = fit.exponent;
    }
}

void classify(Member& m, const StepPolicy& policy) {
    RunResult& r = m.result;
    switch (m.halt) {
        case Halt::Stiff:
            r.classification = Classification::Undetermined;
            return;
        case Halt::StepCap:
            r.classification = Classification::Undetermined;
            r.diagnostics.push_back("step cap reached before t_max or threshold");
            return;
        case Halt::Tmax:
            r.classification = Classification::Global;
            return;
        case Halt::None:
            r.classification = Classification::Undetermined;
            return;
        case Halt::Threshold: break;
    }

    if (m.crossed_u && m.crossed_v) {
        r.classification = Classification::Simultaneous;
        r.diagnostics.push_back("both components crossed the threshold on the same step");
        if (auto f = try_fit(r, Component::U)) store_fit(r, Component::U, *f);
        if (auto f = try_fit(r, Component::V)) store_fit(r, Component::V, *f);
        return;
    }

    const Component lead = m.crossed_u ? Component::U : Component::V;
    const Component partner = m.crossed_u ? Component::V : Component::U;
    const double partner_max = partner == Component::U ? r.max_u : r.max_v;
    const bool partner_bounded = partner_max <= policy.bounded_level();
    const Classification lead_only = lead == Component::U ? Classification::UBlowsUpOnly : Classification::VBlowsUpOnly;

    const auto fit = try_fit(r, lead);
    if (!fit) {
        r.classification = partner_bounded ? lead_only : Classification::Undetermined;
        r.diagnostics.push_back("classified from the partner bound alone");
        return;
    }
    store_fit(r, lead, *fit);

    const auto t = times(r.trajectory);
    const auto y = series(r.trajectory, partner);
    const double slope = log_log_slope(t, y, fit->T_est, fit->t_lo, fit->t_hi);
    r.partner_slope = slope;

    if (slope <= -policy.divergence_slope) {
        r.classification = Classification::Simultaneous;
        r.diagnostics.push_back("partner diverges over the leader's fit window (log-log slope " +
                                std::to_string(slope) + ")");
        if (partner == Component::U) {
            r.T_u = fit->T_est;
            r.exponent_u = slope;
        } else {
            r.T_v = fit->T_est;
            r.exponent_v = slope;
        }
    } else if (partner_bounded) {
        r.classification = lead_only;
    } else {
        r.classification = Classification::Undetermined;
        r.diagnostics.push_back("partner above the bounded level but not diverging");
    }
}

}  // namespace

double StepPolicy::bounded_level() const {
    return bounded_threshold > 0 ? bounded_threshold : std::sqrt(blowup_threshold);
}

std::vector<std::string> StepPolicy::violations() const {
    std::vector<std::string> out;
    if (!(dt_max > 0)) out.emplace_back("policy.dt_max must be > 0");
    if (!(cfl_safety > 0 && cfl_safety <= 1)) out.emplace_back("policy.cfl_safety must lie in (0, 1]");
    if (!(reaction_target > 0)) out.emplace_back("policy.reaction_target must be > 0");
    if (!(blowup_threshold >= 1e3)) out.emplace_back("policy.blowup_threshold must be >= 1e3");
    if (bounded_threshold < 0 || bounded_threshold >= blowup_threshold) {
        out.emplace_back("policy.bounded_threshold must lie in [0, blowup_threshold)");
    }
    if (!(t_max > 0) || !std::isfinite(t_max)) out.emplace_back("policy.t_max must be finite and > 0");
    if (sample_every < 1) out.emplace_back("policy.sample_every must be >= 1");
    if (snapshot_interval < 0) out.emplace_back("policy.snapshot_interval must be >= 0");
    if (max_steps < 1) out.emplace_back("policy.max_steps must be >= 1");
    if (!(divergence_slope > 0)) out.emplace_back("policy.divergence_slope must be > 0");
    return out;
}

std::vector<std::string> Problem::violations() const {
    auto out = params.violations(!diffusion);
    for (const auto& s : init_u.violations(params.domain)) out.push_back("init_u: " + s);
    for (const auto& s : init_v.violations(params.domain)) out.push_back("init_v: " + s);
    if (!(exterior_value >= 0)) out.emplace_back("exterior_value must be >= 0");
    if (!(data_shift >= 0)) out.emplace_back("data_shift must be >= 0");
    return out;
}

CoupledState Problem::initial_state() const {
    CoupledState s;
    s.u = make_initial_data(init_u, params.domain);
    s.v = make_initial_data(init_v, params.domain);
    for (double& x : s.u) x += data_shift;
    for (double& x : s.v) x += data_shift;
    return s;
}

std::shared_ptr<const OperatorSet> build_operators(const SystemParams& params) {
    auto nonlocal = assemble_nonlocal(params.domain, params.kernel);
    auto laplacian = assemble_laplacian(params.domain);
    Field weights = principal_eigenpair(laplacian).vector;
    double total = 0.0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;
    return std::make_shared<const OperatorSet>(
        OperatorSet{std::move(nonlocal), std::move(laplacian), std::move(weights)});
}

std::pair<Field, Field> rhs(const CoupledState& state, const SystemParams& params, const DiscreteOperator& Lh,
                            const DiscreteOperator& Dh, const RhsOptions& options) {
    const std::size_t n = state.u.size();
    if (state.v.size() != n || Lh.size() != n || Dh.size() != n) {
        throw ContractViolation("rhs: field and operator sizes differ");
    }
    Field ru(n, 0.0), rv(n, 0.0);
    if (options.diffusion) {
        Lh.apply(std::span<const double>(state.u), std::span<double>(ru), options.exterior);
        Dh.apply(std::span<const double>(state.v), std::span<double>(rv), options.exterior);
    }
    if (options.reaction) {
        const double e = params.eps_reg;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = state.u[i], v = state.v[i];
            ru[i] += regularized_power(u, params.alpha, e) * regularized_power(v, params.p, e);
            rv[i] += regularized_power(u, params.q, e) * regularized_power(v, params.beta, e);
        }
    }
    return {std::move(ru), std::move(rv)};
}

Integrator::Integrator(SystemParams params, std::shared_ptr<const OperatorSet> ops, RhsOptions options,
                       StepPolicy policy)
    : params_(std::move(params)), ops_(std::move(ops)), options_(options), policy_(policy) {
    if (!ops_) throw ContractViolation("integrator needs assembled operators");
    if (ops_->nonlocal.size() != params_.domain.size()) {
        throw ContractViolation("operators were assembled on a different grid");
    }
}

void Integrator::evaluate(const CoupledState& state, Field& ru, Field& rv) const {
    auto r = rhs(state, params_, ops_->nonlocal, ops_->laplacian, options_);
    ru = std::move(r.first);
    rv = std::move(r.second);
}

double Integrator::propose_dt(const CoupledState& state, const Field& ru, const Field& rv) const {
    double dt = policy_.dt_max;
    if (options_.diffusion) {
        const double stable = std::min(ops_->nonlocal.max_monotone_dt(), ops_->laplacian.max_monotone_dt());
        dt = std::min(dt, policy_.cfl_safety * stable);
    }
    const double rate = std::max(linalg::sup_norm(ru) / (linalg::sup_norm(state.u) + 1.0),
                                 linalg::sup_norm(rv) / (linalg::sup_norm(state.v) + 1.0));
    if (rate > 0) dt = std::min(dt, policy_.reaction_target / rate);
    return dt;
}

bool Integrator::advance(const CoupledState& state, const Field& ru, const Field& rv, double dt, CoupledState& out,
                         std::size_t& clamped) const {
    const std::size_t n = state.u.size();
    out.t = state.t + dt;
    out.u.resize(n);
    out.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.u[i] = state.u[i] + dt * ru[i];
        out.v[i] = state.v[i] + dt * rv[i];
    }
    const double floor_u = -kNegativeFloor * std::max(1.0, linalg::sup_norm(state.u));
    const double floor_v = -kNegativeFloor * std::max(1.0, linalg::sup_norm(state.v));
    clamped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(out.u[i]) || !std::isfinite(out.v[i])) return false;
        if (out.u[i] < floor_u || out.v[i] < floor_v) return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (out.u[i] < 0) {
            out.u[i] = 0.0;
            ++clamped;
        }
        if (out.v[i] < 0) {
            out.v[i] = 0.0;
            ++clamped;
        }
    }
    return true;
}

StepResult step(const CoupledState& state, const Integrator& integrator) {
    Field ru, rv;
    integrator.evaluate(state, ru, rv);
    double dt = integrator.propose_dt(state, ru, rv);
    StepResult out;
    while (!integrator.advance(state, ru, rv, dt, out.state, out.clamped)) {
        dt *= 0.5;
        if (dt < 1e-14 * std::max(state.t, 1.0)) {
            throw StiffnessError("step size collapsed to " + std::to_string(dt) + " at t = " + std::to_string(state.t),
                                 state.t, dt);
        }
    }
    out.dt = dt;
    return out;
}

std::string to_string(Classification c) {
    switch (c) {
        case Classification::Global: return "Global";
        case Classification::UBlowsUpOnly: return "UBlowsUpOnly";
        case Classification::VBlowsUpOnly: return "VBlowsUpOnly";
        case Classification::Simultaneous: return "Simultaneous";
        case Classification::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

Classification classification_from_string(const std::string& name) {
    for (auto c : {Classification::Global, Classification::UBlowsUpOnly, Classification::VBlowsUpOnly,
                   Classification::Simultaneous, Classification::Undetermined}) {
        if (to_string(c) == name) return c;
    }
    throw ValidationError("unknown classification '" + name + "'");
}

RunResult run(const Problem& problem, const StepPolicy& policy, const StepObserver& observer) {
    return run(problem, policy, nullptr, observer);
}

RunResult run(const Problem& problem, const StepPolicy& policy, std::shared_ptr<const OperatorSet> ops,
              const StepObserver& observer) {
    auto out = run_ensemble(std::span<const Problem>(&problem, 1), policy, std::move(ops), observer);
    return std::move(out.front());
}

std::vector<RunResult> run_ensemble(std::span<const Problem> problems, const StepPolicy& policy,
                                    std::shared_ptr<const OperatorSet> ops, const StepObserver& observer) {
    if (problems.empty()) return {};
    std::vector<std::string> errs = policy.violations();
    for (std::size_t k = 0; k < problems.size(); ++k) {
        for (const auto& s : problems[k].violations()) errs.push_back("member " + std::to_string(k) + ": " + s);
        const auto& d0 = problems.front().params.domain;
        const auto& dk = problems[k].params.domain;
        if (dk.dim != d0.dim || dk.n != d0.n || dk.bounds != d0.bounds) {
            errs.push_back("member " + std::to_string(k) + ": grid differs from member 0");
        }
    }
    if (!errs.empty()) throw ValidationError(join(errs));
    if (!ops) ops = build_operators(problems.front().params);
    const Field& weights = ops->kaplan_weights;

    std::vector<Member> members;
    members.reserve(problems.size());
    for (const auto& pb : problems) {
        RhsOptions opt{pb.diffusion, pb.reaction, pb.exterior_value};
        Member m{&pb, Integrator(pb.params, ops, opt, policy), pb.initial_state(), {}, {}, {}, Halt::None};
        m.result.max_u = linalg::sup_norm(m.state.u);
        m.result.max_v = linalg::sup_norm(m.state.v);
        record_sample(m, 0, 0.0, weights);
        record_snapshot(m, 0);
        members.push_back(std::move(m));
    }

    const double M = policy.blowup_threshold;
    double t = 0.0;
    double next_snapshot = policy.snapshot_interval > 0 ? policy.snapshot_interval : INFINITY;
    std::vector<CoupledState> next(members.size());
    std::vector<std::size_t> clamped(members.size(), 0);

    auto halt = [&](Member& m, Halt why, std::size_t step, double dt) {
        m.halt = why;
        if (m.last_sample_step != step) record_sample(m, step, dt, weights);
        record_snapshot(m, step);
    };
    auto active = [&] {
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < members.size(); ++k) {
            if (members[k].halt == Halt::None) idx.push_back(k);
        }
        return idx;
    };

    for (std::size_t step = 1;; ++step) {
        auto live = active();
        if (live.empty()) break;
        if (static_cast<long>(step) > policy.max_steps) {
            for (auto k : live) halt(members[k], Halt::StepCap, step - 1, 0.0);
            break;
        }

        double dt = policy.dt_max;
        for (auto k : live) {
            Member& m = members[k];
            m.integrator.evaluate(m.state, m.ru, m.rv);
            dt = std::min(dt, m.integrator.propose_dt(m.state, m.ru, m.rv));
        }
        bool lands_on_tmax = false;
        if (t + dt >= policy.t_max * (1.0 - 1e-14)) {
            dt = policy.t_max - t;
            lands_on_tmax = true;
        }

        while (!live.empty()) {
            std::vector<std::size_t> failed;
            for (auto k : live) {
                Member& m = members[k];
                if (!m.integrator.advance(m.state, m.ru, m.rv, dt, next[k], clamped[k])) failed.push_back(k);
            }
            if (failed.empty()) break;
            dt *= 0.5;
            lands_on_tmax = false;
            if (dt < 1e-14 * std::max(t, 1.0)) {
                for (auto k : failed) {
                    Member& m = members[k];
                    m.result.trajectory.events.push_back({EventKind::StiffnessFailure, t, 0});
                    m.result.diagnostics.push_back("stiffness: step size collapsed to " + std::to_string(dt) +
                                                   " at t = " + std::to_string(t));
                    halt(m, Halt::Stiff, step - 1, 0.0);
                }
                live = active();
                dt = policy.dt_max;
                for (auto k : live) dt = std::min(dt, members[k].integrator.propose_dt(members[k].state,
                                                                                     members[k].ru, members[k].rv));
                if (t + dt > policy.t_max) dt = policy.t_max - t;
            }
        }
        if (live.empty()) break;

        const double t_new = lands_on_tmax ? policy.t_max : t + dt;
        bool take_snapshot = false;
        if (t_new >= next_snapshot) {
            take_snapshot = true;
            while (next_snapshot <= t_new) next_snapshot += policy.snapshot_interval;
        }

        for (auto k : live) {
            Member& m = members[k];
            next[k].t = t_new;
            if (observer) observer(k, m.state, next[k], dt);
            std::swap(m.state, next[k]);
            auto& traj = m.result.trajectory;
            traj.step_sizes.push_back(dt);
            if (clamped[k] > 0) traj.events.push_back({EventKind::PositivityClamped, t_new, clamped[k]});

            const double nu = linalg::sup_norm(m.state.u);
            const double nv = linalg::sup_norm(m.state.v);
            m.result.max_u = std::max(m.result.max_u, nu);
            m.result.max_v = std::max(m.result.max_v, nv);
            if (step % static_cast<std::size_t>(policy.sample_every) == 0 || moved(nu, m.last_sample_u) ||
                moved(nv, m.last_sample_v)) {
                record_sample(m, step, dt, weights);
            }
            if (take_snapshot) record_snapshot(m, step);

            m.crossed_u = nu >= M;
            m.crossed_v = nv >= M;
            if (m.crossed_u) traj.events.push_back({EventKind::UThresholdCrossed, t_new, 0});
            if (m.crossed_v) traj.events.push_back({EventKind::VThresholdCrossed, t_new, 0});
            if (m.crossed_u || m.crossed_v) {
                halt(m, Halt::Threshold, step, dt);
            } else if (lands_on_tmax) {
                traj.events.push_back({EventKind::ReachedTmax, t_new, 0});
                halt(m, Halt::Tmax, step, dt);
            }
        }
        t = t_new;
    }

    std::vector<RunResult> out;
    out.reserve(members.size());
    for (auto& m : members) {
        m.result.trajectory.final_state = m.state;
        classify(m, policy);
        out.push_back(std::move(m.result));
    }
    return out;
}

Problem regularized_problem(const Problem& problem, double eps) {
    if (!(eps > 0)) throw ContractViolation("regularization level must be positive");
    Problem out = problem;
    out.params.eps_reg = eps;
    out.data_shift = eps;
    out.exterior_value = eps;
    return out;
}

ContinuationReport maximal_continuation(const Problem& problem, const std::vector<double>& eps_schedule,
                                        const StepPolicy& policy) {
    if (eps_schedule.empty()) throw ContractViolation("eps schedule is empty");
    for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
        if (!(eps_schedule[k] > 0)) throw ContractViolation("eps schedule entries must be positive");
        if (k > 0 && !(eps_schedule[k] < eps_schedule[k - 1])) {
            throw ContractViolation("eps schedule must be strictly decreasing");
        }
    }
    std::vector<Problem> problems;
    problems.reserve(eps_schedule.size());
    for (double e : eps_schedule) problems.push_back(regularized_problem(problem, e));

    StepPolicy pol = policy;
    if (pol.snapshot_interval <= 0) pol.snapshot_interval = pol.t_max / 50.0;

    ContinuationReport report;
    report.eps_schedule = eps_schedule;
    report.runs = run_ensemble(problems, pol);
    for (const auto& r : report.runs) {
        if (r.classification == Classification::Undetermined) report.any_undetermined = true;
    }

    for (std::size_t k = 0; k + 1 < report.runs.size(); ++k) {
        const auto& a = report.runs[k].trajectory.snapshots;
        const auto& b = report.runs[k + 1].trajectory.snapshots;
        double dist = 0.0;
        std::size_t shared = 0;
        std::size_t j = 0;
        for (const auto& sa : a) {
            while (j < b.size() && b[j].step < sa.step) ++j;
            if (j == b.size()) break;
            if (b[j].step != sa.step) continue;
            ++shared;
            const auto& x = sa.state;
            const auto& y = b[j].state;
            for (std::size_t i = 0; i < x.u.size(); ++i) {
                dist = std::max({dist, std::abs(x.u[i] - y.u[i]), std::abs(x.v[i] - y.v[i])});
                report.ordering_violation = std::max({report.ordering_violation, y.u[i] - x.u[i], y.v[i] - x.v[i]});
            }
        }
        report.distances.push_back(dist);
        report.shared_snapshots = k == 0 ? shared : std::min(report.shared_snapshots, shared);
    }
    return report;
}

}  // namespace nlrd
