#include "cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "nlrd/errors.hpp"
#include "nlrd/linalg.hpp"
#include "nlrd/operators.hpp"
#include "nlrd/rate_fit.hpp"
#include "nlrd/sweep.hpp"
#include "nlrd/verifiers.hpp"

namespace nlrd::cli {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kVerifyKeys = {"A",  "B", "C",     "A_min",     "B_min",       "delta1",
                                           "delta2", "T", "R", "L",         "delta",       "k",
                                           "eps_claim", "nodes_per_R", "s_span"};
const std::set<std::string> kPlanKeys = {"axes",       "problem",   "policy",           "output_dir",
                                         "parallelism", "stop_after", "retry_undetermined"};
const std::vector<std::string> kVerifiers = {"supersolution", "exponential", "lower-bound", "kaplan",
                                             "case1",         "case3",       "monotone",    "nonsim"};

std::vector<std::string> split(const std::string& path) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string item;
    while (std::getline(ss, item, '.')) parts.push_back(item);
    if (!path.empty() && path.back() == '.') parts.emplace_back();
    return parts;
}

bool known_problem_path(const std::vector<std::string>& parts, std::size_t from) {
    const std::size_t depth = parts.size() - from;
    if (depth == 0 || depth > 2) return false;
    json probe = json::object();
    if (depth == 1) {
        probe[parts[from]] = 0;
    } else {
        probe[parts[from]] = json{{parts[from + 1], 0}};
        static const std::set<std::string> nested = {"kernel", "domain", "init_u", "init_v"};
        if (!nested.count(parts[from])) return false;
    }
    return unknown_problem_keys(probe).empty();
}

bool known_policy_path(const std::vector<std::string>& parts, std::size_t from) {
    if (parts.size() != from + 1) return parts.size() == from;
    return unknown_policy_keys(json{{parts[from], 0}}).empty();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const json& doc, const std::string& output, std::ostream& out) {
    if (output.empty()) {
        out << doc.dump(2) << "\n";
        return;
    }
    std::ofstream f(output, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot write '" + output + "'");
    f << doc.dump(2) << "\n";
}

double verify_number(const Config& cfg, const char* key, double fallback) {
    if (!cfg.verify.contains(key)) return fallback;
    return cfg.verify[key].get<double>();
}

std::string default_output_dir(const std::string& output) {
    if (!output.empty()) return output;
    if (const char* env = std::getenv("NLRD_OUTPUT_DIR"); env && *env) return env;
    return {};
}

json verdict_doc(const std::string& name, const Config& cfg, bool satisfied, double margin, json constants,
                 json details = json::object()) {
    return {{"name", name},
            {"inputs_digest", digest(cfg.doc)},
            {"satisfied", satisfied},
            {"margin", std::isfinite(margin) ? json(margin) : json(nullptr)},
            {"constants_used", std::move(constants)},
            {"details", std::move(details)}};
}

// ------------------------------------------------------------------ verbs

int cmd_simulate(const Config& cfg, const std::string& output, std::ostream& out) {
    const std::string dir = default_output_dir(output);
    if (!dir.empty()) fs::create_directories(dir);
    if (!cfg.eps_schedule.empty()) {
        auto rep = maximal_continuation(cfg.problem, cfg.eps_schedule, cfg.policy);
        json runs = json::array();
        for (std::size_t k = 0; k < rep.runs.size(); ++k) {
            runs.push_back(manifest_json(regularized_problem(cfg.problem, rep.eps_schedule[k]), cfg.policy,
                                         rep.runs[k]));
        }
        json doc = {{"eps_schedule", rep.eps_schedule},
                    {"distances", rep.distances},
                    {"ordering_violation", rep.ordering_violation},
                    {"shared_snapshots", rep.shared_snapshots},
                    {"any_undetermined", rep.any_undetermined},
                    {"runs", runs}};
        emit(doc, dir.empty() ? "" : (fs::path(dir) / "continuation.json").string(), out);
        return rep.any_undetermined ? 2 : 0;
    }
    const RunResult r = run(cfg.problem, cfg.policy);
    const json manifest = manifest_json(cfg.problem, cfg.policy, r);
    if (dir.empty()) {
        emit(manifest, "", out);
    } else {
        emit(manifest, (fs::path(dir) / "manifest.json").string(), out);
        std::ofstream csv(fs::path(dir) / "trajectory.csv", std::ios::binary | std::ios::trunc);
        csv << trajectory_to_csv(r.trajectory);
        out << "class " << to_string(r.classification) << "; wrote " << dir << "/manifest.json and "
            << dir << "/trajectory.csv\n";
    }
    return r.classification == Classification::Undetermined ? 2 : 0;
}

json eigen_record(const DiscreteOperator& op, const EigenPair& e) {
    return {{"kind", op.kind() == OperatorKind::NonlocalL ? "NonlocalL" : "LaplacianD"},
            {"n", op.grid().n},
            {"h", op.grid().h(0)},
            {"value", e.value},
            {"min_eigvec", e.min_vector},
            {"residual", e.residual},
            {"iterations", e.iterations}};
}

int cmd_eigen(const Config& cfg, const std::string& output, std::ostream& out) {
    const auto L = assemble_nonlocal(cfg.problem.params.domain, cfg.problem.params.kernel);
    const auto D = assemble_laplacian(cfg.problem.params.domain);
    json doc = json::array({eigen_record(L, principal_eigenpair(L)), eigen_record(D, principal_eigenpair(D))});
    emit(doc, output, out);
    return 0;
}

json verify_supersolution(const Config& cfg) {
    const auto& pr = cfg.problem.params;
    const auto L = assemble_nonlocal(pr.domain, pr.kernel);
    const auto D = assemble_laplacian(pr.domain);
    const Field w = solve_torsion(L), z = solve_torsion(D);
    const double wn = linalg::sup_norm(w), zn = linalg::sup_norm(z);
    const auto s0 = cfg.problem.initial_state();
    double a_need = 0.0, b_need = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        a_need = std::max(a_need, s0.u[i] / w[i]);
        b_need = std::max(b_need, s0.v[i] / z[i]);
    }
    std::optional<SupersolutionCertificate> cert;
    json constants = {{"w_norm", wn}, {"z_norm", zn}, {"kappa", kappa(pr)}};
    if (cfg.verify.contains("A") && cfg.verify.contains("B")) {
        cert = verify_steady_supersolution(pr, verify_number(cfg, "A", 1), verify_number(cfg, "B", 1), wn, zn);
    } else {
        const double A_min = verify_number(cfg, "A_min", std::max(a_need, 1e-12));
        const double B_min = verify_number(cfg, "B_min", std::max(b_need, 1e-12));
        constants["A_min"] = A_min;
        constants["B_min"] = B_min;
        cert = find_steady_certificate(pr, wn, zn, A_min, B_min);
    }
    if (auto f = steady_frontier(pr, wn, zn)) {
        constants["A_star"] = f->A_star;
        constants["feasible_below_A_star"] = f->feasible_below;
    }
    if (!cert) return verdict_doc("supersolution", cfg, false, -INFINITY, constants, {{"found", false}});
    constants["A"] = cert->A;
    constants["B"] = cert->B;
    const bool dominates = cert->A >= a_need && cert->B >= b_need;
    return verdict_doc("supersolution", cfg, cert->satisfied, cert->slack, constants,
                       {{"kind", to_string(cert->kind)},
                        {"slack_u", cert->slack_u},
                        {"slack_v", cert->slack_v},
                        {"dominates_data", dominates}});
}

json verify_exponential(const Config& cfg) {
    const auto& pr = cfg.problem.params;
    const double A = verify_number(cfg, "A", 1.0), B = verify_number(cfg, "B", 10.0), C = verify_number(cfg, "C", 1.0);
    const auto cert = verify_exponential_supersolution(pr, A, B, C);
    return verdict_doc("exponential", cfg, cert.satisfied, cert.slack,
                       {{"A", A}, {"B", B}, {"C", C}, {"D", cert.D}, {"B_frontier", exponential_rate_frontier(pr, A, C)}},
                       {{"slack_u", cert.slack_u}, {"slack_v", cert.slack_v}});
}

StepPolicy with_snapshots(StepPolicy p) {
    if (p.snapshot_interval <= 0) p.snapshot_interval = p.t_max / 50.0;
    return p;
}

json verify_lower_bound(const Config& cfg) {
    auto ops = build_operators(cfg.problem.params);
    const auto r = run(cfg.problem, with_snapshots(cfg.policy), ops);
    const auto eL = principal_eigenpair(ops->nonlocal), eD = principal_eigenpair(ops->laplacian);
    const auto lb = lower_bound_check(r.trajectory, eL, eD);
    return verdict_doc("lower-bound", cfg, lb.satisfied && !lb.vacuous, std::min(lb.min_margin_u, lb.min_margin_v),
                       {{"k", lb.k},
                        {"k_u", lb.k_u},
                        {"k_v", lb.k_v},
                        {"lambda1", lb.lambda1},
                        {"mu1", lb.mu1},
                        {"min_phi", lb.min_phi}},
                       {{"vacuous", lb.vacuous},
                        {"snapshots_checked", lb.snapshots_checked},
                        {"continuous_margin", lb.continuous_margin},
                        {"classification", to_string(r.classification)}});
}

json verify_kaplan(const Config& cfg) {
    if (!(cfg.problem.params.beta > 1.0)) throw WrongRegimeError("Kaplan's inequality needs beta > 1");
    auto ops = build_operators(cfg.problem.params);
    StepPolicy pol = cfg.policy;
    pol.sample_every = 1;
    const auto r = run(cfg.problem, pol, ops);
    const auto eL = principal_eigenpair(ops->nonlocal), eD = principal_eigenpair(ops->laplacian);
    const auto lb = lower_bound_check(r.trajectory, eL, eD);
    const double C0 = std::pow(std::max(lb.k_u, 0.0) * lb.min_phi, cfg.problem.params.q);
    const auto kr = kaplan_check(r.trajectory, eD.value, eL.value, cfg.problem.params, C0);
    return verdict_doc("kaplan", cfg, kr.satisfied, kr.min_margin,
                       {{"C0", C0}, {"k_u", lb.k_u}, {"min_phi", lb.min_phi}, {"lambda1", eL.value}, {"mu1", eD.value}},
                       {{"pairs_checked", kr.pairs_checked}, {"classification", to_string(r.classification)}});
}

json verify_case1(const Config& cfg) {
    const auto D = assemble_laplacian(cfg.problem.params.domain);
    const auto eD = principal_eigenpair(D);
    const auto s0 = cfg.problem.initial_state();
    const auto c1 = case1_threshold_check(cfg.problem.params, eD, s0.u, s0.v);
    return verdict_doc("case1", cfg, c1.predicted, c1.ratio - 1.0,
                       {{"C", c1.C}, {"k_v", c1.k_v}, {"mu1", eD.value}},
                       {{"predicted", c1.predicted},
                        {"ratio", c1.ratio},
                        {"node", c1.node},
                        {"threshold", std::isfinite(c1.threshold) ? json(c1.threshold) : json(nullptr)}});
}

json verify_case3(const Config& cfg, std::uint64_t seed) {
    Case3Spec spec;
    spec.T = verify_number(cfg, "T", spec.T);
    spec.R = verify_number(cfg, "R", spec.R);
    spec.L = verify_number(cfg, "L", spec.L);
    spec.delta = verify_number(cfg, "delta", spec.delta);
    spec.k = verify_number(cfg, "k", spec.k);
    spec.eps_claim = verify_number(cfg, "eps_claim", spec.eps_claim);
    spec.nodes_per_R = static_cast<int>(verify_number(cfg, "nodes_per_R", spec.nodes_per_R));
    spec.s_span = verify_number(cfg, "s_span", spec.s_span);
    const auto r = case3_subsolution_check(spec, cfg.problem.params);

    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> uT(0.01, 10.0), uq(0.1, 5.0), ub(0.0, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double T = uT(gen), q = uq(gen), b = ub(gen);
        worst = std::max(worst, case3_identity_error(T, q, b));
    }
    const bool random_ok = worst <= 1e-8;
    return verdict_doc("case3", cfg, r.satisfied && random_ok, std::min(r.claim_min_margin, r.inequality_min_margin),
                       {{"T", spec.T},
                        {"R", spec.R},
                        {"L", spec.L},
                        {"delta", spec.delta},
                        {"k", spec.k},
                        {"epsilon", r.epsilon},
                        {"A", r.claim_A},
                        {"kernel_mass_min", r.kernel_mass_min},
                        {"seed", seed}},
                       {{"identity_ok", r.identity_ok},
                        {"identity_max_rel_error", r.identity_max_rel_error},
                        {"random_identity_max_rel_error", worst},
                        {"claim_ok", r.claim_ok},
                        {"claim_undetermined", r.claim_undetermined},
                        {"claim_min_margin", r.claim_min_margin},
                        {"inequality_ok", r.inequality_ok},
                        {"inequality_min_margin", r.inequality_min_margin}});
}

json verify_monotone(const Config& cfg) {
    const auto& pr = cfg.problem.params;
    const auto L = assemble_nonlocal(pr.domain, pr.kernel);
    const auto D = assemble_laplacian(pr.domain);
    const auto s0 = cfg.problem.initial_state();
    const double d1 = verify_number(cfg, "delta1", 0.0), d2 = verify_number(cfg, "delta2", 0.0);
    MonotoneOptions opt;
    opt.exterior = cfg.problem.exterior_value;
    const auto res = verify_monotone_data(s0.u, s0.v, pr, L, D, d1, d2, opt);
    return verdict_doc("monotone", cfg, res.satisfied(), std::min(res.min_u, res.min_v),
                       {{"delta1", d1}, {"delta2", d2}}, {{"residual_u", res.min_u}, {"residual_v", res.min_v}});
}

json verify_nonsim(const Config& cfg) {
    auto ops = build_operators(cfg.problem.params);
    const auto r = run(cfg.problem, cfg.policy, ops);
    NonsimOptions opt;
    opt.delta1 = verify_number(cfg, "delta1", 0.0);
    opt.v0_norm = linalg::sup_norm(cfg.problem.initial_state().v);
    opt.a_constant = mass_deficit_constant(ops->nonlocal);
    const auto rep = check_nonsimultaneity_conditions(r, cfg.problem.params, opt);
    json details = {{"classification", to_string(rep.classification)},
                    {"complete", rep.complete},
                    {"exponent_ok", rep.exponent_ok},
                    {"flat_max_ratio", rep.flat_max_ratio},
                    {"notes", rep.notes}};
    if (rep.exponent) details["exponent"] = *rep.exponent;
    if (rep.expected_exponent) details["expected_exponent"] = *rep.expected_exponent;
    if (rep.necessary_condition) details["beta_gt_1_plus_p"] = *rep.necessary_condition;
    if (rep.flat_bound_ok) details["flat_bound_ok"] = *rep.flat_bound_ok;
    if (rep.envelope_min_ratio) details["envelope_min_ratio"] = *rep.envelope_min_ratio;
    double margin = -INFINITY;
    if (rep.exponent && rep.expected_exponent) {
        margin = opt.exponent_tol * std::abs(*rep.expected_exponent) - std::abs(*rep.exponent - *rep.expected_exponent);
    }
    return verdict_doc("nonsim", cfg, rep.satisfied, margin,
                       {{"delta1", opt.delta1}, {"v0_norm", opt.v0_norm}, {"a", opt.a_constant}}, details);
}

int cmd_verify(const std::string& name, const Config& cfg, std::uint64_t seed, const std::string& output,
               std::ostream& out) {
    json doc;
    if (name == "supersolution") doc = verify_supersolution(cfg);
    else if (name == "exponential") doc = verify_exponential(cfg);
    else if (name == "lower-bound") doc = verify_lower_bound(cfg);
    else if (name == "kaplan") doc = verify_kaplan(cfg);
    else if (name == "case1") doc = verify_case1(cfg);
    else if (name == "case3") doc = verify_case3(cfg, seed);
    else if (name == "monotone") doc = verify_monotone(cfg);
    else if (name == "nonsim") doc = verify_nonsim(cfg);
    else throw UsageError("unknown verifier '" + name + "'");
    emit(doc, output, out);
    return doc["satisfied"].get<bool>() ? 0 : 2;
}

int cmd_rate(const std::string& csv_path, const std::string& component, const std::string& output,
             std::ostream& out) {
    Trajectory traj;
    try {
        traj = trajectory_from_csv(read_file(csv_path));
    } catch (const ValidationError& e) {
        throw UsageError(csv_path + ": " + e.what());
    }
    const Component c = component == "v" ? Component::V : Component::U;
    const RateFit fit = fit_blowup_rate(traj, c);
    json doc = to_json(fit);
    doc["component"] = component;
    emit(doc, output, out);
    return 0;
}

int cmd_sweep(const std::string& path, const std::vector<std::string>& sets, const std::string& output,
              std::ostream& out) {
    json doc = parse_json_text(read_file(path), path);
    apply_overrides(doc, sets, ConfigKind::SweepPlan);
    if (!output.empty()) {
        doc["output_dir"] = output;
    } else if (!doc.contains("output_dir")) {
        const std::string dir = default_output_dir("");
        if (dir.empty()) throw UsageError("sweep needs output_dir, -o or NLRD_OUTPUT_DIR");
        doc["output_dir"] = dir;
    }
    SweepPlan plan;
    try {
        plan = plan_from_json(doc);
    } catch (const ValidationError& e) {
        throw UsageError(path + ": " + e.what());
    }
    const auto outcome = execute_sweep(plan);
    const auto summary = agreement_report(outcome.table);
    json report = {{"runs", plan.total_runs()},
                   {"executed", outcome.executed},
                   {"skipped", outcome.skipped},
                   {"interrupted", outcome.interrupted},
                   {"phase_csv", outcome.phase_csv_path},
                   {"violations", summary.violations},
                   {"mixed_blowups", summary.mixed_blowups},
                   {"undetermined", summary.undetermined},
                   {"summary", summary.text}};
    out << report.dump(2) << "\n";
    return outcome.interrupted || summary.violations > 0 ? 2 : 0;
}

}  // namespace

bool known_key(const std::string& path, ConfigKind kind) {
    const auto parts = split(path);
    if (parts.empty() || std::any_of(parts.begin(), parts.end(), [](const auto& s) { return s.empty(); })) {
        return false;
    }
    if (kind == ConfigKind::SweepPlan) {
        if (!kPlanKeys.count(parts[0])) return false;
        if (parts[0] == "problem") return parts.size() == 1 || known_problem_path(parts, 1);
        if (parts[0] == "policy") return known_policy_path(parts, 1);
        return parts.size() == 1;
    }
    if (parts[0] == "policy") return known_policy_path(parts, 1);
    if (parts[0] == "verify") return parts.size() == 1 || (parts.size() == 2 && kVerifyKeys.count(parts[1]));
    if (parts[0] == "continuation") return parts.size() == 1 || (parts.size() == 2 && parts[1] == "eps_schedule");
    return known_problem_path(parts, 0);
}

json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw UsageError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": parse error: " +
                         e.what());
    }
}

void apply_overrides(json& doc, const std::vector<std::string>& overrides, ConfigKind kind) {
    if (!doc.is_object()) throw UsageError("config must be a JSON object");
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("override '" + item + "' is not key=value");
        const std::string key = item.substr(0, eq);
        const std::string text = item.substr(eq + 1);
        if (!known_key(key, kind)) throw UsageError("unknown key '" + key + "'");
        json value;
        try {
            value = json::parse(text);
        } catch (const json::parse_error&) {
            value = text;
        }
        json* node = &doc;
        const auto parts = split(key);
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            json& child = (*node)[parts[i]];
            if (!child.is_object()) child = json::object();
            node = &child;
        }
        (*node)[parts.back()] = std::move(value);
    }
}

Config config_from_json(json doc) {
    if (!doc.is_object()) throw UsageError("config must be a JSON object");
    std::vector<std::string> unknown = unknown_problem_keys(doc, {"policy", "verify", "continuation"});
    if (doc.contains("policy")) {
        for (auto& k : unknown_policy_keys(doc["policy"])) unknown.push_back(std::move(k));
    }
    if (doc.contains("verify") && doc["verify"].is_object()) {
        for (const auto& [k, _] : doc["verify"].items()) {
            if (!kVerifyKeys.count(k)) unknown.push_back("verify." + k);
        }
    }
    if (doc.contains("continuation") && doc["continuation"].is_object()) {
        for (const auto& [k, _] : doc["continuation"].items()) {
            if (k != "eps_schedule") unknown.push_back("continuation." + k);
        }
    }
    if (!unknown.empty()) {
        std::string msg = "unknown key";
        msg += unknown.size() > 1 ? "s " : " ";
        for (std::size_t i = 0; i < unknown.size(); ++i) msg += (i ? ", '" : "'") + unknown[i] + "'";
        throw UsageError(msg);
    }

    Config cfg;
    std::vector<std::string> errs;
    // The continuation regularizes every member, so the base problem is
    // validated at the first level of the schedule when eps_reg is absent.
    json problem_doc = doc;
    if (!problem_doc.contains("eps_reg") && doc.contains("continuation") && doc["continuation"].is_object()) {
        const json& sched = doc["continuation"].value("eps_schedule", json::array());
        if (sched.is_array() && !sched.empty() && sched[0].is_number()) problem_doc["eps_reg"] = sched[0];
    }
    try {
        cfg.problem = problem_from_json(problem_doc);
        if (!doc.contains("eps_reg")) cfg.problem.params.eps_reg = 0.0;
    } catch (const ValidationError& e) {
        errs.emplace_back(e.what());
    }
    if (doc.contains("policy")) {
        try {
            cfg.policy = policy_from_json(doc["policy"]);
        } catch (const ValidationError& e) {
            errs.emplace_back(e.what());
        }
    }
    if (doc.contains("verify")) {
        if (!doc["verify"].is_object()) {
            errs.emplace_back("verify: expected an object");
        } else {
            for (const auto& [k, v] : doc["verify"].items()) {
                if (!v.is_number()) errs.push_back("verify." + k + ": expected a number");
            }
            cfg.verify = doc["verify"];
        }
    }
    if (doc.contains("continuation")) {
        const json& c = doc["continuation"];
        if (!c.is_object()) {
            errs.emplace_back("continuation: expected an object");
        } else if (c.contains("eps_schedule")) {
            if (!c["eps_schedule"].is_array()) {
                errs.emplace_back("continuation.eps_schedule: expected an array of numbers");
            } else {
                for (const auto& x : c["eps_schedule"]) {
                    if (!x.is_number()) {
                        errs.emplace_back("continuation.eps_schedule: expected an array of numbers");
                        break;
                    }
                    cfg.eps_schedule.push_back(x.get<double>());
                }
                for (std::size_t k = 0; k < cfg.eps_schedule.size(); ++k) {
                    if (!(cfg.eps_schedule[k] > 0) || (k > 0 && !(cfg.eps_schedule[k] < cfg.eps_schedule[k - 1]))) {
                        errs.emplace_back("continuation.eps_schedule must be positive and strictly decreasing");
                        break;
                    }
                }
            }
        }
    }
    if (!errs.empty()) {
        std::string msg;
        for (const auto& e : errs) msg += (msg.empty() ? "" : "; ") + e;
        throw UsageError("invalid config: " + msg);
    }
    cfg.doc = problem_to_json(cfg.problem);
    cfg.doc["policy"] = policy_to_json(cfg.policy);
    cfg.doc["verify"] = cfg.verify;
    if (!cfg.eps_schedule.empty()) cfg.doc["continuation"] = {{"eps_schedule", cfg.eps_schedule}};
    return cfg;
}

Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json doc = parse_json_text(read_file(path), path);
    apply_overrides(doc, overrides, ConfigKind::Problem);
    return config_from_json(std::move(doc));
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Local-nonlocal reaction-diffusion laboratory", "nlrd"};
    app.require_subcommand(1);

    std::string config, output, verifier, csv_path, component = "u";
    std::vector<std::string> sets;
    std::uint64_t seed = 20240601;

    auto common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("-c,--config", config, "JSON config file");
        if (needs_config) c->required();
        sub->add_option("--set", sets, "Override a config key (dotted path), e.g. --set alpha=3");
        sub->add_option("-o,--output", output, "Output file (directory for simulate and sweep)");
        sub->add_option("--seed", seed, "Seed for randomized checks");
    };
    auto* simulate = app.add_subcommand("simulate", "Run one problem; writes manifest JSON and trajectory CSV");
    common(simulate, true);
    auto* eigen = app.add_subcommand("eigen", "Principal eigenpairs of both operators");
    common(eigen, true);
    auto* verify = app.add_subcommand("verify", "Run a named verifier and emit a verdict JSON");
    verify->add_option("name", verifier, "Verifier")->required()->check(CLI::IsMember(kVerifiers));
    common(verify, true);
    auto* rate = app.add_subcommand("rate", "Fit a blow-up rate to a stored trajectory CSV");
    rate->add_option("csv", csv_path, "Trajectory CSV")->required();
    rate->add_option("--component", component, "u or v")->check(CLI::IsMember({"u", "v"}));
    common(rate, false);
    auto* sweep = app.add_subcommand("sweep", "Execute a sweep plan");
    common(sweep, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(load_config(config, sets), output, out);
        if (eigen->parsed()) return cmd_eigen(load_config(config, sets), output, out);
        if (verify->parsed()) return cmd_verify(verifier, load_config(config, sets), seed, output, out);
        if (rate->parsed()) return cmd_rate(csv_path, component, output, out);
        if (sweep->parsed()) return cmd_sweep(config, sets, output, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace nlrd::cli
