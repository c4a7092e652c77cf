#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlrd/dynamics.hpp"
#include "nlrd/serialization.hpp"

namespace nlrd {

/// One swept parameter: a dotted path into the problem document
/// (e.g. `alpha`, `init_u.amplitude`) or into the policy (`policy.t_max`).
struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepPlan {
    std::vector<SweepAxis> axes;
    json base_problem = json::object();
    StepPolicy policy{};
    std::string output_dir;
    int parallelism = 1;
    long stop_after = -1;  // stop after this many new runs (interruption drill); -1 runs everything
    bool retry_undetermined = true;

    std::size_t total_runs() const;
    std::vector<std::string> violations() const;
};

/// {axes: [{name, values}], problem, policy, output_dir, parallelism, stop_after, retry_undetermined}.
SweepPlan plan_from_json(const json& doc);
json plan_to_json(const SweepPlan& plan);

struct PhaseRecord {
    std::vector<double> tuple;  // axis values in axis order
    double alpha = 0, beta = 0, p = 0, q = 0, amp_u = 0, amp_v = 0;
    double kappa = 0;
    PredictedRegion predicted = PredictedRegion::Mixed;
    Classification classification = Classification::Undetermined;
    std::optional<double> T_u, T_v, exponent_u, exponent_v;
    bool agreement = true;
    std::string key;  // manifest file stem
};

struct SweepOutcome {
    std::vector<PhaseRecord> table;  // sorted by tuple
    std::size_t executed = 0;
    std::size_t skipped = 0;
    bool interrupted = false;
    std::string phase_csv_path;  // empty when interrupted
};

/// Problem document for one tuple of the plan (policy overrides go to `policy`).
std::pair<json, StepPolicy> sweep_point(const SweepPlan& plan, const std::vector<double>& tuple);

/// Manifest stem: digest of {problem, policy}.
std::string run_key(const Problem& problem, const StepPolicy& policy);

/// Runs every tuple not already backed by a valid manifest in
/// `output_dir/runs/`, then rebuilds `output_dir/phase.csv` from the manifests.
/// Throws Error when the output directory cannot be written.
SweepOutcome execute_sweep(const SweepPlan& plan);

/// Columns alpha,beta,p,q,amp_u,amp_v,kappa,predicted,class,T_u,T_v,exp_u,exp_v,agree.
std::string phase_csv(const std::vector<PhaseRecord>& table);

/// Builds a record from a run manifest.
PhaseRecord phase_record(const json& manifest);

struct AgreementSummary {
    std::size_t rows = 0;
    std::size_t all_global_rows = 0;
    std::size_t violations = 0;          // AllGlobal prediction with a non-Global outcome
    std::size_t mixed_blowups = 0;       // blow-up witnessed where both behaviors are predicted
    std::size_t mixed_globals = 0;
    std::size_t undetermined = 0;
    std::vector<PhaseRecord> violating;
    std::string text;
};

AgreementSummary agreement_report(const std::vector<PhaseRecord>& table);

}  // namespace nlrd
