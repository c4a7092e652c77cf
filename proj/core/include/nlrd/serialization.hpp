#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlrd/dynamics.hpp"

namespace nlrd {

using json = nlohmann::json;

/// Problem document (alpha, beta, p, q, eps_reg, kernel, domain, init_u,
/// init_v, diffusion, reaction, exterior_value, data_shift). Missing keys take
/// defaults. `policy`, `verify` and `continuation` sections are ignored here.
/// Throws ValidationError listing every unknown key, wrong type and violated
/// invariant.
Problem problem_from_json(const json& doc);
json problem_to_json(const Problem& problem);

StepPolicy policy_from_json(const json& doc);
json policy_to_json(const StepPolicy& policy);

/// Dotted paths of keys that the problem/policy schema does not know.
/// Sections named in `extra_sections` are skipped.
std::vector<std::string> unknown_problem_keys(const json& doc, const std::vector<std::string>& extra_sections = {});
std::vector<std::string> unknown_policy_keys(const json& policy);

/// classification, T_u, T_v, exponent_u, exponent_v, events, verdicts,
/// diagnostics, policy echo and problem echo.
json manifest_json(const Problem& problem, const StepPolicy& policy, const RunResult& result);

/// FNV-1a 64-bit hash of the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string digest(const json& doc);

json to_json(const RateFit& fit);

}  // namespace nlrd
