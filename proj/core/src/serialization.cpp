#include "nlrd/serialization.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

#include "nlrd/errors.hpp"

namespace nlrd {

namespace {

const std::set<std::string> kProblemKeys = {"alpha", "beta",     "p",        "q",         "eps_reg",
                                            "kernel", "domain",  "init_u",   "init_v",    "diffusion",
                                            "reaction", "exterior_value", "data_shift"};
const std::set<std::string> kKernelKeys = {"profile", "radius", "table"};
const std::set<std::string> kDomainKeys = {"dim", "bounds", "n"};
const std::set<std::string> kInitKeys = {"shape", "amplitude", "eps_geom", "m", "values"};
const std::set<std::string> kPolicyKeys = {"dt_max",        "cfl_safety",  "reaction_target", "blowup_threshold",
                                           "bounded_threshold", "t_max",   "sample_every",    "snapshot_interval",
                                           "max_steps",     "divergence_slope"};

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

class Reader {
public:
    std::vector<std::string> errors;

    void number(const json& obj, const std::string& key, double& out, const std::string& path) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (!v.is_number()) {
            errors.push_back(path + key + ": expected a number");
            return;
        }
        out = v.get<double>();
    }

    template <class Int>
    void integer(const json& obj, const std::string& key, Int& out, const std::string& path) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (v.is_number_integer()) {
            out = static_cast<Int>(v.get<long long>());
        } else if (v.is_number_float() && v.get<double>() == std::floor(v.get<double>())) {
            out = static_cast<Int>(v.get<double>());
        } else {
            errors.push_back(path + key + ": expected an integer");
        }
    }

    void boolean(const json& obj, const std::string& key, bool& out, const std::string& path) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (!v.is_boolean()) {
            errors.push_back(path + key + ": expected true or false");
            return;
        }
        out = v.get<bool>();
    }

    bool string(const json& obj, const std::string& key, std::string& out, const std::string& path) {
        if (!obj.contains(key)) return false;
        const auto& v = obj.at(key);
        if (!v.is_string()) {
            errors.push_back(path + key + ": expected a string");
            return false;
        }
        out = v.get<std::string>();
        return true;
    }

    void numbers(const json& obj, const std::string& key, std::vector<double>& out, const std::string& path) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (!v.is_array()) {
            errors.push_back(path + key + ": expected an array of numbers");
            return;
        }
        out.clear();
        for (const auto& x : v) {
            if (!x.is_number()) {
                errors.push_back(path + key + ": expected an array of numbers");
                return;
            }
            out.push_back(x.get<double>());
        }
    }

    const json* object(const json& obj, const std::string& key, const std::string& path) {
        if (!obj.contains(key)) return nullptr;
        const auto& v = obj.at(key);
        if (!v.is_object()) {
            errors.push_back(path + key + ": expected an object");
            return nullptr;
        }
        return &v;
    }
};

void read_init(Reader& rd, const json& obj, InitialDataSpec& spec, const std::string& path) {
    std::string shape;
    if (rd.string(obj, "shape", shape, path)) {
        try {
            spec.shape = initial_shape_from_string(shape);
        } catch (const Error& e) {
            rd.errors.push_back(path + "shape: " + e.what());
        }
    }
    rd.number(obj, "amplitude", spec.amplitude, path);
    rd.number(obj, "eps_geom", spec.eps_geom, path);
    rd.number(obj, "m", spec.m, path);
    rd.numbers(obj, "values", spec.values, path);
}

json init_to_json(const InitialDataSpec& spec) {
    json j = {{"shape", to_string(spec.shape)},
              {"amplitude", spec.amplitude},
              {"eps_geom", spec.eps_geom},
              {"m", spec.m}};
    if (spec.shape == InitialShape::Custom) j["values"] = spec.values;
    return j;
}

void collect_unknown(const json& obj, const std::set<std::string>& known, const std::string& prefix,
                     std::vector<std::string>& out) {
    if (!obj.is_object()) return;
    for (const auto& [key, _] : obj.items()) {
        if (!known.count(key)) out.push_back(prefix + key);
    }
}

std::string hex64(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, x);
    return buf;
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::vector<std::string> unknown_problem_keys(const json& doc, const std::vector<std::string>& extra_sections) {
    std::vector<std::string> out;
    if (!doc.is_object()) return out;
    std::set<std::string> known = kProblemKeys;
    known.insert(extra_sections.begin(), extra_sections.end());
    collect_unknown(doc, known, "", out);
    if (doc.contains("kernel")) collect_unknown(doc["kernel"], kKernelKeys, "kernel.", out);
    if (doc.contains("domain")) collect_unknown(doc["domain"], kDomainKeys, "domain.", out);
    if (doc.contains("init_u")) collect_unknown(doc["init_u"], kInitKeys, "init_u.", out);
    if (doc.contains("init_v")) collect_unknown(doc["init_v"], kInitKeys, "init_v.", out);
    return out;
}

std::vector<std::string> unknown_policy_keys(const json& policy) {
    std::vector<std::string> out;
    collect_unknown(policy, kPolicyKeys, "policy.", out);
    return out;
}

Problem problem_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("problem document must be a JSON object");
    Reader rd;
    for (const auto& k : unknown_problem_keys(doc, {"policy", "verify", "continuation"})) {
        rd.errors.push_back("unknown key '" + k + "'");
    }
    Problem pb;
    auto& pr = pb.params;
    rd.number(doc, "alpha", pr.alpha, "");
    rd.number(doc, "beta", pr.beta, "");
    rd.number(doc, "p", pr.p, "");
    rd.number(doc, "q", pr.q, "");
    rd.number(doc, "eps_reg", pr.eps_reg, "");
    if (const json* d = rd.object(doc, "domain", "")) {
        rd.integer(*d, "dim", pr.domain.dim, "domain.");
        rd.integer(*d, "n", pr.domain.n, "domain.");
        std::vector<double> b;
        rd.numbers(*d, "bounds", b, "domain.");
        if (b.size() == 2 || b.size() == 4) {
            for (std::size_t i = 0; i < b.size(); ++i) pr.domain.bounds[i] = b[i];
        } else if (d->contains("bounds")) {
            rd.errors.emplace_back("domain.bounds: expected 2 (interval) or 4 (box) numbers");
        }
    }
    pr.kernel.dimension = pr.domain.dim;
    if (const json* k = rd.object(doc, "kernel", "")) {
        std::string profile;
        if (rd.string(*k, "profile", profile, "kernel.")) {
            try {
                pr.kernel.profile = kernel_profile_from_string(profile);
            } catch (const Error& e) {
                rd.errors.push_back(std::string("kernel.profile: ") + e.what());
            }
        }
        rd.number(*k, "radius", pr.kernel.radius, "kernel.");
        rd.numbers(*k, "table", pr.kernel.table, "kernel.");
    }
    if (const json* u = rd.object(doc, "init_u", "")) read_init(rd, *u, pb.init_u, "init_u.");
    if (const json* v = rd.object(doc, "init_v", "")) read_init(rd, *v, pb.init_v, "init_v.");
    rd.boolean(doc, "diffusion", pb.diffusion, "");
    rd.boolean(doc, "reaction", pb.reaction, "");
    rd.number(doc, "exterior_value", pb.exterior_value, "");
    rd.number(doc, "data_shift", pb.data_shift, "");

    if (rd.errors.empty()) {
        for (auto& s : pb.violations()) rd.errors.push_back(std::move(s));
    }
    if (!rd.errors.empty()) throw ValidationError(join(rd.errors));
    return pb;
}

json problem_to_json(const Problem& pb) {
    const auto& pr = pb.params;
    json kernel = {{"profile", to_string(pr.kernel.profile)}, {"radius", pr.kernel.radius}};
    if (pr.kernel.profile == KernelProfile::Custom) kernel["table"] = pr.kernel.table;
    json bounds = json::array();
    for (int i = 0; i < 2 * pr.domain.dim; ++i) bounds.push_back(pr.domain.bounds[static_cast<std::size_t>(i)]);
    return {{"alpha", pr.alpha},
            {"beta", pr.beta},
            {"p", pr.p},
            {"q", pr.q},
            {"eps_reg", pr.eps_reg},
            {"kernel", kernel},
            {"domain", {{"dim", pr.domain.dim}, {"bounds", bounds}, {"n", pr.domain.n}}},
            {"init_u", init_to_json(pb.init_u)},
            {"init_v", init_to_json(pb.init_v)},
            {"diffusion", pb.diffusion},
            {"reaction", pb.reaction},
            {"exterior_value", pb.exterior_value},
            {"data_shift", pb.data_shift}};
}

StepPolicy policy_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("policy must be a JSON object");
    Reader rd;
    for (const auto& k : unknown_policy_keys(doc)) rd.errors.push_back("unknown key '" + k + "'");
    StepPolicy p;
    rd.number(doc, "dt_max", p.dt_max, "policy.");
    rd.number(doc, "cfl_safety", p.cfl_safety, "policy.");
    rd.number(doc, "reaction_target", p.reaction_target, "policy.");
    rd.number(doc, "blowup_threshold", p.blowup_threshold, "policy.");
    rd.number(doc, "bounded_threshold", p.bounded_threshold, "policy.");
    rd.number(doc, "t_max", p.t_max, "policy.");
    rd.integer(doc, "sample_every", p.sample_every, "policy.");
    rd.number(doc, "snapshot_interval", p.snapshot_interval, "policy.");
    rd.integer(doc, "max_steps", p.max_steps, "policy.");
    rd.number(doc, "divergence_slope", p.divergence_slope, "policy.");
    if (rd.errors.empty()) {
        for (auto& s : p.violations()) rd.errors.push_back(std::move(s));
    }
    if (!rd.errors.empty()) throw ValidationError(join(rd.errors));
    return p;
}

json policy_to_json(const StepPolicy& p) {
    return {{"dt_max", p.dt_max},
            {"cfl_safety", p.cfl_safety},
            {"reaction_target", p.reaction_target},
            {"blowup_threshold", p.blowup_threshold},
            {"bounded_threshold", p.bounded_threshold},
            {"t_max", p.t_max},
            {"sample_every", p.sample_every},
            {"snapshot_interval", p.snapshot_interval},
            {"max_steps", p.max_steps},
            {"divergence_slope", p.divergence_slope}};
}

json to_json(const RateFit& f) {
    return {{"T_est", f.T_est},         {"exponent", f.exponent},         {"c", f.c},
            {"t_lo", f.t_lo},           {"t_hi", f.t_hi},                 {"rms_residual", f.rms_residual},
            {"samples_used", f.samples_used}};
}

json manifest_json(const Problem& problem, const StepPolicy& policy, const RunResult& r) {
    json events = json::array();
    for (const auto& e : r.trajectory.events) {
        json ev = {{"kind", to_string(e.kind)}, {"t", e.t}};
        if (e.kind == EventKind::PositivityClamped) ev["count"] = e.count;
        events.push_back(ev);
    }
    json verdicts = json::object();
    for (const auto& [name, v] : r.verdicts) verdicts[name] = {{"satisfied", v.satisfied}, {"residual", v.residual}};
    json problem_doc = problem_to_json(problem);
    json out = {{"classification", to_string(r.classification)},
                {"T_u", optional_number(r.T_u)},
                {"T_v", optional_number(r.T_v)},
                {"exponent_u", optional_number(r.exponent_u)},
                {"exponent_v", optional_number(r.exponent_v)},
                {"max_u", r.max_u},
                {"max_v", r.max_v},
                {"partner_slope", optional_number(r.partner_slope)},
                {"t_final", r.trajectory.final_state.t},
                {"steps", r.trajectory.step_sizes.size()},
                {"samples", r.trajectory.samples.size()},
                {"events", events},
                {"verdicts", verdicts},
                {"diagnostics", r.diagnostics},
                {"simultaneity_rule",
                 "both thresholds crossed, or partner log-log slope against the leader's fitted T below "
                 "-divergence_slope"},
                {"policy", policy_to_json(policy)},
                {"problem", problem_doc},
                {"problem_digest", digest(problem_doc)}};
    if (r.fit_u) out["fit_u"] = to_json(*r.fit_u);
    if (r.fit_v) out["fit_v"] = to_json(*r.fit_v);
    return out;
}

std::string digest(const json& doc) {
    const std::string text = doc.dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return hex64(h);
}

std::size_t Trajectory::clamp_count() const {
    std::size_t n = 0;
    for (const auto& e : events) {
        if (e.kind == EventKind::PositivityClamped) n += e.count;
    }
    return n;
}

bool Trajectory::has_event(EventKind kind) const {
    for (const auto& e : events) {
        if (e.kind == kind) return true;
    }
    return false;
}

std::string to_string(EventKind kind) {
    switch (kind) {
        case EventKind::UThresholdCrossed: return "UThresholdCrossed";
        case EventKind::VThresholdCrossed: return "VThresholdCrossed";
        case EventKind::ReachedTmax: return "ReachedTmax";
        case EventKind::PositivityClamped: return "PositivityClamped";
        case EventKind::StiffnessFailure: return "StiffnessFailure";
    }
    return "Unknown";
}

std::string trajectory_to_csv(const Trajectory& traj) {
    std::string out = "t,max_u,max_v,kaplan_u,kaplan_v,dt\n";
    for (const auto& s : traj.samples) {
        out += fmt(s.t) + ',' + fmt(s.max_u) + ',' + fmt(s.max_v) + ',' + fmt(s.kaplan_u) + ',' + fmt(s.kaplan_v) +
               ',' + fmt(s.dt) + '\n';
    }
    return out;
}

Trajectory trajectory_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("trajectory CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,max_u,max_v,kaplan_u,kaplan_v,dt") {
        throw ValidationError("trajectory CSV line 1: expected header t,max_u,max_v,kaplan_u,kaplan_v,dt");
    }
    Trajectory traj;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double vals[6];
        const char* p = line.c_str();
        for (int k = 0; k < 6; ++k) {
            char* end = nullptr;
            vals[k] = std::strtod(p, &end);
            if (end == p) {
                throw ValidationError("trajectory CSV line " + std::to_string(lineno) + ", field " +
                                      std::to_string(k + 1) + ": expected a number");
            }
            p = end;
            if (k < 5) {
                if (*p != ',') {
                    throw ValidationError("trajectory CSV line " + std::to_string(lineno) + ": expected 6 fields");
                }
                ++p;
            }
        }
        if (*p != '\0') throw ValidationError("trajectory CSV line " + std::to_string(lineno) + ": trailing data");
        Sample s{vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], traj.samples.size()};
        if (!traj.samples.empty() && !(s.t > traj.samples.back().t)) {
            throw ValidationError("trajectory CSV line " + std::to_string(lineno) + ": times must increase");
        }
        traj.samples.push_back(s);
    }
    return traj;
}

}  // namespace nlrd
