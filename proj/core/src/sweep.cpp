#include "nlrd/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "nlrd/errors.hpp"

namespace nlrd {

namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path) {
        if (c == '.') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

json* resolve(json& doc, const std::vector<std::string>& parts, std::size_t from) {
    json* node = &doc;
    for (std::size_t i = from; i < parts.size(); ++i) {
        if (!node->is_object() || !node->contains(parts[i])) return nullptr;
        node = &(*node)[parts[i]];
    }
    return node;
}

bool is_policy_path(const std::string& name) { return name.rfind("policy.", 0) == 0; }

json canonical_base(const SweepPlan& plan) { return problem_to_json(problem_from_json(plan.base_problem)); }

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt(const std::optional<double>& x) { return x ? fmt(*x) : std::string(); }

std::optional<double> opt_number(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_number()) return std::nullopt;
    return doc[key].get<double>();
}

double number_at(const json& doc, const std::vector<std::string>& path, double fallback) {
    const json* node = &doc;
    for (const auto& p : path) {
        if (!node->is_object() || !node->contains(p)) return fallback;
        node = &(*node)[p];
    }
    return node->is_number() ? node->get<double>() : fallback;
}

std::string key_for(const json& problem_doc, const json& policy_doc) {
    return digest(json{{"problem", problem_doc}, {"policy", policy_doc}});
}

void write_atomic(const fs::path& path, const std::string& text) {
    std::ostringstream tid;
    tid << std::this_thread::get_id();
    const fs::path tmp = path.string() + ".tmp." + tid.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
        if (!out) throw Error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::optional<json> load_valid_manifest(const fs::path& path, const std::string& key) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    try {
        json m = json::parse(in);
        if (!m.is_object() || !m.contains("classification") || !m["classification"].is_string()) return std::nullopt;
        classification_from_string(m["classification"].get<std::string>());
        if (!m.contains("problem") || !m.contains("policy")) return std::nullopt;
        if (key_for(m["problem"], m["policy"]) != key) return std::nullopt;
        return m;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

class OperatorCache {
public:
    std::shared_ptr<const OperatorSet> get(const Problem& pb) {
        const json id = problem_to_json(pb);
        const std::string key = digest(json{{"kernel", id["kernel"]}, {"domain", id["domain"]}});
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        auto ops = build_operators(pb.params);
        std::lock_guard<std::mutex> lock(mu_);
        return cache_.emplace(key, std::move(ops)).first->second;
    }

private:
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<const OperatorSet>> cache_;
};

json run_point(const json& problem_doc, const StepPolicy& policy, bool retry, OperatorCache& cache) {
    const json policy_doc = policy_to_json(policy);
    Problem pb;
    try {
        pb = problem_from_json(problem_doc);
    } catch (const Error& e) {
        return json{{"classification", to_string(Classification::Undetermined)},
                    {"diagnostics", {std::string("invalid problem: ") + e.what()}},
                    {"policy", policy_doc},
                    {"problem", problem_doc},
                    {"problem_digest", digest(problem_doc)}};
    }
    auto attempt = [&](const StepPolicy& pol) -> std::pair<RunResult, std::string> {
        try {
            return {run(pb, pol, cache.get(pb)), {}};
        } catch (const Error& e) {
            RunResult r;
            r.classification = Classification::Undetermined;
            r.diagnostics.push_back(e.what());
            return {std::move(r), e.what()};
        }
    };
    auto [result, err] = attempt(policy);
    bool retried = false;
    if (result.classification == Classification::Undetermined && retry) {
        StepPolicy tight = policy;
        tight.dt_max = policy.dt_max / 10.0;
        auto second = attempt(tight);
        second.first.diagnostics.insert(second.first.diagnostics.begin(),
                                        "retried with dt_max/10 after an Undetermined first attempt");
        result = std::move(second.first);
        retried = true;
    }
    json m = manifest_json(pb, policy, result);
    m["retried"] = retried;
    return m;
}

}  // namespace

std::size_t SweepPlan::total_runs() const {
    std::size_t n = axes.empty() ? 0 : 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

std::vector<std::string> SweepPlan::violations() const {
    std::vector<std::string> out;
    if (axes.empty()) out.emplace_back("axes must be nonempty");
    if (parallelism < 1) out.emplace_back("parallelism must be >= 1");
    if (output_dir.empty()) out.emplace_back("output_dir must be set");
    for (const auto& s : policy.violations()) out.push_back(s);
    json base;
    try {
        base = canonical_base(*this);
    } catch (const Error& e) {
        out.push_back(std::string("problem: ") + e.what());
        return out;
    }
    const json pol = policy_to_json(policy);
    for (const auto& a : axes) {
        if (a.values.empty()) out.push_back("axis '" + a.name + "' has no values");
        json copy = is_policy_path(a.name) ? json{{"policy", pol}} : base;
        const json* node = resolve(copy, split_path(a.name), 0);
        if (!node || !node->is_number()) {
            out.push_back("axis '" + a.name + "' does not name a numeric field of the problem document");
        }
    }
    return out;
}

SweepPlan plan_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("sweep plan must be a JSON object");
    std::vector<std::string> errs;
    static const std::vector<std::string> known = {"axes",       "problem",   "policy",           "output_dir",
                                                   "parallelism", "stop_after", "retry_undetermined"};
    for (const auto& [k, _] : doc.items()) {
        if (std::find(known.begin(), known.end(), k) == known.end()) errs.push_back("unknown key '" + k + "'");
    }
    SweepPlan plan;
    if (doc.contains("axes")) {
        if (!doc["axes"].is_array()) {
            errs.emplace_back("axes: expected an array of {name, values}");
        } else {
            for (const auto& a : doc["axes"]) {
                if (!a.is_object() || !a.contains("name") || !a["name"].is_string() || !a.contains("values") ||
                    !a["values"].is_array()) {
                    errs.emplace_back("axes: every entry needs a string name and a values array");
                    continue;
                }
                SweepAxis ax;
                ax.name = a["name"].get<std::string>();
                for (const auto& v : a["values"]) {
                    if (!v.is_number()) {
                        errs.push_back("axis '" + ax.name + "': values must be numbers");
                        break;
                    }
                    ax.values.push_back(v.get<double>());
                }
                for (const auto& [k, _] : a.items()) {
                    if (k != "name" && k != "values") errs.push_back("axes: unknown key '" + k + "'");
                }
                plan.axes.push_back(std::move(ax));
            }
        }
    }
    if (doc.contains("problem")) plan.base_problem = doc["problem"];
    if (doc.contains("policy")) {
        try {
            plan.policy = policy_from_json(doc["policy"]);
        } catch (const Error& e) {
            errs.emplace_back(e.what());
        }
    }
    if (doc.contains("output_dir")) {
        if (doc["output_dir"].is_string()) {
            plan.output_dir = doc["output_dir"].get<std::string>();
        } else {
            errs.emplace_back("output_dir: expected a string");
        }
    }
    if (doc.contains("parallelism")) {
        if (doc["parallelism"].is_number_integer()) {
            plan.parallelism = doc["parallelism"].get<int>();
        } else {
            errs.emplace_back("parallelism: expected an integer");
        }
    }
    if (doc.contains("stop_after")) {
        if (doc["stop_after"].is_number_integer()) {
            plan.stop_after = doc["stop_after"].get<long>();
        } else {
            errs.emplace_back("stop_after: expected an integer");
        }
    }
    if (doc.contains("retry_undetermined")) {
        if (doc["retry_undetermined"].is_boolean()) {
            plan.retry_undetermined = doc["retry_undetermined"].get<bool>();
        } else {
            errs.emplace_back("retry_undetermined: expected true or false");
        }
    }
    if (errs.empty()) errs = plan.violations();
    if (!errs.empty()) throw ValidationError(join(errs));
    return plan;
}

json plan_to_json(const SweepPlan& plan) {
    json axes = json::array();
    for (const auto& a : plan.axes) axes.push_back({{"name", a.name}, {"values", a.values}});
    return {{"axes", axes},
            {"problem", plan.base_problem},
            {"policy", policy_to_json(plan.policy)},
            {"output_dir", plan.output_dir},
            {"parallelism", plan.parallelism},
            {"stop_after", plan.stop_after},
            {"retry_undetermined", plan.retry_undetermined}};
}

std::pair<json, StepPolicy> sweep_point(const SweepPlan& plan, const std::vector<double>& tuple) {
    if (tuple.size() != plan.axes.size()) throw ContractViolation("tuple length differs from the axis count");
    json doc = canonical_base(plan);
    json pol = policy_to_json(plan.policy);
    for (std::size_t k = 0; k < tuple.size(); ++k) {
        const auto& name = plan.axes[k].name;
        const auto parts = split_path(name);
        json* node = is_policy_path(name) ? resolve(pol, parts, 1) : resolve(doc, parts, 0);
        if (!node) throw ValidationError("axis '" + name + "' does not resolve");
        if (node->is_number_integer()) {
            *node = static_cast<long long>(std::llround(tuple[k]));
        } else {
            *node = tuple[k];
        }
    }
    return {doc, policy_from_json(pol)};
}

std::string run_key(const Problem& problem, const StepPolicy& policy) {
    return key_for(problem_to_json(problem), policy_to_json(policy));
}

PhaseRecord phase_record(const json& m) {
    PhaseRecord r;
    const json& pb = m.at("problem");
    r.alpha = number_at(pb, {"alpha"}, 1.0);
    r.beta = number_at(pb, {"beta"}, 1.0);
    r.p = number_at(pb, {"p"}, 1.0);
    r.q = number_at(pb, {"q"}, 1.0);
    r.amp_u = number_at(pb, {"init_u", "amplitude"}, 1.0);
    r.amp_v = number_at(pb, {"init_v", "amplitude"}, 1.0);
    SystemParams sp;
    sp.alpha = r.alpha;
    sp.beta = r.beta;
    sp.p = r.p;
    sp.q = r.q;
    r.kappa = kappa(sp);
    r.predicted = classify_region(sp);
    r.classification = classification_from_string(m.at("classification").get<std::string>());
    r.T_u = opt_number(m, "T_u");
    r.T_v = opt_number(m, "T_v");
    r.exponent_u = opt_number(m, "exponent_u");
    r.exponent_v = opt_number(m, "exponent_v");
    r.agreement = r.predicted != PredictedRegion::AllGlobal || r.classification == Classification::Global;
    r.key = key_for(m.at("problem"), m.at("policy"));
    return r;
}

std::string phase_csv(const std::vector<PhaseRecord>& table) {
    std::string out = "alpha,beta,p,q,amp_u,amp_v,kappa,predicted,class,T_u,T_v,exp_u,exp_v,agree\n";
    for (const auto& r : table) {
        out += fmt(r.alpha) + ',' + fmt(r.beta) + ',' + fmt(r.p) + ',' + fmt(r.q) + ',' + fmt(r.amp_u) + ',' +
               fmt(r.amp_v) + ',' + fmt(r.kappa) + ',' + to_string(r.predicted) + ',' + to_string(r.classification) +
               ',' + fmt(r.T_u) + ',' + fmt(r.T_v) + ',' + fmt(r.exponent_u) + ',' + fmt(r.exponent_v) + ',' +
               (r.agreement ? "true" : "false") + '\n';
    }
    return out;
}

SweepOutcome execute_sweep(const SweepPlan& plan) {
    if (auto errs = plan.violations(); !errs.empty()) throw ValidationError(join(errs));
    const fs::path root(plan.output_dir);
    const fs::path runs = root / "runs";
    std::error_code ec;
    fs::create_directories(runs, ec);
    {
        const fs::path probe = runs / ".write_probe";
        std::ofstream out(probe);
        if (ec || !out) throw Error("output directory '" + plan.output_dir + "' is not writable");
        out.close();
        fs::remove(probe, ec);
    }

    // cartesian product, first axis slowest
    std::vector<std::vector<double>> tuples(1);
    for (const auto& a : plan.axes) {
        std::vector<std::vector<double>> next;
        for (const auto& t : tuples) {
            for (double v : a.values) {
                auto e = t;
                e.push_back(v);
                next.push_back(std::move(e));
            }
        }
        tuples = std::move(next);
    }

    struct Task {
        json problem_doc;
        StepPolicy policy;
        std::string key;
    };
    std::vector<Task> tasks;
    tasks.reserve(tuples.size());
    for (const auto& t : tuples) {
        auto [doc, pol] = sweep_point(plan, t);
        std::string key = key_for(doc, policy_to_json(pol));
        tasks.push_back({std::move(doc), pol, std::move(key)});
    }

    SweepOutcome outcome;
    std::vector<std::optional<json>> manifests(tasks.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        manifests[i] = load_valid_manifest(runs / (tasks[i].key + ".json"), tasks[i].key);
        if (manifests[i]) {
            ++outcome.skipped;
        } else {
            pending.push_back(i);
        }
    }

    OperatorCache cache;
    std::atomic<std::size_t> cursor{0};
    std::atomic<long> started{0};
    std::atomic<bool> stopped{false};
    std::mutex error_mu;
    std::string first_error;
    auto worker = [&] {
        for (;;) {
            if (plan.stop_after >= 0 && started.fetch_add(1) >= plan.stop_after) {
                stopped = true;
                return;
            }
            const std::size_t k = cursor.fetch_add(1);
            if (k >= pending.size()) return;
            const std::size_t i = pending[k];
            try {
                json m = run_point(tasks[i].problem_doc, tasks[i].policy, plan.retry_undetermined, cache);
                write_atomic(runs / (tasks[i].key + ".json"), m.dump(2) + "\n");
                manifests[i] = std::move(m);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (first_error.empty()) first_error = e.what();
            }
        }
    };
    const auto nthreads = static_cast<std::size_t>(std::max(1, std::min<int>(plan.parallelism,
                                                                             static_cast<int>(pending.size()))));
    if (!pending.empty()) {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (!first_error.empty()) throw Error("sweep I/O failure: " + first_error);

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!manifests[i]) {
            outcome.interrupted = true;
            continue;
        }
        if (std::find(pending.begin(), pending.end(), i) != pending.end()) ++outcome.executed;
        PhaseRecord rec = phase_record(*manifests[i]);
        rec.tuple = tuples[i];
        outcome.table.push_back(std::move(rec));
    }
    outcome.interrupted = outcome.interrupted || (stopped && outcome.table.size() < tasks.size());
    std::stable_sort(outcome.table.begin(), outcome.table.end(),
                     [](const PhaseRecord& a, const PhaseRecord& b) { return a.tuple < b.tuple; });
    if (!outcome.interrupted) {
        const fs::path csv = root / "phase.csv";
        write_atomic(csv, phase_csv(outcome.table));
        outcome.phase_csv_path = csv.string();
    }
    return outcome;
}

AgreementSummary agreement_report(const std::vector<PhaseRecord>& table) {
    AgreementSummary s;
    s.rows = table.size();
    for (const auto& r : table) {
        const bool blowup = r.classification == Classification::UBlowsUpOnly ||
                            r.classification == Classification::VBlowsUpOnly ||
                            r.classification == Classification::Simultaneous;
        if (r.classification == Classification::Undetermined) ++s.undetermined;
        if (r.predicted == PredictedRegion::AllGlobal) {
            ++s.all_global_rows;
            if (r.classification != Classification::Global) {
                ++s.violations;
                s.violating.push_back(r);
            }
        } else if (blowup) {
            ++s.mixed_blowups;
        } else if (r.classification == Classification::Global) {
            ++s.mixed_globals;
        }
    }
    std::ostringstream out;
    out << "rows: " << s.rows << "\n"
        << "AllGlobal-predicted rows: " << s.all_global_rows << "\n"
        << "violations (AllGlobal prediction, non-Global outcome): " << s.violations << "\n"
        << "Mixed rows with blow-up: " << s.mixed_blowups << "\n"
        << "Mixed rows with Global outcome: " << s.mixed_globals << "\n"
        << "Undetermined rows: " << s.undetermined << "\n";
    for (const auto& r : s.violating) {
        out << "  contradiction: alpha=" << fmt(r.alpha) << " beta=" << fmt(r.beta) << " p=" << fmt(r.p)
            << " q=" << fmt(r.q) << " amp_u=" << fmt(r.amp_u) << " amp_v=" << fmt(r.amp_v) << " -> "
            << to_string(r.classification) << "\n";
    }
    s.text = out.str();
    return s;
}

}  // namespace nlrd
