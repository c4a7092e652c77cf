#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlrd/dynamics.hpp"
#include "nlrd/serialization.hpp"

namespace nlrd::cli {

/// Bad flags, unknown keys or an unreadable/malformed config. Exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ConfigKind { Problem, SweepPlan };

/// Problem config: problem keys plus `policy`, `verify` and `continuation`.
struct Config {
    json doc;  // merged document with defaults applied
    Problem problem;
    StepPolicy policy;
    json verify = json::object();
    std::vector<double> eps_schedule;
};

/// Dotted key accepted by `--set` for the given config kind.
bool known_key(const std::string& path, ConfigKind kind);

/// Parses JSON text; malformed text raises UsageError with line and column.
json parse_json_text(const std::string& text, const std::string& origin);

/// Applies `key=value` overrides (value parsed as JSON, else taken as a string).
/// Unknown keys raise UsageError naming the key.
void apply_overrides(json& doc, const std::vector<std::string>& overrides, ConfigKind kind);

/// Reads, merges and validates a problem config. Every violated invariant is listed.
Config load_config(const std::string& path, const std::vector<std::string>& overrides);
Config config_from_json(json doc);

/// Entry point: returns the process exit code (0 ok, 1 usage, 2 failed or
/// Undetermined verdict).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nlrd::cli
