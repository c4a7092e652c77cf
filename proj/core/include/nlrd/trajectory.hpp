#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nlrd/model.hpp"

namespace nlrd {

enum class Component { U, V };

/// One recorded point of a run. `kaplan_*` are the averages of u and v
/// against the principal Laplacian eigenfunction normalized to unit sum.
struct Sample {
    double t = 0.0;
    double max_u = 0.0;
    double max_v = 0.0;
    double kaplan_u = 0.0;
    double kaplan_v = 0.0;
    double dt = 0.0;         // step that produced this sample (0 for the initial one)
    std::size_t step = 0;    // accepted-step index
};

enum class EventKind { UThresholdCrossed, VThresholdCrossed, ReachedTmax, PositivityClamped, StiffnessFailure };

struct Event {
    EventKind kind = EventKind::ReachedTmax;
    double t = 0.0;
    std::size_t count = 0;  // clamped entries for PositivityClamped
};

/// Full nodal state at a given accepted step.
struct Snapshot {
    std::size_t step = 0;
    CoupledState state;
};

/// Time series of one run. `step_sizes[k]` is the dt of accepted step k+1,
/// which lets verifiers rebuild products over every step even when samples
/// are decimated.
struct Trajectory {
    std::vector<Sample> samples;
    std::vector<Event> events;
    std::vector<double> step_sizes;
    std::vector<Snapshot> snapshots;
    CoupledState final_state;

    std::size_t clamp_count() const;
    bool has_event(EventKind kind) const;
};

std::string to_string(EventKind kind);

/// CSV with header `t,max_u,max_v,kaplan_u,kaplan_v,dt`.
std::string trajectory_to_csv(const Trajectory& traj);
/// Parses the CSV written by trajectory_to_csv; step indices are assigned
/// sequentially. Throws ValidationError on malformed input.
Trajectory trajectory_from_csv(const std::string& text);

}  // namespace nlrd
