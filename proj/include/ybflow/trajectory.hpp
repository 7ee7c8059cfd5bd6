#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "ybflow/grid.hpp"

namespace ybflow {

enum class RunOutcome { completed, extinction, step_failure };

inline const char* to_string(RunOutcome o) {
    switch (o) {
        case RunOutcome::completed: return "completed";
        case RunOutcome::extinction: return "extinction";
        case RunOutcome::step_failure: return "step_failure";
    }
    return "unknown";
}

struct TrajectoryMeta {
    int n = 0;
    double dt = 0.0;
    double snapshot_stride = 0.0;
    std::string solver;
    RunOutcome outcome = RunOutcome::completed;
    double halted_at = 0.0;  // time of failure when outcome != completed
};

// Time-indexed sequence of Fields on one shared grid.
struct Trajectory {
    std::vector<double> times;
    std::vector<Field> fields;
    std::vector<Field> time_derivs;  // optional, same indexing when present
    TrajectoryMeta meta;

    size_t size() const { return times.size(); }
    bool has_time_derivs() const { return time_derivs.size() == times.size(); }
    GridPtr grid() const { return fields.empty() ? nullptr : fields.front().grid; }

    void push(double t, Field f) {
        if (!times.empty() && !(t > times.back()))
            throw std::invalid_argument("Trajectory: times must be strictly increasing");
        times.push_back(t);
        fields.push_back(std::move(f));
    }

    void push(double t, Field f, Field fdot) {
        push(t, std::move(f));
        time_derivs.push_back(std::move(fdot));
    }

    // index of the last snapshot with time <= t (requires nonempty)
    size_t index_at(double t) const {
        if (times.empty()) throw std::out_of_range("Trajectory::index_at on empty trajectory");
        auto it = std::upper_bound(times.begin(), times.end(), t);
        if (it == times.begin()) return 0;
        return size_t(it - times.begin()) - 1;
    }

    // linear interpolation in time; clamps to the covered range
    Field at_time(double t) const {
        if (times.empty()) throw std::out_of_range("Trajectory::at_time on empty trajectory");
        if (t <= times.front()) return fields.front();
        if (t >= times.back()) return fields.back();
        size_t i = index_at(t);
        const double t0 = times[i], t1 = times[i + 1];
        const double a = (t - t0) / (t1 - t0);
        Field out = fields[i];
        for (size_t k = 0; k < out.values.size(); ++k)
            out.values[k] = (1.0 - a) * fields[i].values[k] + a * fields[i + 1].values[k];
        return out;
    }
};

}  // namespace ybflow
