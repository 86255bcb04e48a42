#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmapq/simulator.hpp"
#include "mmapq/transient.hpp"

namespace mmapq {

struct RunRequest {
    enum class Command { analyze, simulate, compare };
    enum class Format { csv, json };

    Command command = Command::analyze;
    std::string model_path;
    std::optional<double> horizon;  // grid overrides
    std::optional<double> step;
    std::vector<double> z_points = {0.3, 0.6, 0.9};
    std::vector<double> s_points = {0.5, 1.0};
    int reps = 10000;
    std::uint64_t seed = 1;
    std::string output_path;  // empty: standard output
    Format format = Format::csv;
    Method method = Method::ode;
    PhaseReset phase_reset = PhaseReset::keep;
    double z_threshold = 3.0;
    int threads = 0;
};

// Executes one command. Returns the process exit status: 0 on success, 1 when
// a comparison fails the z-threshold, 2 on model validation/load errors.
int run(const RunRequest& request, std::ostream& out, std::ostream& err);

}  // namespace mmapq
