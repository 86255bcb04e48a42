#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mmapq/model.hpp"

namespace mmapq {

enum class PhaseReset { keep, reset };

struct SimOptions {
    double horizon = 50.0;
    int replications = 1000;
    std::uint64_t seed = 1;
    // evaluation points for empirical transforms (same mark for every type /
    // component)
    std::vector<double> pgf_z;
    std::vector<double> lst_s;
    // per-type retention probabilities; empty disables thinning
    std::vector<double> thinning;
    // whether the MMAP phase survives a catastrophe or is redrawn from the
    // stationary law of the new state's generator
    PhaseReset phase_reset = PhaseReset::keep;
    std::uint64_t event_cap = 50'000'000;  // per replication
    double stat_window_fraction = 0.5;     // time averages over [f*T, T]
    int threads = 0;                       // 0 = hardware concurrency
    std::optional<int> fixed_initial_phase;
};

struct Estimate {
    std::string quantity;
    int type_index = -1;  // -1: not type-specific
    double t = std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    double se = 0.0;
    int reps = 0;  // replications contributing
};

struct EstimateSet {
    std::vector<Estimate> items;
    std::uint64_t seed = 0;
    int replications = 0;
    std::uint64_t total_events = 0;
    std::uint64_t conservation_violations = 0;

    const Estimate* find(const std::string& quantity, int type_index = -1) const;
};

// R independent replications of the full model: MMAP arrivals modulated by
// the phase process, per-type service, resource accumulation, semi-Markov
// environment transitions that flush every customer. Deterministic for a
// fixed (model, options) pair regardless of thread count.
EstimateSet simulate(const ValidatedModel& model, const SimOptions& options);

struct AnalyticValue {
    std::string quantity;
    int type_index = -1;
    double t = std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
};

struct ComparisonRow {
    AnalyticValue analytic;
    double estimate = 0.0;
    double se = 0.0;
    double z = 0.0;
    bool pass = false;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    bool all_pass = true;
};

// z-scores (analytic - estimate) / se per quantity; LabelMismatch when an
// analytic row has no matching estimate.
ComparisonReport compare(const EstimateSet& estimates,
                         const std::vector<AnalyticValue>& analytic,
                         double z_threshold = 3.0);

}  // namespace mmapq
