#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "mmapq/distribution.hpp"
#include "mmapq/errors.hpp"
#include "mmapq/grid.hpp"

namespace mmapq {

// Batch label h = (h_1..h_K), nonnegative, not all zero.
using BatchLabel = std::vector<int>;

// Characteristic matrices of one environment state's marked MAP.
struct MmapStateBlock {
    Eigen::MatrixXd D0;
    std::vector<Eigen::MatrixXd> Dh;  // aligned with MmapSpec::batch_labels
};

struct MmapSpec {
    int phase_count = 1;  // m
    int type_count = 1;   // K
    std::vector<BatchLabel> batch_labels;
    std::vector<MmapStateBlock> states;  // one block per environment state
};

// One semi-Markov kernel entry: Q_ij(t) = prob * dist.cdf(t).
struct SmKernelEntry {
    int from = 0;
    int to = 0;
    double prob = 1.0;
    Distribution dist = Distribution::exponential(1.0);
};

struct Environment {
    int state_count = 1;
    std::vector<double> initial;  // p0 over states
    std::vector<SmKernelEntry> kernel;
};

// Per-type service laws (state-dependent) and resource laws (per component;
// the model file fixes one law set per type, shared across states).
struct ServiceResources {
    std::vector<std::vector<Distribution>> service;             // [type][state]
    std::vector<std::vector<Distribution>> arrival_resource;    // [type][component]
    std::vector<std::vector<Distribution>> departure_resource;  // [type][component]
};

struct NumericSpec {
    double horizon = 10.0;
    double step = 0.01;
    double tail_epsilon = 1e-10;  // survival level for infinite-horizon truncation
};

struct ModelConfig {
    MmapSpec mmap;
    Environment environment;
    ServiceResources service_resources;
    std::vector<int> initial_customers;  // h0 per type
    NumericSpec numeric;
};

// Structural checks; returns the complete list of violations (empty == valid).
std::vector<Violation> validate(const ModelConfig& cfg);

// Immutable model with derived constants (full generators, embedded chain,
// mean sojourns). Safe to share across threads.
class ValidatedModel {
  public:
    static ValidatedModel create(ModelConfig cfg);  // throws ModelError

    const ModelConfig& config() const { return cfg_; }
    int phase_count() const { return cfg_.mmap.phase_count; }
    int type_count() const { return cfg_.mmap.type_count; }
    int state_count() const { return cfg_.environment.state_count; }
    int resource_dim() const {
        return static_cast<int>(cfg_.service_resources.arrival_resource.front().size());
    }
    Grid grid() const { return Grid::over(cfg_.numeric.horizon, cfg_.numeric.step); }
    double tail_epsilon() const { return cfg_.numeric.tail_epsilon; }

    const Eigen::MatrixXd& D0(int state) const { return cfg_.mmap.states[state].D0; }
    const Eigen::MatrixXd& Dh(int state, int batch) const {
        return cfg_.mmap.states[state].Dh[batch];
    }
    const std::vector<BatchLabel>& batch_labels() const { return cfg_.mmap.batch_labels; }
    const Eigen::MatrixXd& D(int state) const { return full_generator_[state]; }

    // environment
    const std::vector<double>& initial_env() const { return cfg_.environment.initial; }
    const Eigen::MatrixXd& embedded_chain() const { return embedded_; }
    double mean_sojourn(int state) const { return mean_sojourn_[state]; }
    double sojourn_cdf(int state, double t) const;
    double sojourn_cdf_left(int state, double t) const;
    double sojourn_survival_quantile(int state, double eps) const;
    // indices of kernel entries leaving `state`
    const std::vector<int>& kernel_from(int state) const { return kernel_from_[state]; }

    // service and resources
    const Distribution& service(int type, int state) const {
        return cfg_.service_resources.service[type][state];
    }
    double service_cdf(int type, int state, double t, bool left = false) const {
        const auto& b = service(type, state);
        return left ? b.cdf_left(t) : b.cdf(t);
    }
    const std::vector<Distribution>& arrival_resource(int type) const {
        return cfg_.service_resources.arrival_resource[type];
    }
    const std::vector<Distribution>& departure_resource(int type) const {
        return cfg_.service_resources.departure_resource[type];
    }
    // product-form joint LSTs F̃_ri(s1), G̃_ri(s2); state kept in the signature
    // even though the file schema shares resource laws across states
    double arrival_lst(int type, int state, std::span<const double> s) const;
    double departure_lst(int type, int state, std::span<const double> s) const;
    double arrival_resource_mean(int type, int state, int component) const {
        (void)state;
        return cfg_.service_resources.arrival_resource[type][component].mean();
    }

    const std::vector<int>& initial_customers() const { return cfg_.initial_customers; }

  private:
    explicit ValidatedModel(ModelConfig cfg);
    ModelConfig cfg_;
    std::vector<Eigen::MatrixXd> full_generator_;
    Eigen::MatrixXd embedded_;
    std::vector<double> mean_sojourn_;
    std::vector<std::vector<int>> kernel_from_;
};

}  // namespace mmapq
