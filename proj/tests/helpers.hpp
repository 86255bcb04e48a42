#pragma once

#include <Eigen/Dense>

#include "mmapq/model.hpp"

namespace mmapq::testing {

inline Eigen::MatrixXd mat1(double v) {
    Eigen::MatrixXd m(1, 1);
    m << v;
    return m;
}

inline Eigen::MatrixXd mat2(double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

inline ServiceResources default_service_resources(int types, int states,
                                                  const Distribution& service) {
    ServiceResources sr;
    for (int r = 0; r < types; ++r) {
        sr.service.emplace_back(states, service);
        sr.arrival_resource.push_back({Distribution::exponential(2.0)});
        sr.departure_resource.push_back({Distribution::exponential(1.0)});
    }
    return sr;
}

// environment that never transitions inside the horizon
inline Environment inert_environment(double horizon) {
    Environment env;
    env.state_count = 1;
    env.initial = {1.0};
    env.kernel = {{0, 0, 1.0, Distribution::deterministic(horizon * 1000.0 + 1.0)}};
    return env;
}

// M|G|infty: Poisson(lambda) single-type arrivals, no environment dynamics
inline ModelConfig poisson_config(double lambda, const Distribution& service,
                                  double horizon, double step) {
    ModelConfig cfg;
    cfg.mmap.phase_count = 1;
    cfg.mmap.type_count = 1;
    cfg.mmap.batch_labels = {{1}};
    cfg.mmap.states = {{mat1(-lambda), {mat1(lambda)}}};
    cfg.environment = inert_environment(horizon);
    cfg.service_resources = default_service_resources(1, 1, service);
    cfg.initial_customers = {0};
    cfg.numeric = {horizon, step, 1e-10};
    return cfg;
}

// M|M|infty with exponential catastrophes at rate v
inline ModelConfig mm_catastrophe_config(double lambda, double mu, double v,
                                         double horizon, double step) {
    ModelConfig cfg = poisson_config(lambda, Distribution::exponential(mu), horizon, step);
    cfg.environment.kernel = {{0, 0, 1.0, Distribution::exponential(v)}};
    return cfg;
}

// 2-phase single-type MAP: D0 = [[-3,1],[0,-2]], D1 = [[2,0],[1,1]]
inline ModelConfig map2_config(const Distribution& service, double horizon, double step) {
    ModelConfig cfg;
    cfg.mmap.phase_count = 2;
    cfg.mmap.type_count = 1;
    cfg.mmap.batch_labels = {{1}};
    cfg.mmap.states = {{mat2(-3.0, 1.0, 0.0, -2.0), {mat2(2.0, 0.0, 1.0, 1.0)}}};
    cfg.environment = inert_environment(horizon);
    cfg.service_resources = default_service_resources(1, 1, service);
    cfg.initial_customers = {0};
    cfg.numeric = {horizon, step, 1e-10};
    return cfg;
}

// 2-phase MAP whose batch matrix has non-constant row sums, so the
// time-ordered solution and the exponential-of-integral differ even after
// contraction with the phase law
inline ModelConfig map2_skewed_config(const Distribution& service, double horizon,
                                      double step) {
    ModelConfig cfg = map2_config(service, horizon, step);
    cfg.mmap.states[0].D0 = mat2(-3.0, 1.0, 0.0, -1.5);
    cfg.mmap.states[0].Dh = {mat2(2.0, 0.0, 0.5, 1.0)};
    return cfg;
}

// 2-type batch Poisson: batches (1,0) w.p. 0.6 and (0,2) w.p. 0.4 at rate alpha
inline ModelConfig batch_poisson_config(double alpha, double horizon, double step) {
    ModelConfig cfg;
    cfg.mmap.phase_count = 1;
    cfg.mmap.type_count = 2;
    cfg.mmap.batch_labels = {{0, 2}, {1, 0}};
    cfg.mmap.states = {{mat1(-alpha), {mat1(alpha * 0.4), mat1(alpha * 0.6)}}};
    cfg.environment = inert_environment(horizon);
    ServiceResources sr;
    sr.service = {{Distribution::exponential(1.0)}, {Distribution::erlang(2, 3.0)}};
    sr.arrival_resource = {{Distribution::exponential(2.0)},
                           {Distribution::uniform(0.0, 1.0)}};
    sr.departure_resource = {{Distribution::exponential(1.0)},
                             {Distribution::exponential(3.0)}};
    cfg.service_resources = sr;
    cfg.initial_customers = {0, 0};
    cfg.numeric = {horizon, step, 1e-10};
    return cfg;
}

// 2-type, 2-state semi-Markov fixture: per-state batch Poisson arrivals,
// state-dependent service, Erlang and uniform sojourns
inline ModelConfig sm2_config(double horizon, double step) {
    ModelConfig cfg;
    cfg.mmap.phase_count = 1;
    cfg.mmap.type_count = 2;
    cfg.mmap.batch_labels = {{0, 2}, {1, 0}};
    // state 1: types arrive at rates 1.2 and 2*0.3; state 2: slower
    cfg.mmap.states = {{mat1(-1.5), {mat1(0.3), mat1(1.2)}},
                       {mat1(-0.8), {mat1(0.2), mat1(0.6)}}};
    cfg.environment.state_count = 2;
    cfg.environment.initial = {1.0, 0.0};
    cfg.environment.kernel = {{0, 1, 1.0, Distribution::erlang(2, 1.0)},
                              {1, 0, 1.0, Distribution::uniform(0.5, 1.5)}};
    ServiceResources sr;
    sr.service = {{Distribution::exponential(1.0), Distribution::erlang(2, 3.0)},
                  {Distribution::exponential(2.0), Distribution::exponential(1.5)}};
    sr.arrival_resource = {{Distribution::exponential(2.0)},
                           {Distribution::deterministic(1.0)}};
    sr.departure_resource = {{Distribution::exponential(1.0)},
                             {Distribution::uniform(0.0, 2.0)}};
    cfg.service_resources = sr;
    cfg.initial_customers = {0, 0};
    cfg.numeric = {horizon, step, 1e-10};
    return cfg;
}

}  // namespace mmapq::testing
