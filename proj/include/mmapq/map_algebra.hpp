#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "mmapq/linalg.hpp"
#include "mmapq/model.hpp"

namespace mmapq {

using CplxVec = std::vector<cplx>;

struct CountingMoments {
    double mean = 0.0;
    double variance = 0.0;
    double t = 0.0;
};

struct ArrivalRates {
    std::vector<double> per_batch;  // lambda_h = pi D_h e
    std::vector<double> per_type;   // lambda_r = sum_h h_r pi D_h e
    double batch_total = 0.0;
    double customer_total = 0.0;
};

// Per-type retention probabilities sampled on the model grid.
class Thinning {
  public:
    static Thinning constant(const ValidatedModel& model, std::vector<double> p);
    static Thinning sampled(const ValidatedModel& model,
                            std::vector<std::vector<double>> p_on_grid);
    double at(int type, std::size_t node) const { return p_[type][node]; }
    int type_count() const { return static_cast<int>(p_.size()); }

  private:
    std::vector<std::vector<double>> p_;
};

// D(z) = D0(i) + sum_h z^h D_h(i), |z_r| <= 1
Eigen::MatrixXcd generator_pgf(const ValidatedModel& model, int state,
                               std::span<const cplx> z);

// pi D(i) = 0, pi e = 1
Eigen::RowVectorXd stationary_phase(const ValidatedModel& model, int state);

// P(z, t) = exp(D(z) t)
Eigen::MatrixXcd counting_pgf(const ValidatedModel& model, int state,
                              std::span<const cplx> z, double t);

// mean and variance of the batch-h count on [0, t), initial phase law theta
CountingMoments counting_moments(const ValidatedModel& model, int state,
                                 const BatchLabel& h, double t,
                                 const Eigen::RowVectorXd& theta);

ArrivalRates arrival_rates(const ValidatedModel& model, int state);

// sum_h D_h(i) prod_r [1 - p_r(t) + z_r p_r(t)]^{h_r}; batch part only,
// callers add D0 when forming full kernels
Eigen::MatrixXcd thinned_generator_pgf(const ValidatedModel& model, int state,
                                       std::span<const cplx> z, const Thinning& p,
                                       double t);

// exp of the trapezoid integral of D0(i) + thinned generator over [0, t]
Eigen::MatrixXcd thinned_counting_pgf(const ValidatedModel& model, int state,
                                      std::span<const cplx> z, const Thinning& p,
                                      double t);

namespace detail {
// Analytic continuation without the unit-polydisc check; the moment oracles
// evaluate just outside |z| = 1.
Eigen::MatrixXcd generator_pgf_unchecked(const ValidatedModel& model, int state,
                                         std::span<const cplx> z);
void require_unit_polydisc(std::span<const cplx> z);
}  // namespace detail

}  // namespace mmapq
