#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "mmapq/grid.hpp"
#include "mmapq/map_algebra.hpp"
#include "mmapq/model.hpp"

namespace mmapq {

// Joint transform coordinates: z1 marks in-service customers, z2 served
// customers (PGF arguments, unit polydisc); s1 marks in-system resources,
// s2 served resources (LST arguments, nonnegative).
struct TransformPoint {
    CplxVec z1, z2;
    std::vector<double> s1, s2;

    static TransformPoint neutral(int type_count, int resource_dim) {
        TransformPoint pt;
        pt.z1.assign(type_count, 1.0);
        pt.z2.assign(type_count, 1.0);
        pt.s1.assign(resource_dim, 0.0);
        pt.s2.assign(resource_dim, 0.0);
        return pt;
    }
};

// The exponential-of-integral form is exact only when the integrand commutes
// across time (always for a single phase); the differential-equation path is
// the defining equation and serves as ground truth for m > 1.
enum class Method { closed_form, ode };

// S_i(z1,z2,s1,s2,t) = sum_h D_h(i) prod_r [z_{r2} G_ri(s2) B_ri(t) +
// z_{r1} F_ri(s1) (1 - B_ri(t))]^{h_r}
Eigen::MatrixXcd service_kernel(const ValidatedModel& model, int state,
                                const TransformPoint& pt, double t);

// Transform of (in-service counts, served counts, in-system resources,
// served resources) on the model grid up to node `upto` (inclusive).
GridComplexSeq transient_transform_path(const ValidatedModel& model, int state,
                                        const TransformPoint& pt, Method method,
                                        std::size_t upto);

namespace detail {
// Same path without the unit-polydisc bound; the transforms are entire in z,
// and the finite-difference moment oracles evaluate just outside |z| = 1.
GridComplexSeq transient_transform_path_unchecked(const ValidatedModel& model,
                                                  int state, const TransformPoint& pt,
                                                  Method method, std::size_t upto);
}  // namespace detail

Eigen::MatrixXcd transient_transform(const ValidatedModel& model, int state,
                                     const TransformPoint& pt, double t, Method method);

// marginal at z2=1, s2=0: busy servers and in-system resources
Eigen::MatrixXcd busy_servers_transform(const ValidatedModel& model, int state,
                                        std::span<const cplx> z1,
                                        std::span<const double> s1, double t,
                                        Method method = Method::closed_form);

// marginal at z1=1, s1=0: served customers and served resources
Eigen::MatrixXcd served_transform(const ValidatedModel& model, int state,
                                  std::span<const cplx> z2,
                                  std::span<const double> s2, double t,
                                  Method method = Method::closed_form);

// h0 initial customers: served ones carry the z2/s2 mark, those still in
// service carry no mark at all
Eigen::MatrixXcd initial_customers_transform(const ValidatedModel& model, int state,
                                             const TransformPoint& pt, double t,
                                             std::span<const int> h0,
                                             Method method = Method::closed_form);

// Batch law a(n) on a finite support of nonzero labels.
struct BatchLaw {
    std::vector<std::pair<BatchLabel, double>> entries;
};

// Renewal-input model: batches arrive at renewal epochs of `interarrival`,
// service and resource laws taken from `model` at `state`. Solves the scalar
// Volterra equation by product-integration trapezoid on the grid.
cplx renewal_input_transform(const ValidatedModel& model, int state,
                             const BatchLaw& batch_law,
                             const Distribution& interarrival,
                             const TransformPoint& pt, double t);

enum class BatchServiceMode { whole_batch, same_batch_service };

// Batch-service collapses: whole_batch serves each batch as one customer with
// law `service` (MAP with D1 = sum_h D_h); same_batch_service gives all
// customers of a batch one common draw (BMAP with D(n) = sum_{|h|=n} D_h).
Eigen::MatrixXcd batch_service_pgf(const ValidatedModel& model, int state,
                                   const Distribution& service, cplx z, double t,
                                   BatchServiceMode mode);

}  // namespace mmapq
