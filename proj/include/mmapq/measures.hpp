#pragma once

#include <functional>
#include <optional>

#include "mmapq/renewal.hpp"
#include "mmapq/transient.hpp"

namespace mmapq {

struct Pmf {
    std::vector<double> p;        // p_0 .. p_nmax
    double tail_mass = 0.0;       // 1 - sum p_n
    double mean() const {
        double m = 0.0;
        for (std::size_t n = 0; n < p.size(); ++n) m += static_cast<double>(n) * p[n];
        return m;
    }
};

// Discrete Fourier inversion on >= 2(nmax+1) unit-circle points. Throws
// NotNormalized when pgf(1) strays from 1 by more than 1e-6 or an inverted
// mass falls below the -1e-9 round-off floor.
Pmf pgf_to_pmf(const std::function<cplx(cplx)>& pgf, int nmax);

// Scalar per-state bases theta_i A^i(pt, .) e on the model grid, with
// theta_i the stationary phase law of state i. Every catastrophe-model
// pipeline (PGF evaluation, PMF inversion, transient means) mixes these.
std::vector<GridComplexSeq> scalar_transform_bases(const ValidatedModel& model,
                                                   const TransformPoint& pt,
                                                   Method method);

namespace detail {
// analytic continuation just outside |z| = 1 for the derivative oracles
std::vector<GridComplexSeq> scalar_transform_bases_unchecked(
    const ValidatedModel& model, const TransformPoint& pt, Method method);
}  // namespace detail

// Stationary queue-size PGF of the catastrophe model at z (all types marked
// z); grid horizon must cover the sojourn tails.
cplx stationary_queue_pgf(const ValidatedModel& model, cplx z, Method method);

// Transient mean queue per type for the catastrophe model, p0-mixed start,
// from central finite differences in z_{1r} with one Richardson step.
// result[r][n] = E[N_r in service at t_n].
std::vector<std::vector<double>> transient_queue_means(const ValidatedModel& model,
                                                       const RenewalSolution& renewal,
                                                       Method method);

struct StationaryKpis {
    std::vector<double> mean_queue;              // L_qr
    double mean_queue_total = 0.0;               // L_q
    std::vector<double> loss_per_catastrophe;    // L_losr, embedded-stationary
    double loss_per_catastrophe_total = 0.0;     // L_los
    std::vector<double> loss_rate;               // destroyed per unit time
    double loss_rate_total = 0.0;
    std::vector<std::vector<double>> resource_mean;  // delta_{r,c}
    std::vector<double> resource_mean_total;         // delta_c = sum_r
};

// Iterated quadrature of the stationary double integrals, truncated where
// sojourn survival drops below tail_epsilon.
StationaryKpis stationary_kpis(const ValidatedModel& model);

struct PerformanceReport {
    StationaryKpis kpis;
    std::optional<Pmf> queue_pmf;  // total-count stationary PMF
    int pmf_nmax = 0;
};

PerformanceReport build_report(const ValidatedModel& model, Method method,
                               bool with_pmf);

// M_r|G_r|infty special case: D0(i) = -alpha_i I, Dh(i) = alpha_i p_i(h) I.
// Scalar-exponent formulas, kept independent of the matrix pipeline.
class MgiSpecialCase {
  public:
    explicit MgiSpecialCase(const ValidatedModel& model);  // throws NotDegenerate

    cplx transient_pgf(std::span<const cplx> z, double t, int state) const;
    GridComplexSeq transient_pgf_path(std::span<const cplx> z, int state) const;
    // p0-mixed catastrophe PGF at a grid time
    cplx catastrophe_pgf(std::span<const cplx> z, double t,
                         const RenewalSolution& renewal) const;
    cplx stationary_pgf(std::span<const cplx> z) const;
    double loss_per_catastrophe_total() const;
    double loss_rate_total() const;
    const std::vector<double>& alpha() const { return alpha_; }

  private:
    const ValidatedModel* model_;
    std::vector<double> alpha_;              // per state
    std::vector<std::vector<double>> prob_;  // per state, aligned with batch labels
};

}  // namespace mmapq
