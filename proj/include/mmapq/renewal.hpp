#pragma once

#include <vector>

#include "mmapq/grid.hpp"
#include "mmapq/linalg.hpp"
#include "mmapq/model.hpp"

namespace mmapq {

// Markov renewal function H_ij(t): expected number of entries into state j
// during (0, t] starting from i, plus the p0-weighted row H_j(t).
struct RenewalSolution {
    Grid grid;
    int state_count = 0;
    GridRealSeq H;   // dim S*S, entry (from * S + to)
    GridRealSeq H0;  // dim S, H_j = sum_k p0_k H_kj

    double at(std::size_t node, int from, int to) const {
        return H.at(node)[static_cast<std::size_t>(from) * state_count + to];
    }
};

// Solves H_ij = Q_ij + sum_k (H_kj * dQ_ik) by product-integration trapezoid.
RenewalSolution renewal_matrix(const ValidatedModel& model, const Grid& grid);

struct StationaryWeights {
    std::vector<double> mean_sojourn;  // eta_i
    std::vector<double> rho;           // embedded stationary law
    std::vector<double> q;             // time-stationary state weights
    double mean_cycle = 0.0;           // sum_i rho_i eta_i
};

StationaryWeights stationary_weights(const ValidatedModel& model);

// Renewal mixture of per-state no-catastrophe bases:
//   L_i(t) = (1-F_i(t)) base_i(t) + sum_j int_0^t (1-F_j(t-u)) base_j(t-u) dH_ij(u)
// start in {0..S-1}, or -1 for the p0-mixed version driven by dH_j.
// All bases share the renewal grid and a common block dimension.
GridComplexSeq catastrophe_transform_transient(const ValidatedModel& model,
                                               const std::vector<GridComplexSeq>& base,
                                               const RenewalSolution& renewal,
                                               int start);

struct StationaryMix {
    std::vector<cplx> value;  // block of the base's dimension
    double tail_bound = 0.0;  // sup|base| * sum_i (q_i/eta_i) int_T^inf (1-F_i)
};

// lim_t L(t) = sum_i (q_i/eta_i) int_0^inf (1-F_i(u)) base_i(u) du, truncated
// where every state's sojourn survival has dropped below the model's
// tail_epsilon; TruncationError when the grid horizon is too short.
StationaryMix catastrophe_transform_stationary(const ValidatedModel& model,
                                               const std::vector<GridComplexSeq>& base);

// Trapezoid Laplace transform of a grid block: int_0^T e^{-su} f(u) du.
std::vector<cplx> grid_laplace(const GridComplexSeq& f, double s);

// Exponential-sojourn corollaries. Both require every state's sojourn law to
// be exponential (one rate v_i per state).
std::vector<double> exponential_sojourn_rates(const ValidatedModel& model);

// Stationary value sum_i q_i v_i LT(base_i)(v_i); agrees with the generic
// stationary mixture on the same model.
std::vector<cplx> stationary_exponential_sojourn(const ValidatedModel& model,
                                                 const std::vector<GridComplexSeq>& base);

// Laplace transform (argument s_lt) of the transient catastrophe mixture
// started in `start`: LT(base_i)(s+v_i) + sum_j LT(base_j)(s+v_j) dH_ij^(s).
std::vector<cplx> transient_lt_exponential_sojourn(const ValidatedModel& model,
                                                   const std::vector<GridComplexSeq>& base,
                                                   const RenewalSolution& renewal,
                                                   double s_lt, int start);

}  // namespace mmapq
