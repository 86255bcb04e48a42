#include "mmapq/renewal.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "mmapq/linalg.hpp"

namespace mmapq {

namespace {

// Q_ij(t) restricted to one (i,j) pair
double q_entry(const ValidatedModel& model, int from, int to, double t) {
    double v = 0.0;
    for (int e : model.kernel_from(from)) {
        const auto& entry = model.config().environment.kernel[e];
        if (entry.to == to) v += entry.prob * entry.dist.cdf(t);
    }
    return v;
}

}  // namespace

RenewalSolution renewal_matrix(const ValidatedModel& model, const Grid& grid) {
    const int S = model.state_count();
    const std::size_t N = grid.nodes - 1;

    // cell increments dQ_ik[l] = Q_ik(t_l) - Q_ik(t_{l-1}) and a reversed
    // copy so the convolution below reads both factors contiguously
    std::vector<std::vector<double>> dq(static_cast<std::size_t>(S) * S),
        dq_rev(static_cast<std::size_t>(S) * S);
    for (int i = 0; i < S; ++i) {
        for (int k = 0; k < S; ++k) {
            auto& cell = dq[static_cast<std::size_t>(i) * S + k];
            cell.assign(N + 1, 0.0);
            double prev = 0.0;
            for (std::size_t l = 1; l <= N; ++l) {
                const double cur = q_entry(model, i, k, grid.time(l));
                cell[l] = cur - prev;
                prev = cur;
            }
            auto& rev = dq_rev[static_cast<std::size_t>(i) * S + k];
            rev.assign(N + 1, 0.0);
            for (std::size_t l = 0; l <= N; ++l) rev[N - l] = cell[l];
        }
    }

    // implicit half-weight of the newest node
    Eigen::MatrixXd W(S, S);
    for (int i = 0; i < S; ++i)
        for (int k = 0; k < S; ++k) W(i, k) = 0.5 * dq[static_cast<std::size_t>(i) * S + k][1];
    const auto lu = (Eigen::MatrixXd::Identity(S, S) - W).partialPivLu();

    RenewalSolution out;
    out.grid = grid;
    out.state_count = S;
    out.H = GridRealSeq(grid, static_cast<std::size_t>(S) * S);

    // running cell averages havg_kj[m] = (H_kj[m] + H_kj[m+1]) / 2
    std::vector<std::vector<double>> havg(static_cast<std::size_t>(S) * S);
    for (auto& h : havg) h.reserve(N);

    for (std::size_t n = 1; n <= N; ++n) {
        Eigen::MatrixXd C(S, S);
        for (int i = 0; i < S; ++i) {
            for (int j = 0; j < S; ++j) {
                double c = q_entry(model, i, j, grid.time(n));
                for (int k = 0; k < S; ++k) {
                    const auto& rev = dq_rev[static_cast<std::size_t>(i) * S + k];
                    const auto& hk = havg[static_cast<std::size_t>(k) * S + j];
                    // sum_{l=2..n} dQ_ik[l] * havg_kj[n-l]
                    if (n >= 2)
                        c += kernels::dot({hk.data(), n - 1}, {rev.data() + (N - n), n - 1});
                    c += 0.5 * dq[static_cast<std::size_t>(i) * S + k][1] *
                         out.H.at(n - 1)[static_cast<std::size_t>(k) * S + j];
                }
                C(i, j) = c;
            }
        }
        const Eigen::MatrixXd X = lu.solve(C);
        auto row = out.H.at(n);
        for (int i = 0; i < S; ++i)
            for (int j = 0; j < S; ++j) row[static_cast<std::size_t>(i) * S + j] = X(i, j);
        for (int k = 0; k < S; ++k)
            for (int j = 0; j < S; ++j)
                havg[static_cast<std::size_t>(k) * S + j].push_back(
                    0.5 * (out.H.at(n - 1)[static_cast<std::size_t>(k) * S + j] +
                           out.H.at(n)[static_cast<std::size_t>(k) * S + j]));
    }

    out.H0 = GridRealSeq(grid, S);
    const auto& p0 = model.initial_env();
    for (std::size_t n = 0; n < grid.nodes; ++n) {
        auto mixed = out.H0.at(n);
        const auto full = out.H.at(n);
        for (int j = 0; j < S; ++j) {
            double v = 0.0;
            for (int k = 0; k < S; ++k) v += p0[k] * full[static_cast<std::size_t>(k) * S + j];
            mixed[j] = v;
        }
    }
    return out;
}

StationaryWeights stationary_weights(const ValidatedModel& model) {
    const int S = model.state_count();
    StationaryWeights w;
    w.mean_sojourn.resize(S);
    for (int i = 0; i < S; ++i) w.mean_sojourn[i] = model.mean_sojourn(i);
    const Eigen::RowVectorXd rho = stationary_of_stochastic(model.embedded_chain());
    w.rho.assign(rho.data(), rho.data() + S);
    for (int i = 0; i < S; ++i) w.mean_cycle += w.rho[i] * w.mean_sojourn[i];
    w.q.resize(S);
    for (int i = 0; i < S; ++i) w.q[i] = w.rho[i] * w.mean_sojourn[i] / w.mean_cycle;
    return w;
}

namespace {

void check_bases(const ValidatedModel& model, const std::vector<GridComplexSeq>& base,
                 const Grid& grid) {
    if (static_cast<int>(base.size()) != model.state_count())
        throw GridError("one base function required per environment state");
    for (const auto& b : base) {
        if (b.grid().nodes != grid.nodes || b.grid().step != grid.step)
            throw GridError("base functions must live on the renewal grid");
        if (b.dim() != base.front().dim())
            throw GridError("base functions must share one block dimension");
    }
}

}  // namespace

GridComplexSeq catastrophe_transform_transient(const ValidatedModel& model,
                                               const std::vector<GridComplexSeq>& base,
                                               const RenewalSolution& renewal,
                                               int start) {
    const Grid grid = renewal.grid;
    check_bases(model, base, grid);
    const int S = model.state_count();
    const std::size_t d = base.front().dim();
    const std::size_t N = grid.nodes - 1;

    // g_j(t) = (1 - F_j(t)) base_j(t); survivors sampled from the right so a
    // catastrophe scheduled exactly at t has already fired
    std::vector<GridComplexSeq> g(S);
    std::vector<std::vector<double>> survival(S);
    for (int j = 0; j < S; ++j) {
        g[j] = GridComplexSeq(grid, d);
        survival[j].resize(grid.nodes);
        for (std::size_t k = 0; k <= N; ++k) {
            const double surv = 1.0 - model.sojourn_cdf(j, grid.time(k));
            survival[j][k] = surv;
            auto dst = g[j].at(k);
            const auto src = base[j].at(k);
            for (std::size_t x = 0; x < d; ++x) dst[x] = surv * src[x];
        }
    }

    // dH increments for the requested start
    std::vector<std::vector<double>> dh(S);
    for (int j = 0; j < S; ++j) {
        dh[j].assign(N + 1, 0.0);
        for (std::size_t l = 1; l <= N; ++l) {
            const double cur = start < 0 ? renewal.H0.at(l)[j] : renewal.at(l, start, j);
            const double prev = start < 0 ? renewal.H0.at(l - 1)[j] : renewal.at(l - 1, start, j);
            dh[j][l] = cur - prev;
        }
    }

    GridComplexSeq out(grid, d);
    // first term
    for (std::size_t n = 0; n <= N; ++n) {
        auto dst = out.at(n);
        if (start < 0) {
            const auto& p0 = model.initial_env();
            for (int i = 0; i < S; ++i)
                if (p0[i] != 0.0) kernels::caxpy(p0[i], g[i].at(n), dst);
        } else {
            kernels::caxpy(1.0, g[start].at(n), dst);
        }
    }

    if (d == 1) {
        // scalar bases: one reversed-weight dot per (state, node)
        for (int j = 0; j < S; ++j) {
            std::vector<cplx> gavg(N), dh_rev(N + 1);
            const auto flat = g[j].flat();
            for (std::size_t m = 0; m < N; ++m) gavg[m] = 0.5 * (flat[m] + flat[m + 1]);
            for (std::size_t l = 0; l <= N; ++l) dh_rev[N - l] = dh[j][l];
            for (std::size_t n = 1; n <= N; ++n)
                out.at(n)[0] += kernels::cdot({gavg.data(), n}, {dh_rev.data() + (N - n), n});
        }
        return out;
    }

    for (std::size_t n = 1; n <= N; ++n) {
        auto dst = out.at(n);
        for (int j = 0; j < S; ++j) {
            for (std::size_t l = 1; l <= n; ++l) {
                const double w = 0.5 * dh[j][l];
                if (w == 0.0) continue;
                kernels::caxpy(w, g[j].at(n - l + 1), dst);
                kernels::caxpy(w, g[j].at(n - l), dst);
            }
        }
    }
    return out;
}

StationaryMix catastrophe_transform_stationary(const ValidatedModel& model,
                                               const std::vector<GridComplexSeq>& base) {
    const Grid grid = base.front().grid();
    check_bases(model, base, grid);
    const int S = model.state_count();
    const std::size_t d = base.front().dim();
    const double eps = model.tail_epsilon();

    for (int i = 0; i < S; ++i) {
        if (1.0 - model.sojourn_cdf(i, grid.horizon()) > eps)
            throw TruncationError(
                "sojourn survival of state " + std::to_string(i + 1) +
                " has not dropped below tail_epsilon at the grid horizon");
    }

    const StationaryWeights w = stationary_weights(model);
    StationaryMix out;
    out.value.assign(d, 0.0);

    double sup_base = 0.0;
    for (int i = 0; i < S; ++i) {
        const double weight = w.q[i] / w.mean_sojourn[i];
        // trapezoid of (1 - F_i(u)) base_i(u); sojourn atoms sampled from
        // both sides of their cell
        std::vector<cplx> integral(d, 0.0);
        for (std::size_t l = 1; l < grid.nodes; ++l) {
            const double sl = 1.0 - model.sojourn_cdf(i, grid.time(l - 1));
            const double sr = 1.0 - model.sojourn_cdf_left(i, grid.time(l));
            kernels::caxpy(0.5 * grid.step * sl, base[i].at(l - 1), integral);
            kernels::caxpy(0.5 * grid.step * sr, base[i].at(l), integral);
        }
        kernels::caxpy(weight, integral, out.value);
        for (const cplx& v : base[i].flat()) sup_base = std::max(sup_base, std::abs(v));

        double tail = w.mean_sojourn[i];
        for (int e : model.kernel_from(i)) {
            const auto& entry = model.config().environment.kernel[e];
            tail -= entry.prob * entry.dist.integrated_survival(grid.horizon());
        }
        out.tail_bound += weight * std::max(tail, 0.0);
    }
    out.tail_bound *= sup_base;
    return out;
}

std::vector<cplx> grid_laplace(const GridComplexSeq& f, double s) {
    const Grid grid = f.grid();
    const std::size_t d = f.dim();
    std::vector<cplx> out(d, 0.0);
    for (std::size_t l = 1; l < grid.nodes; ++l) {
        kernels::caxpy(0.5 * grid.step * std::exp(-s * grid.time(l - 1)), f.at(l - 1), out);
        kernels::caxpy(0.5 * grid.step * std::exp(-s * grid.time(l)), f.at(l), out);
    }
    return out;
}

std::vector<double> exponential_sojourn_rates(const ValidatedModel& model) {
    std::vector<double> rates;
    for (int i = 0; i < model.state_count(); ++i) {
        double v = -1.0;
        for (int e : model.kernel_from(i)) {
            const auto& entry = model.config().environment.kernel[e];
            if (entry.dist.family() != DistFamily::exponential)
                throw DomainError("sojourn law of state " + std::to_string(i + 1) +
                                  " is not exponential");
            if (v < 0.0)
                v = entry.dist.rate();
            else if (std::abs(v - entry.dist.rate()) > 1e-12 * v)
                throw DomainError("state " + std::to_string(i + 1) +
                                  " mixes sojourn rates; corollary needs one rate per state");
        }
        rates.push_back(v);
    }
    return rates;
}

std::vector<cplx> stationary_exponential_sojourn(const ValidatedModel& model,
                                                 const std::vector<GridComplexSeq>& base) {
    const std::vector<double> v = exponential_sojourn_rates(model);
    const StationaryWeights w = stationary_weights(model);
    const std::size_t d = base.front().dim();
    std::vector<cplx> out(d, 0.0);
    for (int i = 0; i < model.state_count(); ++i) {
        const auto lt = grid_laplace(base[i], v[i]);
        kernels::caxpy(w.q[i] * v[i], lt, out);
    }
    return out;
}

std::vector<cplx> transient_lt_exponential_sojourn(const ValidatedModel& model,
                                                   const std::vector<GridComplexSeq>& base,
                                                   const RenewalSolution& renewal,
                                                   double s_lt, int start) {
    const std::vector<double> v = exponential_sojourn_rates(model);
    check_bases(model, base, renewal.grid);
    const int S = model.state_count();
    const std::size_t d = base.front().dim();
    const Grid grid = renewal.grid;
    const std::size_t N = grid.nodes - 1;

    std::vector<cplx> out = grid_laplace(base[start], s_lt + v[start]);
    for (int j = 0; j < S; ++j) {
        // LST of the dH_ij measure at s, product-integration trapezoid
        double lst_dh = 0.0;
        for (std::size_t l = 1; l <= N; ++l) {
            const double inc = renewal.at(l, start, j) - renewal.at(l - 1, start, j);
            lst_dh += inc * 0.5 *
                      (std::exp(-s_lt * grid.time(l - 1)) + std::exp(-s_lt * grid.time(l)));
        }
        const auto lt = grid_laplace(base[j], s_lt + v[j]);
        kernels::caxpy(lst_dh, lt, out);
    }
    return out;
}

}  // namespace mmapq
