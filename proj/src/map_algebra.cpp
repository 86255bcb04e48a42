#include "mmapq/map_algebra.hpp"

#include <algorithm>
#include <cmath>

#include "mmapq/grid.hpp"

namespace mmapq {

namespace detail {

void require_unit_polydisc(std::span<const cplx> z) {
    for (const cplx& zr : z)
        if (std::abs(zr) > 1.0 + 1e-12)
            throw DomainError("|z| must not exceed 1");
}

Eigen::MatrixXcd generator_pgf_unchecked(const ValidatedModel& model, int state,
                                         std::span<const cplx> z) {
    Eigen::MatrixXcd out = model.D0(state).cast<cplx>();
    const auto& labels = model.batch_labels();
    for (std::size_t b = 0; b < labels.size(); ++b) {
        cplx zh = 1.0;
        for (std::size_t r = 0; r < labels[b].size(); ++r)
            zh *= std::pow(z[r], labels[b][r]);
        out += zh * model.Dh(state, static_cast<int>(b)).cast<cplx>();
    }
    return out;
}

}  // namespace detail

Eigen::MatrixXcd generator_pgf(const ValidatedModel& model, int state,
                               std::span<const cplx> z) {
    if (static_cast<int>(z.size()) != model.type_count())
        throw DomainError("z must have one entry per customer type");
    detail::require_unit_polydisc(z);
    return detail::generator_pgf_unchecked(model, state, z);
}

Eigen::RowVectorXd stationary_phase(const ValidatedModel& model, int state) {
    return stationary_row(model.D(state));
}

Eigen::MatrixXcd counting_pgf(const ValidatedModel& model, int state,
                              std::span<const cplx> z, double t) {
    if (t < 0.0) throw DomainError("t must be >= 0");
    return matrix_exp(generator_pgf(model, state, z) * t);
}

CountingMoments counting_moments(const ValidatedModel& model, int state,
                                 const BatchLabel& h, double t,
                                 const Eigen::RowVectorXd& theta) {
    if (t < 0.0) throw DomainError("t must be >= 0");
    const auto& labels = model.batch_labels();
    const auto it = std::find(labels.begin(), labels.end(), h);
    if (it == labels.end())
        throw ModelError({Violation{"IndexError", "batch", "unknown batch label"}});
    const int b = static_cast<int>(it - labels.begin());

    const Eigen::MatrixXd& D = model.D(state);
    const int m = model.phase_count();
    if (theta.size() != m || std::abs(theta.sum() - 1.0) > 1e-9 ||
        (theta.array() < -1e-12).any())
        throw DomainError("theta must be a probability vector over phases");

    const Eigen::RowVectorXd pi = stationary_phase(model, state);
    const Eigen::VectorXd e = Eigen::VectorXd::Ones(m);
    const Eigen::VectorXd Dh_e = model.Dh(state, b) * e;
    const double lambda_h = (pi * Dh_e).value();

    const Eigen::MatrixXd deflated = D - e * pi;  // D - e pi, nonsingular
    const auto lu = deflated.partialPivLu();
    const Eigen::VectorXd w = lu.solve(Dh_e);  // (D - e pi)^{-1} D_h e

    const Eigen::MatrixXd expDt = matrix_exp((D * t).cast<cplx>()).real();
    const Eigen::MatrixXd growth = expDt - Eigen::MatrixXd::Identity(m, m);

    CountingMoments out;
    out.t = t;
    out.mean = lambda_h * t + (theta * growth * w).value();

    const Eigen::RowVectorXd piDh = pi * model.Dh(state, b);
    const double linear =
        lambda_h - 2.0 * lambda_h * lambda_h - 2.0 * (piDh * w).value();
    const Eigen::VectorXd u = lu.solve(growth * w);
    out.variance = linear * t + 2.0 * (piDh * u).value();
    return out;
}

ArrivalRates arrival_rates(const ValidatedModel& model, int state) {
    const Eigen::RowVectorXd pi = stationary_phase(model, state);
    const Eigen::VectorXd e = Eigen::VectorXd::Ones(model.phase_count());
    const auto& labels = model.batch_labels();

    ArrivalRates rates;
    rates.per_type.assign(model.type_count(), 0.0);
    for (std::size_t b = 0; b < labels.size(); ++b) {
        const double lambda_h = pi * model.Dh(state, static_cast<int>(b)) * e;
        rates.per_batch.push_back(lambda_h);
        rates.batch_total += lambda_h;
        for (std::size_t r = 0; r < labels[b].size(); ++r)
            rates.per_type[r] += labels[b][r] * lambda_h;
    }
    for (double lr : rates.per_type) rates.customer_total += lr;
    return rates;
}

Thinning Thinning::constant(const ValidatedModel& model, std::vector<double> p) {
    if (static_cast<int>(p.size()) != model.type_count())
        throw DomainError("one retention probability required per type");
    std::vector<std::vector<double>> grid_p;
    for (double pr : p) {
        if (pr < 0.0 || pr > 1.0)
            throw DomainError("retention probabilities must lie in [0,1]");
        grid_p.emplace_back(model.grid().nodes, pr);
    }
    Thinning t;
    t.p_ = std::move(grid_p);
    return t;
}

Thinning Thinning::sampled(const ValidatedModel& model,
                           std::vector<std::vector<double>> p_on_grid) {
    if (static_cast<int>(p_on_grid.size()) != model.type_count())
        throw DomainError("one retention function required per type");
    for (const auto& row : p_on_grid) {
        if (row.size() != model.grid().nodes)
            throw GridError("retention function must be sampled on the model grid");
        for (double pr : row)
            if (pr < 0.0 || pr > 1.0)
                throw DomainError("retention probabilities must lie in [0,1]");
    }
    Thinning t;
    t.p_ = std::move(p_on_grid);
    return t;
}

Eigen::MatrixXcd thinned_generator_pgf(const ValidatedModel& model, int state,
                                       std::span<const cplx> z, const Thinning& p,
                                       double t) {
    detail::require_unit_polydisc(z);
    const std::size_t node = model.grid().index_of(t);
    const auto& labels = model.batch_labels();
    const int m = model.phase_count();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m, m);
    for (std::size_t b = 0; b < labels.size(); ++b) {
        cplx factor = 1.0;
        for (std::size_t r = 0; r < labels[b].size(); ++r) {
            const double pr = p.at(static_cast<int>(r), node);
            factor *= std::pow(1.0 - pr + z[r] * pr, labels[b][r]);
        }
        out += factor * model.Dh(state, static_cast<int>(b)).cast<cplx>();
    }
    return out;
}

Eigen::MatrixXcd thinned_counting_pgf(const ValidatedModel& model, int state,
                                      std::span<const cplx> z, const Thinning& p,
                                      double t) {
    detail::require_unit_polydisc(z);
    const Grid grid = model.grid();
    const std::size_t upto = grid.index_of(t);
    const int m = model.phase_count();

    Eigen::MatrixXcd integral = Eigen::MatrixXcd::Zero(m, m);
    Eigen::MatrixXcd prev =
        model.D0(state).cast<cplx>() + thinned_generator_pgf(model, state, z, p, 0.0);
    for (std::size_t k = 1; k <= upto; ++k) {
        Eigen::MatrixXcd cur = model.D0(state).cast<cplx>() +
                               thinned_generator_pgf(model, state, z, p, grid.time(k));
        integral += 0.5 * grid.step * (prev + cur);
        prev = std::move(cur);
    }
    return matrix_exp(integral);
}

}  // namespace mmapq
