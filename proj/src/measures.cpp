#include "mmapq/measures.hpp"

#include <cmath>
#include <numbers>

namespace mmapq {

namespace {

constexpr int kKpiCells = 1 << 17;  // internal quadrature resolution

double trapezoid_product(std::span<const double> f, std::span<const double> g, double step) {
    const double sum = kernels::dot(f, g);
    return step * (sum - 0.5 * f.front() * g.front() - 0.5 * f.back() * g.back());
}

}  // namespace

Pmf pgf_to_pmf(const std::function<cplx(cplx)>& pgf, int nmax) {
    if (nmax < 0) throw DomainError("nmax must be >= 0");
    std::size_t points = 64;
    while (points < 2 * static_cast<std::size_t>(nmax + 1)) points *= 2;

    std::vector<cplx> samples(points);
    for (std::size_t j = 0; j < points; ++j) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) /
                             static_cast<double>(points);
        samples[j] = pgf(std::polar(1.0, angle));
    }
    if (std::abs(samples[0] - 1.0) > 1e-6)
        throw NotNormalizedError("pgf(1) = " + std::to_string(samples[0].real()) +
                                 " differs from 1 by more than 1e-6");

    Pmf out;
    out.p.resize(nmax + 1);
    std::vector<cplx> twiddle(points);
    double total = 0.0;
    for (int n = 0; n <= nmax; ++n) {
        for (std::size_t j = 0; j < points; ++j) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) *
                                 static_cast<double>(n) / static_cast<double>(points);
            twiddle[j] = std::polar(1.0, angle);
        }
        double pn = kernels::cdot(samples, twiddle).real() / static_cast<double>(points);
        if (pn < 0.0) {
            if (pn < -1e-9)
                throw NotNormalizedError("inverted mass p_" + std::to_string(n) +
                                         " = " + std::to_string(pn));
            pn = 0.0;
        }
        out.p[n] = pn;
        total += pn;
    }
    out.tail_mass = 1.0 - total;
    return out;
}

namespace {

std::vector<GridComplexSeq> bases_impl(const ValidatedModel& model,
                                       const TransformPoint& pt, Method method,
                                       bool bounded) {
    const int m = model.phase_count();
    const Grid grid = model.grid();
    std::vector<GridComplexSeq> bases;
    for (int i = 0; i < model.state_count(); ++i) {
        const Eigen::RowVectorXd theta = stationary_phase(model, i);
        const auto path =
            bounded ? transient_transform_path(model, i, pt, method, grid.nodes - 1)
                    : detail::transient_transform_path_unchecked(model, i, pt, method,
                                                                 grid.nodes - 1);
        GridComplexSeq scalar(grid, 1);
        for (std::size_t k = 0; k < grid.nodes; ++k) {
            const Eigen::Map<const Eigen::MatrixXcd> A(path.at(k).data(), m, m);
            scalar.at(k)[0] = (theta.cast<cplx>() * A).sum();
        }
        bases.push_back(std::move(scalar));
    }
    return bases;
}

}  // namespace

std::vector<GridComplexSeq> scalar_transform_bases(const ValidatedModel& model,
                                                   const TransformPoint& pt,
                                                   Method method) {
    return bases_impl(model, pt, method, true);
}

namespace detail {
std::vector<GridComplexSeq> scalar_transform_bases_unchecked(
    const ValidatedModel& model, const TransformPoint& pt, Method method) {
    return bases_impl(model, pt, method, false);
}
}  // namespace detail

cplx stationary_queue_pgf(const ValidatedModel& model, cplx z, Method method) {
    TransformPoint pt = TransformPoint::neutral(model.type_count(), model.resource_dim());
    pt.z1.assign(model.type_count(), z);
    const auto bases = scalar_transform_bases(model, pt, method);
    return catastrophe_transform_stationary(model, bases).value[0];
}

std::vector<std::vector<double>> transient_queue_means(const ValidatedModel& model,
                                                       const RenewalSolution& renewal,
                                                       Method method) {
    const Grid grid = model.grid();
    const int K = model.type_count();
    const double h = 1e-3;

    auto mixed = [&](int type, double z1r) {
        TransformPoint pt = TransformPoint::neutral(K, model.resource_dim());
        pt.z1[type] = z1r;
        const auto bases = detail::scalar_transform_bases_unchecked(model, pt, method);
        return catastrophe_transform_transient(model, bases, renewal, -1);
    };

    std::vector<std::vector<double>> out(K);
    for (int r = 0; r < K; ++r) {
        const auto up_h = mixed(r, 1.0 + h);
        const auto dn_h = mixed(r, 1.0 - h);
        const auto up_h2 = mixed(r, 1.0 + 0.5 * h);
        const auto dn_h2 = mixed(r, 1.0 - 0.5 * h);
        out[r].resize(grid.nodes);
        for (std::size_t n = 0; n < grid.nodes; ++n) {
            const cplx d1 = (up_h.at(n)[0] - dn_h.at(n)[0]) / (2.0 * h);
            const cplx d2 = (up_h2.at(n)[0] - dn_h2.at(n)[0]) / h;
            out[r][n] = ((4.0 * d2 - d1) / 3.0).real();
        }
    }
    return out;
}

StationaryKpis stationary_kpis(const ValidatedModel& model) {
    const int K = model.type_count();
    const int S = model.state_count();
    const int dim = model.resource_dim();
    const StationaryWeights w = stationary_weights(model);
    const double eps = model.tail_epsilon();

    StationaryKpis out;
    out.mean_queue.assign(K, 0.0);
    out.loss_per_catastrophe.assign(K, 0.0);
    out.loss_rate.assign(K, 0.0);
    out.resource_mean.assign(K, std::vector<double>(dim, 0.0));
    out.resource_mean_total.assign(dim, 0.0);

    for (int j = 0; j < S; ++j) {
        const ArrivalRates rates = arrival_rates(model, j);
        const double horizon = model.sojourn_survival_quantile(j, eps);
        const double step = horizon / kKpiCells;

        std::vector<double> survival(kKpiCells + 1);
        for (int l = 0; l <= kKpiCells; ++l)
            survival[l] = 1.0 - model.sojourn_cdf(j, step * l);

        for (int r = 0; r < K; ++r) {
            const auto& b = model.service(r, j);
            std::vector<double> is(kKpiCells + 1);
            for (int l = 0; l <= kKpiCells; ++l) is[l] = b.integrated_survival(step * l);

            // int_0^inf (1-F_j(u)) int_0^u (1-B_jr) dx du
            const double time_weighted = trapezoid_product(survival, is, step);
            out.mean_queue[r] += (w.q[j] / w.mean_sojourn[j]) * rates.per_type[r] *
                                 time_weighted;
            for (int c = 0; c < dim; ++c)
                out.resource_mean[r][c] += (w.q[j] / w.mean_sojourn[j]) *
                                           rates.per_type[r] *
                                           model.arrival_resource_mean(r, j, c) *
                                           time_weighted;

            // int_0^inf int_0^u (1-B_jr) dx dF_j(u) over the kernel mixture;
            // deterministic sojourn atoms integrate exactly
            double embedded = 0.0;
            for (int e : model.kernel_from(j)) {
                const auto& entry = model.config().environment.kernel[e];
                if (entry.dist.has_atom()) {
                    embedded += entry.prob * b.integrated_survival(entry.dist.atom_location());
                    continue;
                }
                double prev_cdf = entry.dist.cdf(0.0);
                double acc = 0.0;
                for (int l = 1; l <= kKpiCells; ++l) {
                    const double cur_cdf = entry.dist.cdf(step * l);
                    acc += (cur_cdf - prev_cdf) * 0.5 * (is[l - 1] + is[l]);
                    prev_cdf = cur_cdf;
                }
                acc += (1.0 - prev_cdf) * is[kKpiCells];  // residual tail mass
                embedded += entry.prob * acc;
            }
            out.loss_per_catastrophe[r] += w.rho[j] * rates.per_type[r] * embedded;
            out.loss_rate[r] += (w.q[j] / w.mean_sojourn[j]) * rates.per_type[r] * embedded;
        }
    }

    for (int r = 0; r < K; ++r) {
        out.mean_queue_total += out.mean_queue[r];
        out.loss_per_catastrophe_total += out.loss_per_catastrophe[r];
        out.loss_rate_total += out.loss_rate[r];
        for (int c = 0; c < dim; ++c) out.resource_mean_total[c] += out.resource_mean[r][c];
    }
    return out;
}

PerformanceReport build_report(const ValidatedModel& model, Method method, bool with_pmf) {
    PerformanceReport report;
    report.kpis = stationary_kpis(model);
    if (with_pmf) {
        const double mean = report.kpis.mean_queue_total;
        report.pmf_nmax = static_cast<int>(std::ceil(mean + 10.0 * std::sqrt(mean))) + 1;
        report.queue_pmf = pgf_to_pmf(
            [&](cplx z) { return stationary_queue_pgf(model, z, method); },
            report.pmf_nmax);
    }
    return report;
}

MgiSpecialCase::MgiSpecialCase(const ValidatedModel& model) : model_(&model) {
    const int m = model.phase_count();
    for (int i = 0; i < model.state_count(); ++i) {
        const Eigen::MatrixXd& D0 = model.D0(i);
        const double alpha = -D0(0, 0);
        if (!(alpha > 0.0) ||
            (D0 + alpha * Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-12)
            throw NotDegenerateError("D0 must equal -alpha I");
        std::vector<double> p;
        for (std::size_t b = 0; b < model.batch_labels().size(); ++b) {
            const Eigen::MatrixXd& Dh = model.Dh(i, static_cast<int>(b));
            const double mass = Dh(0, 0) / alpha;
            if ((Dh - alpha * mass * Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() >
                1e-12)
                throw NotDegenerateError("every Dh must equal alpha p(h) I");
            p.push_back(mass);
        }
        alpha_.push_back(alpha);
        prob_.push_back(std::move(p));
    }
}

GridComplexSeq MgiSpecialCase::transient_pgf_path(std::span<const cplx> z, int state) const {
    const ValidatedModel& model = *model_;
    if (static_cast<int>(z.size()) != model.type_count())
        throw DomainError("z must have one entry per customer type");
    detail::require_unit_polydisc(z);
    const Grid grid = model.grid();
    const auto& labels = model.batch_labels();

    // 1 - sum_h p(h) prod_r [z_r (1 - B_ri(u)) + B_ri(u)]^{h_r}
    auto exponent_rate = [&](double u, bool left) {
        cplx mix = 0.0;
        for (std::size_t b = 0; b < labels.size(); ++b) {
            cplx factor = 1.0;
            for (std::size_t r = 0; r < labels[b].size(); ++r) {
                if (labels[b][r] == 0) continue;
                const double B = model.service_cdf(static_cast<int>(r), state, u, left);
                factor *= std::pow(z[r] * (1.0 - B) + B, labels[b][r]);
            }
            mix += prob_[state][b] * factor;
        }
        return 1.0 - mix;
    };

    GridComplexSeq out(grid, 1);
    out.at(0)[0] = 1.0;
    cplx integral = 0.0;
    cplx right = exponent_rate(0.0, false);
    for (std::size_t k = 1; k < grid.nodes; ++k) {
        const cplx left = exponent_rate(grid.time(k), true);
        integral += 0.5 * grid.step * (right + left);
        out.at(k)[0] = std::exp(-alpha_[state] * integral);
        right = exponent_rate(grid.time(k), false);
    }
    return out;
}

cplx MgiSpecialCase::transient_pgf(std::span<const cplx> z, double t, int state) const {
    const auto path = transient_pgf_path(z, state);
    return path.at(model_->grid().index_of(t))[0];
}

cplx MgiSpecialCase::catastrophe_pgf(std::span<const cplx> z, double t,
                                     const RenewalSolution& renewal) const {
    std::vector<GridComplexSeq> bases;
    for (int i = 0; i < model_->state_count(); ++i) bases.push_back(transient_pgf_path(z, i));
    const auto mixed = catastrophe_transform_transient(*model_, bases, renewal, -1);
    return mixed.at(model_->grid().index_of(t))[0];
}

cplx MgiSpecialCase::stationary_pgf(std::span<const cplx> z) const {
    std::vector<GridComplexSeq> bases;
    for (int i = 0; i < model_->state_count(); ++i) bases.push_back(transient_pgf_path(z, i));
    return catastrophe_transform_stationary(*model_, bases).value[0];
}

double MgiSpecialCase::loss_per_catastrophe_total() const {
    const ValidatedModel& model = *model_;
    const StationaryWeights w = stationary_weights(model);
    const auto& labels = model.batch_labels();
    double total = 0.0;
    for (int j = 0; j < model.state_count(); ++j) {
        for (int r = 0; r < model.type_count(); ++r) {
            double mean_batch = 0.0;
            for (std::size_t b = 0; b < labels.size(); ++b)
                mean_batch += labels[b][r] * prob_[j][b];
            const double lambda_jr = alpha_[j] * mean_batch;

            const auto& svc = model.service(r, j);
            const double horizon = model.sojourn_survival_quantile(j, model.tail_epsilon());
            const double step = horizon / kKpiCells;
            double embedded = 0.0;
            for (int e : model.kernel_from(j)) {
                const auto& entry = model.config().environment.kernel[e];
                if (entry.dist.has_atom()) {
                    embedded +=
                        entry.prob * svc.integrated_survival(entry.dist.atom_location());
                    continue;
                }
                double prev = entry.dist.cdf(0.0), acc = 0.0;
                for (int l = 1; l <= kKpiCells; ++l) {
                    const double cur = entry.dist.cdf(step * l);
                    acc += (cur - prev) * 0.5 *
                           (svc.integrated_survival(step * (l - 1)) +
                            svc.integrated_survival(step * l));
                    prev = cur;
                }
                acc += (1.0 - prev) * svc.integrated_survival(horizon);
                embedded += entry.prob * acc;
            }
            total += w.rho[j] * lambda_jr * embedded;
        }
    }
    return total;
}

double MgiSpecialCase::loss_rate_total() const {
    const StationaryWeights w = stationary_weights(*model_);
    return loss_per_catastrophe_total() / w.mean_cycle;
}

}  // namespace mmapq
