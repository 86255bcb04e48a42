#include "mmapq/transient.hpp"

#include <cmath>

namespace mmapq {

namespace {

void check_point(const ValidatedModel& model, const TransformPoint& pt,
                 bool bounded = true) {
    const auto K = static_cast<std::size_t>(model.type_count());
    const auto k = static_cast<std::size_t>(model.resource_dim());
    if (pt.z1.size() != K || pt.z2.size() != K)
        throw DomainError("z1/z2 must have one entry per customer type");
    if (pt.s1.size() != k || pt.s2.size() != k)
        throw DomainError("s1/s2 must have one entry per resource component");
    if (bounded) {
        detail::require_unit_polydisc(pt.z1);
        detail::require_unit_polydisc(pt.z2);
    }
    for (double s : pt.s1)
        if (s < 0.0) throw DomainError("s1 entries must be nonnegative");
    for (double s : pt.s2)
        if (s < 0.0) throw DomainError("s2 entries must be nonnegative");
}

// constant-in-time factors of the kernel bracket
struct BracketTerms {
    std::vector<cplx> served;      // z_{r2} * G_ri(s2)
    std::vector<cplx> in_service;  // z_{r1} * F_ri(s1)
};

BracketTerms bracket_terms(const ValidatedModel& model, int state,
                           const TransformPoint& pt) {
    BracketTerms bt;
    for (int r = 0; r < model.type_count(); ++r) {
        bt.served.push_back(pt.z2[r] * model.departure_lst(r, state, pt.s2));
        bt.in_service.push_back(pt.z1[r] * model.arrival_lst(r, state, pt.s1));
    }
    return bt;
}

Eigen::MatrixXcd kernel_at(const ValidatedModel& model, int state,
                           const BracketTerms& bt, double t, bool left) {
    const int m = model.phase_count();
    const auto& labels = model.batch_labels();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m, m);
    for (std::size_t b = 0; b < labels.size(); ++b) {
        cplx factor = 1.0;
        for (std::size_t r = 0; r < labels[b].size(); ++r) {
            if (labels[b][r] == 0) continue;
            const double B = model.service_cdf(static_cast<int>(r), state, t, left);
            const cplx bracket =
                bt.served[r] * B + bt.in_service[r] * (1.0 - B);
            factor *= std::pow(bracket, labels[b][r]);
        }
        out += factor * model.Dh(state, static_cast<int>(b)).cast<cplx>();
    }
    return out;
}

void require_atoms_on_grid(const ValidatedModel& model, int state, const Grid& grid) {
    for (int r = 0; r < model.type_count(); ++r) {
        const auto& b = model.service(r, state);
        if (b.has_atom() && b.atom_location() < grid.horizon() &&
            !grid.contains(b.atom_location()))
            throw GridError("deterministic service jump epoch must lie on the grid");
    }
}

void map_assign(std::span<cplx> dst, const Eigen::MatrixXcd& src) {
    Eigen::Map<Eigen::MatrixXcd>(dst.data(), src.rows(), src.cols()) = src;
}

}  // namespace

Eigen::MatrixXcd service_kernel(const ValidatedModel& model, int state,
                                const TransformPoint& pt, double t) {
    if (t < 0.0) throw DomainError("t must be >= 0");
    check_point(model, pt);
    return kernel_at(model, state, bracket_terms(model, state, pt), t, false);
}

namespace {

GridComplexSeq transform_path_impl(const ValidatedModel& model, int state,
                                   const TransformPoint& pt, Method method,
                                   std::size_t upto) {
    const Grid grid = model.grid();
    if (upto >= grid.nodes) throw GridError("node index beyond grid horizon");
    require_atoms_on_grid(model, state, grid);

    const int m = model.phase_count();
    const auto dim = static_cast<std::size_t>(m) * m;
    const Eigen::MatrixXcd D0 = model.D0(state).cast<cplx>();
    const BracketTerms bt = bracket_terms(model, state, pt);

    GridComplexSeq out(Grid{grid.step, upto + 1}, dim);
    map_assign(out.at(0), Eigen::MatrixXcd::Identity(m, m));

    if (method == Method::closed_form) {
        Eigen::MatrixXcd integral = Eigen::MatrixXcd::Zero(m, m);
        Eigen::MatrixXcd right = D0 + kernel_at(model, state, bt, 0.0, false);
        for (std::size_t k = 1; k <= upto; ++k) {
            const double tk = grid.time(k);
            const Eigen::MatrixXcd left = D0 + kernel_at(model, state, bt, tk, true);
            integral += (0.5 * grid.step) * (right + left);
            map_assign(out.at(k), matrix_exp(integral));
            right = D0 + kernel_at(model, state, bt, tk, false);
        }
        return out;
    }

    // classical 4th-order stepping; kernel at half-steps by linear
    // interpolation of the cell-endpoint samples
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(m, m);
    const double h = grid.step;
    for (std::size_t k = 1; k <= upto; ++k) {
        const Eigen::MatrixXcd M0 =
            D0 + kernel_at(model, state, bt, grid.time(k - 1), false);
        const Eigen::MatrixXcd M1 = D0 + kernel_at(model, state, bt, grid.time(k), true);
        const Eigen::MatrixXcd Mh = 0.5 * (M0 + M1);
        const Eigen::MatrixXcd k1 = M0 * A;
        const Eigen::MatrixXcd k2 = Mh * (A + (0.5 * h) * k1);
        const Eigen::MatrixXcd k3 = Mh * (A + (0.5 * h) * k2);
        const Eigen::MatrixXcd k4 = M1 * (A + h * k3);
        A += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        map_assign(out.at(k), A);
    }
    return out;
}

}  // namespace

GridComplexSeq transient_transform_path(const ValidatedModel& model, int state,
                                        const TransformPoint& pt, Method method,
                                        std::size_t upto) {
    check_point(model, pt);
    return transform_path_impl(model, state, pt, method, upto);
}

namespace detail {
GridComplexSeq transient_transform_path_unchecked(const ValidatedModel& model,
                                                  int state, const TransformPoint& pt,
                                                  Method method, std::size_t upto) {
    check_point(model, pt, /*bounded=*/false);
    return transform_path_impl(model, state, pt, method, upto);
}
}  // namespace detail

Eigen::MatrixXcd transient_transform(const ValidatedModel& model, int state,
                                     const TransformPoint& pt, double t, Method method) {
    const std::size_t upto = model.grid().index_of(t);
    const auto path = transient_transform_path(model, state, pt, method, upto);
    const int m = model.phase_count();
    return Eigen::Map<const Eigen::MatrixXcd>(path.at(upto).data(), m, m);
}

Eigen::MatrixXcd busy_servers_transform(const ValidatedModel& model, int state,
                                        std::span<const cplx> z1,
                                        std::span<const double> s1, double t,
                                        Method method) {
    TransformPoint pt = TransformPoint::neutral(model.type_count(), model.resource_dim());
    pt.z1.assign(z1.begin(), z1.end());
    pt.s1.assign(s1.begin(), s1.end());
    return transient_transform(model, state, pt, t, method);
}

Eigen::MatrixXcd served_transform(const ValidatedModel& model, int state,
                                  std::span<const cplx> z2,
                                  std::span<const double> s2, double t, Method method) {
    TransformPoint pt = TransformPoint::neutral(model.type_count(), model.resource_dim());
    pt.z2.assign(z2.begin(), z2.end());
    pt.s2.assign(s2.begin(), s2.end());
    return transient_transform(model, state, pt, t, method);
}

Eigen::MatrixXcd initial_customers_transform(const ValidatedModel& model, int state,
                                             const TransformPoint& pt, double t,
                                             std::span<const int> h0, Method method) {
    if (static_cast<int>(h0.size()) != model.type_count())
        throw DomainError("h0 must have one entry per customer type");
    for (int n : h0)
        if (n < 0) throw DomainError("h0 entries must be nonnegative");
    check_point(model, pt);

    cplx prefactor = 1.0;
    for (int r = 0; r < model.type_count(); ++r) {
        if (h0[r] == 0) continue;
        const double B = model.service_cdf(r, state, t);
        const cplx served = pt.z2[r] * model.departure_lst(r, state, pt.s2);
        prefactor *= std::pow(served * B + (1.0 - B), h0[r]);
    }
    return prefactor * transient_transform(model, state, pt, t, method);
}

cplx renewal_input_transform(const ValidatedModel& model, int state,
                             const BatchLaw& batch_law,
                             const Distribution& interarrival,
                             const TransformPoint& pt, double t) {
    check_point(model, pt);
    double total = 0.0;
    for (const auto& [label, prob] : batch_law.entries) {
        if (static_cast<int>(label.size()) != model.type_count())
            throw DomainError("batch label length must equal type count");
        if (prob < 0.0) throw NonProbabilityError("batch probabilities must be >= 0");
        total += prob;
    }
    if (std::abs(total - 1.0) > 1e-10)
        throw NonProbabilityError("batch law must sum to 1");

    const Grid grid = model.grid();
    const std::size_t upto = grid.index_of(t);
    const BracketTerms bt = bracket_terms(model, state, pt);

    // batch kernel on the grid
    std::vector<cplx> S(upto + 1);
    for (std::size_t k = 0; k <= upto; ++k) {
        cplx sk = 0.0;
        for (const auto& [label, prob] : batch_law.entries) {
            cplx factor = 1.0;
            for (std::size_t r = 0; r < label.size(); ++r) {
                if (label[r] == 0) continue;
                const double B =
                    model.service_cdf(static_cast<int>(r), state, grid.time(k));
                factor *= std::pow(bt.served[r] * B + bt.in_service[r] * (1.0 - B),
                                   label[r]);
            }
            sk += prob * factor;
        }
        S[k] = sk;
    }

    // dA mass per cell from CDF increments
    std::vector<double> dA(upto + 1, 0.0);
    for (std::size_t l = 1; l <= upto; ++l)
        dA[l] = interarrival.cdf(grid.time(l)) - interarrival.cdf(grid.time(l - 1));

    // A(t_n) = 1 - A(t_n) + sum_l dA_l * avg of S*A at the cell ends, solved
    // forward; the unknown enters only through the l = 1 half-weight.
    std::vector<cplx> sol(upto + 1);
    sol[0] = 1.0;
    for (std::size_t n = 1; n <= upto; ++n) {
        cplx rhs = 1.0 - interarrival.cdf(grid.time(n));
        for (std::size_t l = 1; l <= n; ++l) {
            rhs += 0.5 * dA[l] * S[n - l] * sol[n - l];
            if (l > 1) rhs += 0.5 * dA[l] * S[n - l + 1] * sol[n - l + 1];
        }
        const cplx denom = 1.0 - 0.5 * dA[1] * S[n];
        sol[n] = rhs / denom;
    }
    return sol[upto];
}

Eigen::MatrixXcd batch_service_pgf(const ValidatedModel& model, int state,
                                   const Distribution& service, cplx z, double t,
                                   BatchServiceMode mode) {
    if (std::abs(z) > 1.0 + 1e-12) throw DomainError("|z| must not exceed 1");
    const Grid grid = model.grid();
    const std::size_t upto = grid.index_of(t);
    if (service.has_atom() && service.atom_location() < grid.horizon() &&
        !grid.contains(service.atom_location()))
        throw GridError("deterministic service jump epoch must lie on the grid");

    const int m = model.phase_count();
    const Eigen::MatrixXcd D0 = model.D0(state).cast<cplx>();
    const auto& labels = model.batch_labels();

    // group matrices: whole_batch folds everything into one D1, the
    // same-batch mode groups by total batch size
    std::vector<std::pair<int, Eigen::MatrixXd>> groups;
    if (mode == BatchServiceMode::whole_batch) {
        Eigen::MatrixXd D1 = Eigen::MatrixXd::Zero(m, m);
        for (std::size_t b = 0; b < labels.size(); ++b) D1 += model.Dh(state, b);
        groups.emplace_back(1, std::move(D1));
    } else {
        for (std::size_t b = 0; b < labels.size(); ++b) {
            int n = 0;
            for (int hr : labels[b]) n += hr;
            auto it = std::find_if(groups.begin(), groups.end(),
                                   [n](const auto& g) { return g.first == n; });
            if (it == groups.end())
                groups.emplace_back(n, model.Dh(state, b));
            else
                it->second += model.Dh(state, b);
        }
    }

    auto kernel = [&](double u, bool left) {
        const double B = left ? service.cdf_left(u) : service.cdf(u);
        Eigen::MatrixXcd out = D0;
        const cplx bracket = B + z * (1.0 - B);
        for (const auto& [n, Dn] : groups)
            out += std::pow(bracket, n) * Dn.cast<cplx>();
        return out;
    };

    Eigen::MatrixXcd integral = Eigen::MatrixXcd::Zero(m, m);
    Eigen::MatrixXcd right = kernel(0.0, false);
    for (std::size_t k = 1; k <= upto; ++k) {
        const Eigen::MatrixXcd left = kernel(grid.time(k), true);
        integral += (0.5 * grid.step) * (right + left);
        right = kernel(grid.time(k), false);
    }
    return matrix_exp(integral);
}

}  // namespace mmapq
