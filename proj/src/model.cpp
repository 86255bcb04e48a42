#include "mmapq/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace mmapq {

namespace {

constexpr double kGeneratorTol = 1e-10;

std::string at(const std::string& block, int i) { return block + "[" + std::to_string(i) + "]"; }

void check_distribution(const Distribution& d, const std::string& where,
                        std::vector<Violation>& out) {
    for (const auto& msg : d.check()) out.push_back({"BadDistribution", where, msg});
}

}  // namespace

std::vector<Violation> validate(const ModelConfig& cfg) {
    std::vector<Violation> v;
    const int m = cfg.mmap.phase_count;
    const int K = cfg.mmap.type_count;
    const int S = cfg.environment.state_count;

    if (m < 1) v.push_back({"IndexError", "mmap.phases", "phase count must be >= 1"});
    if (K < 1) v.push_back({"IndexError", "mmap.types", "type count must be >= 1"});
    if (S < 1) v.push_back({"IndexError", "environment.states", "state count must be >= 1"});
    if (m < 1 || K < 1 || S < 1) return v;

    // batch labels
    std::set<BatchLabel> seen;
    for (std::size_t b = 0; b < cfg.mmap.batch_labels.size(); ++b) {
        const auto& h = cfg.mmap.batch_labels[b];
        const std::string where = at("mmap.batches", static_cast<int>(b));
        if (static_cast<int>(h.size()) != K) {
            v.push_back({"IndexError", where, "label length must equal type count"});
            continue;
        }
        if (std::any_of(h.begin(), h.end(), [](int x) { return x < 0; }))
            v.push_back({"IndexError", where, "label entries must be nonnegative"});
        if (std::all_of(h.begin(), h.end(), [](int x) { return x == 0; }))
            v.push_back({"IndexError", where, "label must not be the zero vector"});
        if (!seen.insert(h).second)
            v.push_back({"IndexError", where, "duplicate batch label"});
    }

    // characteristic matrices
    if (static_cast<int>(cfg.mmap.states.size()) != S) {
        v.push_back({"IndexError", "mmap.states",
                     "one (D0, {Dh}) block required per environment state"});
        return v;
    }
    for (int i = 0; i < S; ++i) {
        const auto& blk = cfg.mmap.states[i];
        const std::string where = at("mmap.states", i);
        if (blk.D0.rows() != m || blk.D0.cols() != m) {
            v.push_back({"IndexError", where + ".D0", "matrix must be m x m"});
            continue;
        }
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                const double x = blk.D0(r, c);
                if (r == c && !(x < 0.0))
                    v.push_back({"NonGenerator", where + ".D0",
                                 "diagonal entries must be strictly negative"});
                if (r != c && x < 0.0)
                    v.push_back({"NonGenerator", where + ".D0",
                                 "off-diagonal entries must be nonnegative"});
            }
        }
        if (blk.Dh.size() != cfg.mmap.batch_labels.size()) {
            v.push_back({"IndexError", where + ".batches",
                         "one matrix required per batch label"});
            continue;
        }
        Eigen::MatrixXd D = blk.D0;
        for (std::size_t b = 0; b < blk.Dh.size(); ++b) {
            const auto& Dh = blk.Dh[b];
            if (Dh.rows() != m || Dh.cols() != m) {
                v.push_back({"IndexError", where + ".batches", "matrix must be m x m"});
                continue;
            }
            if ((Dh.array() < 0.0).any())
                v.push_back({"NonGenerator", where + ".batches",
                             "batch matrices must be entrywise nonnegative"});
            D += Dh;
        }
        const Eigen::VectorXd rows = D.rowwise().sum();
        for (int r = 0; r < m; ++r) {
            if (std::abs(rows(r)) > kGeneratorTol) {
                v.push_back({"NonGenerator", where,
                             "row " + std::to_string(r) + " of D = D0 + sum Dh sums to " +
                                 std::to_string(rows(r)) + ", expected 0"});
            }
        }
    }

    // environment
    if (static_cast<int>(cfg.environment.initial.size()) != S) {
        v.push_back({"IndexError", "environment.initial", "length must equal state count"});
    } else {
        double sum = 0.0;
        for (double p : cfg.environment.initial) {
            if (p < 0.0)
                v.push_back({"ImproperKernel", "environment.initial",
                             "probabilities must be nonnegative"});
            sum += p;
        }
        if (std::abs(sum - 1.0) > kGeneratorTol)
            v.push_back({"ImproperKernel", "environment.initial",
                         "initial distribution sums to " + std::to_string(sum)});
    }
    std::vector<double> rowsum(S, 0.0);
    for (std::size_t e = 0; e < cfg.environment.kernel.size(); ++e) {
        const auto& entry = cfg.environment.kernel[e];
        const std::string where = at("environment.kernel", static_cast<int>(e));
        if (entry.from < 0 || entry.from >= S || entry.to < 0 || entry.to >= S) {
            v.push_back({"IndexError", where, "state index out of range"});
            continue;
        }
        if (entry.prob < 0.0 || entry.prob > 1.0)
            v.push_back({"ImproperKernel", where, "transition probability outside [0,1]"});
        check_distribution(entry.dist, where + ".dist", v);
        rowsum[entry.from] += entry.prob;
    }
    for (int i = 0; i < S; ++i) {
        if (std::abs(rowsum[i] - 1.0) > kGeneratorTol)
            v.push_back({"ImproperKernel", at("environment.kernel-row", i),
                         "outgoing probabilities sum to " + std::to_string(rowsum[i]) +
                             ", expected 1"});
    }

    // service and resources
    const auto& sr = cfg.service_resources;
    if (static_cast<int>(sr.service.size()) != K) {
        v.push_back({"IndexError", "service", "one row of laws required per type"});
    } else {
        for (int r = 0; r < K; ++r) {
            if (static_cast<int>(sr.service[r].size()) != S) {
                v.push_back({"IndexError", at("service", r), "one law required per state"});
                continue;
            }
            for (int i = 0; i < S; ++i)
                check_distribution(sr.service[r][i], at("service", r) + at("", i), v);
        }
    }
    auto check_resource = [&](const std::vector<std::vector<Distribution>>& rs,
                              const std::string& name) {
        if (static_cast<int>(rs.size()) != K) {
            v.push_back({"IndexError", name, "one component list required per type"});
            return;
        }
        const std::size_t dim = rs.front().size();
        if (dim == 0) v.push_back({"IndexError", name, "resource dimension must be >= 1"});
        for (int r = 0; r < K; ++r) {
            if (rs[r].size() != dim) {
                v.push_back({"IndexError", at(name, r),
                             "all types must use the same resource dimension"});
                continue;
            }
            for (std::size_t c = 0; c < dim; ++c)
                check_distribution(rs[r][c], at(name, r) + at("", static_cast<int>(c)), v);
        }
    };
    check_resource(sr.arrival_resource, "resources.arrival");
    check_resource(sr.departure_resource, "resources.departure");
    if (!sr.arrival_resource.empty() && !sr.departure_resource.empty() &&
        !sr.arrival_resource.front().empty() && !sr.departure_resource.front().empty() &&
        sr.arrival_resource.front().size() != sr.departure_resource.front().size())
        v.push_back({"IndexError", "resources",
                     "arrival and departure resource dimensions differ"});

    if (static_cast<int>(cfg.initial_customers.size()) != K) {
        v.push_back({"IndexError", "initial_customers", "length must equal type count"});
    } else if (std::any_of(cfg.initial_customers.begin(), cfg.initial_customers.end(),
                           [](int x) { return x < 0; })) {
        v.push_back({"IndexError", "initial_customers", "entries must be nonnegative"});
    }

    // numeric grid
    try {
        (void)Grid::over(cfg.numeric.horizon, cfg.numeric.step);
    } catch (const GridError& e) {
        v.push_back({"GridError", "numeric", e.what()});
    }
    if (!(cfg.numeric.tail_epsilon > 0.0) || cfg.numeric.tail_epsilon >= 1.0)
        v.push_back({"GridError", "numeric.tail_epsilon", "must lie in (0,1)"});

    return v;
}

ValidatedModel ValidatedModel::create(ModelConfig cfg) {
    auto violations = validate(cfg);
    if (!violations.empty()) throw ModelError(std::move(violations));
    return ValidatedModel(std::move(cfg));
}

ValidatedModel::ValidatedModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
    const int S = cfg_.environment.state_count;
    full_generator_.reserve(S);
    for (int i = 0; i < S; ++i) {
        Eigen::MatrixXd D = cfg_.mmap.states[i].D0;
        for (const auto& Dh : cfg_.mmap.states[i].Dh) D += Dh;
        full_generator_.push_back(std::move(D));
    }
    embedded_ = Eigen::MatrixXd::Zero(S, S);
    mean_sojourn_.assign(S, 0.0);
    kernel_from_.assign(S, {});
    for (std::size_t e = 0; e < cfg_.environment.kernel.size(); ++e) {
        const auto& entry = cfg_.environment.kernel[e];
        embedded_(entry.from, entry.to) += entry.prob;
        mean_sojourn_[entry.from] += entry.prob * entry.dist.mean();
        kernel_from_[entry.from].push_back(static_cast<int>(e));
    }
}

double ValidatedModel::sojourn_cdf(int state, double t) const {
    double f = 0.0;
    for (int e : kernel_from_[state]) {
        const auto& entry = cfg_.environment.kernel[e];
        f += entry.prob * entry.dist.cdf(t);
    }
    return f;
}

double ValidatedModel::sojourn_cdf_left(int state, double t) const {
    double f = 0.0;
    for (int e : kernel_from_[state]) {
        const auto& entry = cfg_.environment.kernel[e];
        f += entry.prob * entry.dist.cdf_left(t);
    }
    return f;
}

double ValidatedModel::sojourn_survival_quantile(int state, double eps) const {
    double hi = std::max(mean_sojourn_[state], 1e-12);
    while (1.0 - sojourn_cdf(state, hi) > eps) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (1.0 - sojourn_cdf(state, mid) > eps ? lo : hi) = mid;
    }
    return hi;
}

double ValidatedModel::arrival_lst(int type, int state, std::span<const double> s) const {
    (void)state;
    double v = 1.0;
    const auto& comps = cfg_.service_resources.arrival_resource[type];
    for (std::size_t c = 0; c < comps.size(); ++c) v *= comps[c].lst(s[c]);
    return v;
}

double ValidatedModel::departure_lst(int type, int state, std::span<const double> s) const {
    (void)state;
    double v = 1.0;
    const auto& comps = cfg_.service_resources.departure_resource[type];
    for (std::size_t c = 0; c < comps.size(); ++c) v *= comps[c].lst(s[c]);
    return v;
}

}  // namespace mmapq
