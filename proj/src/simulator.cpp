#include "mmapq/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <queue>
#include <thread>

#include "mmapq/linalg.hpp"
#include "mmapq/map_algebra.hpp"
#include "mmapq/rng.hpp"

namespace mmapq {

namespace {

constexpr std::uint64_t kStreamEnv = 0;
constexpr std::uint64_t kStreamMmap = 1;
constexpr std::uint64_t kStreamService = 2;
constexpr std::uint64_t kStreamArrivalRes = 3;
constexpr std::uint64_t kStreamDepartureRes = 4;
constexpr std::uint64_t kStreamThinning = 5;
constexpr std::uint64_t kStreamPhase = 6;

struct MmapEvent {
    double cum = 0.0;  // cumulative probability within the phase's event race
    int next_phase = 0;
    int batch = -1;  // -1: phase change without arrival
};

struct PhaseTable {
    double exit_rate = 0.0;
    std::vector<MmapEvent> events;
};

struct Tables {
    std::vector<std::vector<PhaseTable>> mmap;  // [state][phase]
    std::vector<std::vector<double>> phase_law; // cumulative stationary law per state
};

Tables build_tables(const ValidatedModel& model) {
    Tables t;
    const int m = model.phase_count();
    const auto& labels = model.batch_labels();
    for (int i = 0; i < model.state_count(); ++i) {
        std::vector<PhaseTable> per_phase(m);
        for (int p = 0; p < m; ++p) {
            PhaseTable& tab = per_phase[p];
            tab.exit_rate = -model.D0(i)(p, p);
            double acc = 0.0;
            for (int j = 0; j < m; ++j) {
                if (j != p && model.D0(i)(p, j) > 0.0) {
                    acc += model.D0(i)(p, j);
                    tab.events.push_back({acc, j, -1});
                }
            }
            for (std::size_t b = 0; b < labels.size(); ++b) {
                for (int j = 0; j < m; ++j) {
                    const double rate = model.Dh(i, static_cast<int>(b))(p, j);
                    if (rate > 0.0) {
                        acc += rate;
                        tab.events.push_back({acc, j, static_cast<int>(b)});
                    }
                }
            }
            for (auto& e : tab.events) e.cum /= tab.exit_rate;
        }
        t.mmap.push_back(std::move(per_phase));

        const Eigen::RowVectorXd pi = stationary_phase(model, i);
        std::vector<double> cum(m);
        double acc = 0.0;
        for (int p = 0; p < m; ++p) {
            acc += pi(p);
            cum[p] = acc;
        }
        t.phase_law.push_back(std::move(cum));
    }
    return t;
}

int pick_cumulative(const std::vector<double>& cum, double u) {
    for (std::size_t i = 0; i < cum.size(); ++i)
        if (u <= cum[i]) return static_cast<int>(i);
    return static_cast<int>(cum.size()) - 1;
}

struct Customer {
    double completion;
    int type;
    std::vector<double> zeta;  // empty for initial customers
    bool operator>(const Customer& other) const { return completion > other.completion; }
};

// slot layout of the per-replication sample vector
struct Layout {
    std::vector<Estimate> prototype;  // quantity/type/t filled, value empty
    int slot(const std::string& q, int type, double t) {
        Estimate e;
        e.quantity = q;
        e.type_index = type;
        e.t = t;
        prototype.push_back(std::move(e));
        return static_cast<int>(prototype.size()) - 1;
    }
};

std::string point_label(const std::string& base, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s@%g", base.c_str(), v);
    return buf;
}

struct RepOutcome {
    std::vector<double> samples;  // NaN = replication does not contribute
    std::uint64_t events = 0;
    std::uint64_t violations = 0;
};

struct Slots {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    int terminal_ns0 = 0, mean_queue0 = 0, mean_queue_total = 0;
    int arrival_rate0 = 0, served_rate0 = 0, destroyed_rate0 = 0, destroyed_rate_total = 0;
    int per_cat0 = 0, per_cat_total = 0, cat_rate = 0;
    int res_avg0 = 0, res_avg_total0 = 0;
    int pgf0 = -1, lst0 = -1, kept0 = -1, served_pgf0 = -1;
};

Slots build_layout(const ValidatedModel& model, const SimOptions& opt, Layout& layout) {
    const int K = model.type_count();
    const int dim = model.resource_dim();
    const double T = opt.horizon;
    Slots s;

    s.terminal_ns0 = layout.slot("terminal_in_service", 0, T);
    for (int r = 1; r < K; ++r) layout.slot("terminal_in_service", r, T);
    s.mean_queue0 = layout.slot("mean_queue", 0, s.nan);
    for (int r = 1; r < K; ++r) layout.slot("mean_queue", r, s.nan);
    s.mean_queue_total = layout.slot("mean_queue_total", -1, s.nan);
    s.arrival_rate0 = layout.slot("arrival_rate", 0, s.nan);
    for (int r = 1; r < K; ++r) layout.slot("arrival_rate", r, s.nan);
    s.served_rate0 = layout.slot("served_rate", 0, s.nan);
    for (int r = 1; r < K; ++r) layout.slot("served_rate", r, s.nan);
    s.destroyed_rate0 = layout.slot("destroyed_rate", 0, s.nan);
    for (int r = 1; r < K; ++r) layout.slot("destroyed_rate", r, s.nan);
    s.destroyed_rate_total = layout.slot("destroyed_rate_total", -1, s.nan);
    s.per_cat0 = layout.slot("destroyed_per_catastrophe", 0, s.nan);
    for (int r = 1; r < K; ++r) layout.slot("destroyed_per_catastrophe", r, s.nan);
    s.per_cat_total = layout.slot("destroyed_per_catastrophe_total", -1, s.nan);
    s.cat_rate = layout.slot("catastrophe_rate", -1, s.nan);

    s.res_avg0 = static_cast<int>(layout.prototype.size());
    for (int r = 0; r < K; ++r)
        for (int c = 0; c < dim; ++c)
            layout.slot(dim == 1 ? "resource_timeavg"
                                 : "resource_timeavg[" + std::to_string(c) + "]",
                        r, s.nan);
    s.res_avg_total0 = static_cast<int>(layout.prototype.size());
    for (int c = 0; c < dim; ++c)
        layout.slot(dim == 1 ? "resource_timeavg_total"
                             : "resource_timeavg_total[" + std::to_string(c) + "]",
                    -1, s.nan);

    if (!opt.pgf_z.empty()) {
        s.pgf0 = static_cast<int>(layout.prototype.size());
        for (double z : opt.pgf_z) layout.slot(point_label("pgf_in_service", z), -1, T);
        s.served_pgf0 = static_cast<int>(layout.prototype.size());
        for (double z : opt.pgf_z) layout.slot(point_label("pgf_served", z), -1, T);
    }
    if (!opt.lst_s.empty()) {
        s.lst0 = static_cast<int>(layout.prototype.size());
        for (double v : opt.lst_s) layout.slot(point_label("lst_resource", v), -1, T);
    }
    if (!opt.thinning.empty() && !opt.pgf_z.empty()) {
        s.kept0 = static_cast<int>(layout.prototype.size());
        for (double z : opt.pgf_z) layout.slot(point_label("pgf_kept", z), -1, T);
    }
    return s;
}

RepOutcome run_replication(const ValidatedModel& model, const SimOptions& opt,
                           const Tables& tables, const Slots& slots,
                           std::size_t n_slots, std::uint64_t rep) {
    const int K = model.type_count();
    const int dim = model.resource_dim();
    const double T = opt.horizon;
    const double window_start = opt.stat_window_fraction * T;
    const double window_len = T - window_start;

    RngStream env_rng(opt.seed, rep, kStreamEnv);
    RngStream mmap_rng(opt.seed, rep, kStreamMmap);
    RngStream service_rng(opt.seed, rep, kStreamService);
    RngStream zeta_rng(opt.seed, rep, kStreamArrivalRes);
    RngStream sigma_rng(opt.seed, rep, kStreamDepartureRes);
    RngStream thin_rng(opt.seed, rep, kStreamThinning);
    RngStream phase_rng(opt.seed, rep, kStreamPhase);

    // initial environment state and phase
    int env = pick_cumulative(
        [&] {
            std::vector<double> cum;
            double acc = 0.0;
            for (double p : model.initial_env()) cum.push_back(acc += p);
            return cum;
        }(),
        env_rng.uniform());
    int phase = opt.fixed_initial_phase
                    ? *opt.fixed_initial_phase
                    : pick_cumulative(tables.phase_law[env], phase_rng.uniform());

    // full-horizon counters (conservation, terminal values)
    std::vector<long long> arrivals(K, 0), served(K, 0), in_service(K, 0), destroyed(K, 0);
    std::vector<long long> kept(K, 0);
    std::vector<double> alpha(static_cast<std::size_t>(K) * dim, 0.0);
    std::vector<double> beta(dim, 0.0);
    std::vector<double> ns_integral(K, 0.0);
    std::vector<double> alpha_integral(static_cast<std::size_t>(K) * dim, 0.0);
    // windowed counters for rate estimates, so early-horizon transients do
    // not bias the stationary comparisons
    std::vector<long long> arrivals_w(K, 0), served_w(K, 0), destroyed_w(K, 0);
    long long catastrophes_w = 0;
    // the per-catastrophe ratio uses every epoch from t = 0: each cycle
    // starts empty, so the flush counts are i.i.d., while a windowed ratio
    // would length-bias the first in-window sojourn
    long long catastrophes_all = 0;
    std::vector<long long> destroyed_by_cat(K, 0);

    std::priority_queue<Customer, std::vector<Customer>, std::greater<>> in_flight;

    // initial customers: fresh service draws, no arrival resources
    for (int r = 0; r < K; ++r) {
        for (int n = 0; n < model.initial_customers()[r]; ++n) {
            in_flight.push({model.service(r, env).sample(service_rng), r, {}});
            ++in_service[r];
        }
    }

    auto schedule_env = [&](double now) {
        const auto& from = model.kernel_from(env);
        double u = env_rng.uniform();
        double acc = 0.0;
        int pick = from.back();
        for (int e : from) {
            acc += model.config().environment.kernel[e].prob;
            if (u <= acc) {
                pick = e;
                break;
            }
        }
        const auto& entry = model.config().environment.kernel[pick];
        return std::pair{now + entry.dist.sample(env_rng), entry.to};
    };
    auto schedule_mmap = [&](double now) {
        const double rate = tables.mmap[env][phase].exit_rate;
        return now - std::log(mmap_rng.uniform()) / rate;
    };

    double clock = 0.0;
    auto [env_next, env_to] = schedule_env(0.0);
    double mmap_next = schedule_mmap(0.0);

    double last = 0.0;
    auto advance_integrals = [&](double to) {
        const double lo = std::max(last, window_start);
        const double hi = std::min(to, T);
        if (hi > lo) {
            const double w = hi - lo;
            for (int r = 0; r < K; ++r) ns_integral[r] += w * in_service[r];
            for (std::size_t i = 0; i < alpha.size(); ++i) alpha_integral[i] += w * alpha[i];
        }
        last = to;
    };

    RepOutcome out;
    auto check_conservation = [&] {
        for (int r = 0; r < K; ++r) {
            const long long lhs = arrivals[r] + model.initial_customers()[r];
            if (lhs != served[r] + in_service[r] + destroyed[r]) ++out.violations;
        }
    };

    while (true) {
        double next = env_next;
        int kind = 0;  // 0 env, 1 completion, 2 mmap
        if (!in_flight.empty() && in_flight.top().completion <= next) {
            next = in_flight.top().completion;
            kind = 1;
        }
        if (mmap_next < next) {
            next = mmap_next;
            kind = 2;
        }
        if (next > T) break;
        if (++out.events > opt.event_cap)
            throw ExplosionGuardError("replication exceeded the event cap");
        advance_integrals(next);
        clock = next;

        const bool in_window = clock >= window_start;
        if (kind == 1) {
            const Customer c = in_flight.top();
            in_flight.pop();
            --in_service[c.type];
            ++served[c.type];
            if (in_window) ++served_w[c.type];
            for (int x = 0; x < dim; ++x) {
                if (!c.zeta.empty()) alpha[static_cast<std::size_t>(c.type) * dim + x] -= c.zeta[x];
                beta[x] += model.departure_resource(c.type)[x].sample(sigma_rng);
            }
        } else if (kind == 2) {
            const PhaseTable& tab = tables.mmap[env][phase];
            const double u = mmap_rng.uniform();
            const MmapEvent* ev = &tab.events.back();
            for (const auto& e : tab.events) {
                if (u <= e.cum) {
                    ev = &e;
                    break;
                }
            }
            phase = ev->next_phase;
            if (ev->batch >= 0) {
                const auto& label = model.batch_labels()[ev->batch];
                for (int r = 0; r < K; ++r) {
                    for (int n = 0; n < label[r]; ++n) {
                        ++arrivals[r];
                        if (in_window) ++arrivals_w[r];
                        ++in_service[r];
                        std::vector<double> zeta(dim);
                        for (int x = 0; x < dim; ++x) {
                            zeta[x] = model.arrival_resource(r)[x].sample(zeta_rng);
                            alpha[static_cast<std::size_t>(r) * dim + x] += zeta[x];
                        }
                        in_flight.push(
                            {clock + model.service(r, env).sample(service_rng), r,
                             std::move(zeta)});
                        if (!opt.thinning.empty() &&
                            thin_rng.uniform() <= opt.thinning[r])
                            ++kept[r];
                    }
                }
            }
            mmap_next = schedule_mmap(clock);
        } else {
            // environment transition: every customer is flushed
            ++catastrophes_all;
            if (in_window) ++catastrophes_w;
            for (int r = 0; r < K; ++r) {
                destroyed[r] += in_service[r];
                destroyed_by_cat[r] += in_service[r];
                if (in_window) destroyed_w[r] += in_service[r];
                in_service[r] = 0;
            }
            while (!in_flight.empty()) in_flight.pop();
            std::fill(alpha.begin(), alpha.end(), 0.0);
            env = env_to;
            if (opt.phase_reset == PhaseReset::reset)
                phase = pick_cumulative(tables.phase_law[env], phase_rng.uniform());
            std::tie(env_next, env_to) = schedule_env(clock);
            mmap_next = schedule_mmap(clock);
        }
        check_conservation();
    }
    advance_integrals(T);

    // assemble samples
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.samples.assign(n_slots, 0.0);
    for (int r = 0; r < K; ++r) {
        out.samples[slots.terminal_ns0 + r] = static_cast<double>(in_service[r]);
        out.samples[slots.mean_queue0 + r] =
            window_len > 0.0 ? ns_integral[r] / window_len : nan;
        out.samples[slots.arrival_rate0 + r] =
            window_len > 0.0 ? static_cast<double>(arrivals_w[r]) / window_len : nan;
        out.samples[slots.served_rate0 + r] =
            window_len > 0.0 ? static_cast<double>(served_w[r]) / window_len : nan;
        out.samples[slots.destroyed_rate0 + r] =
            window_len > 0.0 ? static_cast<double>(destroyed_w[r]) / window_len : nan;
        out.samples[slots.per_cat0 + r] =
            catastrophes_all > 0
                ? static_cast<double>(destroyed_by_cat[r]) / catastrophes_all
                : nan;
    }
    double mq_total = 0.0, dr_total = 0.0;
    long long destroyed_total = 0;
    for (int r = 0; r < K; ++r) {
        mq_total += ns_integral[r];
        dr_total += static_cast<double>(destroyed_w[r]);
        destroyed_total += destroyed_by_cat[r];
    }
    out.samples[slots.mean_queue_total] = window_len > 0.0 ? mq_total / window_len : nan;
    out.samples[slots.destroyed_rate_total] =
        window_len > 0.0 ? dr_total / window_len : nan;
    out.samples[slots.per_cat_total] =
        catastrophes_all > 0 ? static_cast<double>(destroyed_total) / catastrophes_all
                             : nan;
    out.samples[slots.cat_rate] =
        window_len > 0.0 ? static_cast<double>(catastrophes_w) / window_len : nan;

    for (int r = 0; r < K; ++r)
        for (int c = 0; c < dim; ++c)
            out.samples[slots.res_avg0 + r * dim + c] =
                window_len > 0.0
                    ? alpha_integral[static_cast<std::size_t>(r) * dim + c] / window_len
                    : nan;
    for (int c = 0; c < dim; ++c) {
        double total = 0.0;
        for (int r = 0; r < K; ++r)
            total += alpha_integral[static_cast<std::size_t>(r) * dim + c];
        out.samples[slots.res_avg_total0 + c] = window_len > 0.0 ? total / window_len : nan;
    }

    for (std::size_t zi = 0; zi < opt.pgf_z.size(); ++zi) {
        double v = 1.0, vs = 1.0;
        long long served_total = 0;
        for (int r = 0; r < K; ++r) {
            v *= std::pow(opt.pgf_z[zi], static_cast<double>(in_service[r]));
            served_total += served[r];
        }
        vs = std::pow(opt.pgf_z[zi], static_cast<double>(served_total));
        out.samples[slots.pgf0 + static_cast<int>(zi)] = v;
        out.samples[slots.served_pgf0 + static_cast<int>(zi)] = vs;
    }
    for (std::size_t si = 0; si < opt.lst_s.size(); ++si) {
        double total = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) total += alpha[i];
        out.samples[slots.lst0 + static_cast<int>(si)] = std::exp(-opt.lst_s[si] * total);
    }
    if (slots.kept0 >= 0) {
        for (std::size_t zi = 0; zi < opt.pgf_z.size(); ++zi) {
            double v = 1.0;
            for (int r = 0; r < K; ++r)
                v *= std::pow(opt.pgf_z[zi], static_cast<double>(kept[r]));
            out.samples[slots.kept0 + static_cast<int>(zi)] = v;
        }
    }
    return out;
}

}  // namespace

const Estimate* EstimateSet::find(const std::string& quantity, int type_index) const {
    for (const auto& e : items)
        if (e.quantity == quantity && e.type_index == type_index) return &e;
    return nullptr;
}

EstimateSet simulate(const ValidatedModel& model, const SimOptions& opt) {
    if (opt.replications < 1) throw DomainError("replications must be >= 1");
    if (!(opt.horizon >= 0.0)) throw DomainError("horizon must be >= 0");
    if (!opt.thinning.empty()) {
        if (static_cast<int>(opt.thinning.size()) != model.type_count())
            throw DomainError("one retention probability required per type");
        for (double p : opt.thinning)
            if (p < 0.0 || p > 1.0) throw DomainError("retention must lie in [0,1]");
    }
    if (opt.fixed_initial_phase &&
        (*opt.fixed_initial_phase < 0 || *opt.fixed_initial_phase >= model.phase_count()))
        throw DomainError("fixed initial phase out of range");

    const Tables tables = build_tables(model);
    Layout layout;
    const Slots slots = build_layout(model, opt, layout);
    const std::size_t n_slots = layout.prototype.size();

    std::vector<RepOutcome> results(opt.replications);
    const int threads =
        std::max(1, opt.threads > 0 ? opt.threads
                                    : static_cast<int>(std::thread::hardware_concurrency()));
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<int> cursor{0};
    auto worker = [&] {
        while (true) {
            const int rep = cursor.fetch_add(1);
            if (rep >= opt.replications) return;
            try {
                results[rep] = run_replication(model, opt, tables, slots, n_slots,
                                               static_cast<std::uint64_t>(rep));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (threads == 1 || opt.replications == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    // Welford reduction in replication order
    EstimateSet set;
    set.seed = opt.seed;
    set.replications = opt.replications;
    std::vector<long long> count(n_slots, 0);
    std::vector<double> mean(n_slots, 0.0), m2(n_slots, 0.0);
    for (const auto& rep : results) {
        set.total_events += rep.events;
        set.conservation_violations += rep.violations;
        for (std::size_t s = 0; s < n_slots; ++s) {
            const double x = rep.samples[s];
            if (std::isnan(x)) continue;
            ++count[s];
            const double d = x - mean[s];
            mean[s] += d / static_cast<double>(count[s]);
            m2[s] += d * (x - mean[s]);
        }
    }
    for (std::size_t s = 0; s < n_slots; ++s) {
        Estimate e = layout.prototype[s];
        e.reps = static_cast<int>(count[s]);
        e.value = mean[s];
        e.se = count[s] > 1
                   ? std::sqrt(m2[s] / (static_cast<double>(count[s]) - 1.0) /
                               static_cast<double>(count[s]))
                   : 0.0;
        set.items.push_back(std::move(e));
    }
    return set;
}

ComparisonReport compare(const EstimateSet& estimates,
                         const std::vector<AnalyticValue>& analytic, double z_threshold) {
    ComparisonReport report;
    for (const auto& a : analytic) {
        const Estimate* match = nullptr;
        for (const auto& e : estimates.items) {
            const bool t_match = (std::isnan(a.t) && std::isnan(e.t)) ||
                                 (!std::isnan(a.t) && !std::isnan(e.t) && a.t == e.t);
            if (e.quantity == a.quantity && e.type_index == a.type_index && t_match) {
                match = &e;
                break;
            }
        }
        if (!match)
            throw LabelMismatchError("no estimate for quantity '" + a.quantity + "'");
        ComparisonRow row;
        row.analytic = a;
        row.estimate = match->value;
        row.se = match->se;
        if (match->se > 0.0) {
            row.z = (a.value - match->value) / match->se;
        } else {
            row.z = a.value == match->value ? 0.0
                                            : std::numeric_limits<double>::infinity();
        }
        row.pass = std::abs(row.z) <= z_threshold;
        report.all_pass = report.all_pass && row.pass;
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace mmapq
