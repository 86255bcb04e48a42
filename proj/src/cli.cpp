#include "mmapq/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "mmapq/measures.hpp"
#include "mmapq/model_io.hpp"
#include "mmapq/renewal.hpp"

namespace mmapq {

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct Row {
    std::string quantity;
    int type_index = -1;   // -1: blank
    int env_state = 0;     // 0: blank (1-based otherwise)
    double t = std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    double se = std::numeric_limits<double>::quiet_NaN();  // NaN: blank
    std::string method;
};

void write_rows(const std::vector<Row>& rows, RunRequest::Format format,
                std::ostream& out) {
    if (format == RunRequest::Format::csv) {
        out << "quantity,type_index,env_state,t,value,stderr,method\n";
        for (const auto& r : rows) {
            out << r.quantity << ','
                << (r.type_index >= 0 ? std::to_string(r.type_index + 1) : "") << ','
                << (r.env_state > 0 ? std::to_string(r.env_state) : "") << ','
                << fmt(r.t) << ',' << fmt(r.value) << ',' << fmt(r.se) << ','
                << r.method << '\n';
        }
        return;
    }
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["quantity"] = r.quantity;
        if (r.type_index >= 0) j["type_index"] = r.type_index + 1;
        if (r.env_state > 0) j["env_state"] = r.env_state;
        if (!std::isnan(r.t)) j["t"] = r.t;
        j["value"] = r.value;
        if (!std::isnan(r.se)) j["stderr"] = r.se;
        j["method"] = r.method;
        doc.push_back(std::move(j));
    }
    out << doc.dump(2) << '\n';
}

const char* method_name(Method m) {
    return m == Method::ode ? "ode" : "closed_form";
}

// true when no environment transition can fire inside the horizon, i.e. the
// catastrophe machinery is inert and only transient rows make sense
bool environment_inert(const ValidatedModel& model) {
    const double T = model.grid().horizon();
    for (int i = 0; i < model.state_count(); ++i)
        if (model.sojourn_cdf(i, T) > 0.0) return false;
    return true;
}

std::vector<Row> analytic_rows(const ValidatedModel& model, const RunRequest& req,
                               bool for_compare) {
    const int K = model.type_count();
    const int dim = model.resource_dim();
    const Grid grid = model.grid();
    const double T = grid.horizon();
    const bool inert = environment_inert(model);
    const char* m = method_name(req.method);

    std::vector<Row> rows;
    auto push = [&](const std::string& q, int type, int state, double t, double v,
                    const char* method = "analytic") {
        rows.push_back({q, type, state, t, v, std::numeric_limits<double>::quiet_NaN(),
                        method});
    };

    // When no environment transition can fire inside the horizon, the
    // simulator cannot estimate catastrophe/stationary quantities, so a
    // comparison restricts itself to transient rows.
    const bool stationary_rows = !(for_compare && inert);
    if (stationary_rows) {
        const StationaryKpis kpis = stationary_kpis(model);
        const StationaryWeights w = stationary_weights(model);
        for (int r = 0; r < K; ++r) push("mean_queue", r, 0, NAN, kpis.mean_queue[r]);
        push("mean_queue_total", -1, 0, NAN, kpis.mean_queue_total);
        if (!inert) {
            for (int r = 0; r < K; ++r)
                push("destroyed_per_catastrophe", r, 0, NAN,
                     kpis.loss_per_catastrophe[r]);
            push("destroyed_per_catastrophe_total", -1, 0, NAN,
                 kpis.loss_per_catastrophe_total);
            for (int r = 0; r < K; ++r)
                push("destroyed_rate", r, 0, NAN, kpis.loss_rate[r]);
            push("destroyed_rate_total", -1, 0, NAN, kpis.loss_rate_total);
            push("catastrophe_rate", -1, 0, NAN, 1.0 / w.mean_cycle);
        }
        std::vector<double> arrival(K, 0.0);
        for (int j = 0; j < model.state_count(); ++j) {
            const ArrivalRates rates = arrival_rates(model, j);
            for (int r = 0; r < K; ++r) arrival[r] += w.q[j] * rates.per_type[r];
            if (!for_compare)
                for (int r = 0; r < K; ++r)
                    push("arrival_rate_state", r, j + 1, NAN, rates.per_type[r]);
        }
        for (int r = 0; r < K; ++r) push("arrival_rate", r, 0, NAN, arrival[r]);
        for (int r = 0; r < K; ++r)
            push("served_rate", r, 0, NAN, arrival[r] - kpis.loss_rate[r]);
        if (!for_compare || !inert) {
            for (int r = 0; r < K; ++r)
                for (int c = 0; c < dim; ++c)
                    push(dim == 1 ? "resource_timeavg"
                                  : "resource_timeavg[" + std::to_string(c) + "]",
                         r, 0, NAN, kpis.resource_mean[r][c]);
            for (int c = 0; c < dim; ++c)
                push(dim == 1 ? "resource_timeavg_total"
                              : "resource_timeavg_total[" + std::to_string(c) + "]",
                     -1, 0, NAN, kpis.resource_mean_total[c]);
        }
    } else {
        // inert comparison: the environment never leaves its initial state,
        // so arrivals mix over p0 instead of the time-stationary weights
        std::vector<double> arrival(K, 0.0);
        for (int j = 0; j < model.state_count(); ++j) {
            const ArrivalRates rates = arrival_rates(model, j);
            for (int r = 0; r < K; ++r)
                arrival[r] += model.initial_env()[j] * rates.per_type[r];
        }
        for (int r = 0; r < K; ++r) push("arrival_rate", r, 0, NAN, arrival[r]);
    }

    // terminal transforms and means via the renewal mixture
    const RenewalSolution renewal = renewal_matrix(model, grid);
    const auto means = transient_queue_means(model, renewal, req.method);
    for (int r = 0; r < K; ++r)
        push("terminal_in_service", r, 0, T, means[r].back(), m);
    if (!for_compare) {
        for (double frac : {0.25, 0.5, 0.75}) {
            const auto node = static_cast<std::size_t>(
                std::llround(frac * static_cast<double>(grid.nodes - 1)));
            for (int r = 0; r < K; ++r)
                push("mean_queue_transient", r, 0, grid.time(node), means[r][node], m);
        }
    }

    for (double z : req.z_points) {
        TransformPoint pt = TransformPoint::neutral(K, dim);
        pt.z1.assign(K, cplx(z, 0.0));
        const auto bases = scalar_transform_bases(model, pt, req.method);
        const auto mixed = catastrophe_transform_transient(model, bases, renewal, -1);
        char label[64];
        std::snprintf(label, sizeof(label), "pgf_in_service@%g", z);
        push(label, -1, 0, T, mixed.at(grid.nodes - 1)[0].real(), m);
    }
    for (double s : req.s_points) {
        TransformPoint pt = TransformPoint::neutral(K, dim);
        pt.s1.assign(dim, s);
        const auto bases = scalar_transform_bases(model, pt, req.method);
        const auto mixed = catastrophe_transform_transient(model, bases, renewal, -1);
        char label[64];
        std::snprintf(label, sizeof(label), "lst_resource@%g", s);
        push(label, -1, 0, T, mixed.at(grid.nodes - 1)[0].real(), m);
    }

    if (!for_compare && !inert) {
        // stationary PGF and PMF when the horizon covers the sojourn tails
        bool tails_ok = true;
        for (int i = 0; i < model.state_count(); ++i)
            tails_ok = tails_ok &&
                       model.sojourn_survival_quantile(i, model.tail_epsilon()) <= T;
        if (tails_ok) {
            for (double z : req.z_points) {
                char label[64];
                std::snprintf(label, sizeof(label), "pgf_stationary@%g", z);
                push(label, -1, 0, NAN,
                     stationary_queue_pgf(model, cplx(z, 0.0), req.method).real(), m);
            }
            try {
                const PerformanceReport report = build_report(model, req.method, true);
                const Pmf& pmf = *report.queue_pmf;
                for (std::size_t n = 0; n < pmf.p.size(); ++n)
                    push("pmf[" + std::to_string(n) + "]", -1, 0, NAN, pmf.p[n], m);
                push("pmf_tail_mass", -1, 0, NAN, pmf.tail_mass, m);
            } catch (const NotNormalizedError&) {
                // grid too coarse for the 1e-6 inversion gate; PMF rows are
                // omitted rather than emitted from an unnormalized transform
            }
        }
    }
    return rows;
}

SimOptions sim_options(const ValidatedModel& model, const RunRequest& req) {
    SimOptions opt;
    opt.horizon = model.grid().horizon();
    opt.replications = req.reps;
    opt.seed = req.seed;
    opt.pgf_z = req.z_points;
    opt.lst_s = req.s_points;
    opt.phase_reset = req.phase_reset;
    opt.threads = req.threads;
    return opt;
}

std::vector<Row> estimate_rows(const EstimateSet& set) {
    std::vector<Row> rows;
    for (const auto& e : set.items) {
        if (e.reps == 0) continue;
        rows.push_back({e.quantity, e.type_index, 0, e.t, e.value, e.se, "simulation"});
    }
    rows.push_back({"total_events", -1, 0, NAN, static_cast<double>(set.total_events),
                    NAN, "simulation"});
    rows.push_back({"conservation_violations", -1, 0, NAN,
                    static_cast<double>(set.conservation_violations), NAN, "simulation"});
    return rows;
}

void write_output(const RunRequest& req, const std::vector<Row>& rows,
                  std::ostream& out) {
    if (req.output_path.empty()) {
        write_rows(rows, req.format, out);
        return;
    }
    std::ofstream file(req.output_path);
    if (!file) throw Error("IoError", "cannot write " + req.output_path);
    write_rows(rows, req.format, file);
}

}  // namespace

int run(const RunRequest& req, std::ostream& out, std::ostream& err) {
    try {
        ModelConfig cfg = load_model_file(req.model_path);
        if (req.horizon) cfg.numeric.horizon = *req.horizon;
        if (req.step) cfg.numeric.step = *req.step;
        const ValidatedModel model = ValidatedModel::create(std::move(cfg));

        switch (req.command) {
            case RunRequest::Command::analyze: {
                write_output(req, analytic_rows(model, req, false), out);
                return 0;
            }
            case RunRequest::Command::simulate: {
                const EstimateSet set = simulate(model, sim_options(model, req));
                write_output(req, estimate_rows(set), out);
                return 0;
            }
            case RunRequest::Command::compare: {
                const EstimateSet set = simulate(model, sim_options(model, req));
                std::vector<AnalyticValue> targets;
                for (const auto& r : analytic_rows(model, req, true)) {
                    AnalyticValue a;
                    a.quantity = r.quantity;
                    a.type_index = r.type_index;
                    a.t = r.t;
                    a.value = r.value;
                    targets.push_back(std::move(a));
                }
                const ComparisonReport report = compare(set, targets, req.z_threshold);

                // compare table re-uses the flat schema: three rows per
                // quantity (analytic value, simulation estimate with its
                // standard error, z-score with the verdict in `method`)
                std::vector<Row> table;
                for (const auto& c : report.rows) {
                    table.push_back({c.analytic.quantity, c.analytic.type_index, 0,
                                     c.analytic.t, c.analytic.value, NAN, "analytic"});
                    table.push_back({c.analytic.quantity, c.analytic.type_index, 0,
                                     c.analytic.t, c.estimate, c.se, "simulation"});
                    table.push_back({c.analytic.quantity, c.analytic.type_index, 0,
                                     c.analytic.t, c.z, NAN,
                                     c.pass ? "z:PASS" : "z:FAIL"});
                }
                write_output(req, table, out);
                err << (report.all_pass ? "compare: all quantities PASS\n"
                                        : "compare: at least one quantity FAILED\n");
                return report.all_pass ? 0 : 1;
            }
        }
        return 0;
    } catch (const ModelError& e) {
        for (const auto& v : e.violations())
            err << v.code << " at " << v.where << ": " << v.message << '\n';
        return 2;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return 2;
    }
}

}  // namespace mmapq
