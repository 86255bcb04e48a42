#include "mmapq/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace mmapq {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& code, const std::string& where,
                       const std::string& msg) {
    throw ModelError({Violation{code, where, msg}});
}

const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object()) fail("SchemaError", where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail("SchemaError", where + "." + key, "missing field");
    return *it;
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    if (!j.is_object()) fail("SchemaError", where, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(),
                         [&](const char* k) { return it.key() == k; }))
            fail("SchemaError", where + "." + it.key(), "unknown field");
    }
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) fail("SchemaError", where, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& where, const char* code = "SchemaError") {
    const double x = num(j, where);
    if (x != std::floor(x) || std::abs(x) > 1e9)
        fail(code, where, "expected an integer");
    return static_cast<int>(x);
}

const json& array(const json& j, const std::string& where) {
    if (!j.is_array()) fail("SchemaError", where, "expected a list");
    return j;
}

Distribution parse_dist(const json& j, const std::string& where) {
    const json& fam = field(j, "family", where);
    if (!fam.is_string()) fail("SchemaError", where + ".family", "expected a string");
    const std::string f = fam.get<std::string>();
    if (f == "deterministic") {
        reject_unknown(j, {"family", "value"}, where);
        return Distribution::deterministic(num(field(j, "value", where), where + ".value"));
    }
    if (f == "exponential") {
        reject_unknown(j, {"family", "rate"}, where);
        return Distribution::exponential(num(field(j, "rate", where), where + ".rate"));
    }
    if (f == "erlang") {
        reject_unknown(j, {"family", "shape", "rate"}, where);
        const int shape =
            integer(field(j, "shape", where), where + ".shape", "BadDistribution");
        return Distribution::erlang(shape, num(field(j, "rate", where), where + ".rate"));
    }
    if (f == "uniform") {
        reject_unknown(j, {"family", "low", "high"}, where);
        return Distribution::uniform(num(field(j, "low", where), where + ".low"),
                                     num(field(j, "high", where), where + ".high"));
    }
    if (f == "hyperexponential") {
        reject_unknown(j, {"family", "weights", "rates"}, where);
        std::vector<double> w, r;
        for (const auto& x : array(field(j, "weights", where), where + ".weights"))
            w.push_back(num(x, where + ".weights"));
        for (const auto& x : array(field(j, "rates", where), where + ".rates"))
            r.push_back(num(x, where + ".rates"));
        return Distribution::hyperexponential(std::move(w), std::move(r));
    }
    fail("BadDistribution", where + ".family", "unknown family '" + f + "'");
}

Eigen::MatrixXd parse_matrix(const json& j, int m, const std::string& where) {
    const json& a = array(j, where);
    if (static_cast<int>(a.size()) != m * m)
        fail("SchemaError", where,
             "expected " + std::to_string(m * m) + " row-major entries");
    Eigen::MatrixXd out(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
            out(r, c) = num(a[r * m + c], where);
    return out;
}

std::vector<std::vector<Distribution>> parse_dist_table(const json& j, const std::string& where) {
    std::vector<std::vector<Distribution>> table;
    const json& rows = array(j, where);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string rw = where + "[" + std::to_string(r) + "]";
        std::vector<Distribution> row;
        for (const auto& cell : array(rows[r], rw))
            row.push_back(parse_dist(cell, rw));
        table.push_back(std::move(row));
    }
    return table;
}

ordered dist_json(const Distribution& d) {
    ordered j;
    j["family"] = family_name(d.family());
    switch (d.family()) {
        case DistFamily::deterministic: j["value"] = d.value(); break;
        case DistFamily::exponential: j["rate"] = d.rate(); break;
        case DistFamily::erlang:
            j["shape"] = d.shape();
            j["rate"] = d.rate();
            break;
        case DistFamily::uniform:
            j["low"] = d.low();
            j["high"] = d.high();
            break;
        case DistFamily::hyperexponential:
            j["weights"] = d.weights();
            j["rates"] = d.rates();
            break;
    }
    return j;
}

ordered matrix_json(const Eigen::MatrixXd& mat) {
    ordered out = ordered::array();
    for (Eigen::Index r = 0; r < mat.rows(); ++r)
        for (Eigen::Index c = 0; c < mat.cols(); ++c)
            out.push_back(mat(r, c));
    return out;
}

}  // namespace

ModelConfig load_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("SyntaxError", "document", e.what());
    }
    reject_unknown(doc, {"mmap", "environment", "service", "resources",
                         "initial_customers", "numeric"}, "document");

    ModelConfig cfg;

    // mmap
    const json& jm = field(doc, "mmap", "document");
    reject_unknown(jm, {"phases", "types", "states"}, "mmap");
    cfg.mmap.phase_count = integer(field(jm, "phases", "mmap"), "mmap.phases");
    cfg.mmap.type_count = integer(field(jm, "types", "mmap"), "mmap.types");
    const int m = cfg.mmap.phase_count;

    // first pass: the union of batch labels across states, sorted
    const json& jstates = array(field(jm, "states", "mmap"), "mmap.states");
    std::vector<BatchLabel> labels;
    for (std::size_t i = 0; i < jstates.size(); ++i) {
        const std::string sw = "mmap.states[" + std::to_string(i) + "]";
        reject_unknown(jstates[i], {"D0", "batches"}, sw);
        const json& jb = array(field(jstates[i], "batches", sw), sw + ".batches");
        for (std::size_t b = 0; b < jb.size(); ++b) {
            const std::string bw = sw + ".batches[" + std::to_string(b) + "]";
            reject_unknown(jb[b], {"label", "matrix"}, bw);
            BatchLabel h;
            for (const auto& x : array(field(jb[b], "label", bw), bw + ".label"))
                h.push_back(integer(x, bw + ".label"));
            if (std::find(labels.begin(), labels.end(), h) == labels.end())
                labels.push_back(std::move(h));
        }
    }
    std::sort(labels.begin(), labels.end());
    cfg.mmap.batch_labels = labels;

    for (std::size_t i = 0; i < jstates.size(); ++i) {
        const std::string sw = "mmap.states[" + std::to_string(i) + "]";
        MmapStateBlock blk;
        blk.D0 = parse_matrix(field(jstates[i], "D0", sw), m, sw + ".D0");
        blk.Dh.assign(labels.size(), Eigen::MatrixXd::Zero(m, m));
        const json& jb = jstates[i]["batches"];
        for (std::size_t b = 0; b < jb.size(); ++b) {
            const std::string bw = sw + ".batches[" + std::to_string(b) + "]";
            BatchLabel h;
            for (const auto& x : jb[b]["label"]) h.push_back(integer(x, bw + ".label"));
            const auto pos = std::find(labels.begin(), labels.end(), h) - labels.begin();
            blk.Dh[pos] += parse_matrix(field(jb[b], "matrix", bw), m, bw + ".matrix");
        }
        cfg.mmap.states.push_back(std::move(blk));
    }

    // environment
    const json& je = field(doc, "environment", "document");
    reject_unknown(je, {"states", "initial", "kernel"}, "environment");
    cfg.environment.state_count =
        integer(field(je, "states", "environment"), "environment.states");
    for (const auto& x : array(field(je, "initial", "environment"), "environment.initial"))
        cfg.environment.initial.push_back(num(x, "environment.initial"));
    const json& jk = array(field(je, "kernel", "environment"), "environment.kernel");
    for (std::size_t e = 0; e < jk.size(); ++e) {
        const std::string ew = "environment.kernel[" + std::to_string(e) + "]";
        reject_unknown(jk[e], {"from", "to", "prob", "dist"}, ew);
        SmKernelEntry entry;
        entry.from = integer(field(jk[e], "from", ew), ew + ".from") - 1;
        entry.to = integer(field(jk[e], "to", ew), ew + ".to") - 1;
        entry.prob = num(field(jk[e], "prob", ew), ew + ".prob");
        entry.dist = parse_dist(field(jk[e], "dist", ew), ew + ".dist");
        cfg.environment.kernel.push_back(std::move(entry));
    }

    cfg.service_resources.service =
        parse_dist_table(field(doc, "service", "document"), "service");
    const json& jr = field(doc, "resources", "document");
    reject_unknown(jr, {"arrival", "departure"}, "resources");
    cfg.service_resources.arrival_resource =
        parse_dist_table(field(jr, "arrival", "resources"), "resources.arrival");
    cfg.service_resources.departure_resource =
        parse_dist_table(field(jr, "departure", "resources"), "resources.departure");

    for (const auto& x :
         array(field(doc, "initial_customers", "document"), "initial_customers"))
        cfg.initial_customers.push_back(integer(x, "initial_customers"));

    const json& jn = field(doc, "numeric", "document");
    reject_unknown(jn, {"horizon", "step", "tail_epsilon"}, "numeric");
    cfg.numeric.horizon = num(field(jn, "horizon", "numeric"), "numeric.horizon");
    cfg.numeric.step = num(field(jn, "step", "numeric"), "numeric.step");
    if (jn.contains("tail_epsilon"))
        cfg.numeric.tail_epsilon = num(jn["tail_epsilon"], "numeric.tail_epsilon");

    return cfg;
}

ModelConfig load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("SyntaxError", path, "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_model(buf.str());
}

std::string save_model(const ModelConfig& cfg) {
    ordered doc;

    ordered jm;
    jm["phases"] = cfg.mmap.phase_count;
    jm["types"] = cfg.mmap.type_count;
    // canonical: labels sorted, zero batch matrices omitted
    std::vector<std::size_t> order(cfg.mmap.batch_labels.size());
    for (std::size_t b = 0; b < order.size(); ++b) order[b] = b;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return cfg.mmap.batch_labels[a] < cfg.mmap.batch_labels[b];
    });
    ordered jstates = ordered::array();
    for (const auto& blk : cfg.mmap.states) {
        ordered js;
        js["D0"] = matrix_json(blk.D0);
        ordered jb = ordered::array();
        for (std::size_t b : order) {
            if (blk.Dh[b].isZero(0.0)) continue;
            ordered one;
            one["label"] = cfg.mmap.batch_labels[b];
            one["matrix"] = matrix_json(blk.Dh[b]);
            jb.push_back(std::move(one));
        }
        js["batches"] = std::move(jb);
        jstates.push_back(std::move(js));
    }
    jm["states"] = std::move(jstates);
    doc["mmap"] = std::move(jm);

    ordered je;
    je["states"] = cfg.environment.state_count;
    je["initial"] = cfg.environment.initial;
    std::vector<std::size_t> korder(cfg.environment.kernel.size());
    for (std::size_t e = 0; e < korder.size(); ++e) korder[e] = e;
    std::stable_sort(korder.begin(), korder.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = cfg.environment.kernel[a];
        const auto& y = cfg.environment.kernel[b];
        return std::pair(x.from, x.to) < std::pair(y.from, y.to);
    });
    ordered jk = ordered::array();
    for (std::size_t e : korder) {
        const auto& entry = cfg.environment.kernel[e];
        ordered one;
        one["from"] = entry.from + 1;
        one["to"] = entry.to + 1;
        one["prob"] = entry.prob;
        one["dist"] = dist_json(entry.dist);
        jk.push_back(std::move(one));
    }
    je["kernel"] = std::move(jk);
    doc["environment"] = std::move(je);

    auto table_json = [](const std::vector<std::vector<Distribution>>& table) {
        ordered rows = ordered::array();
        for (const auto& row : table) {
            ordered cells = ordered::array();
            for (const auto& d : row) cells.push_back(dist_json(d));
            rows.push_back(std::move(cells));
        }
        return rows;
    };
    doc["service"] = table_json(cfg.service_resources.service);
    ordered jr;
    jr["arrival"] = table_json(cfg.service_resources.arrival_resource);
    jr["departure"] = table_json(cfg.service_resources.departure_resource);
    doc["resources"] = std::move(jr);

    doc["initial_customers"] = cfg.initial_customers;

    ordered jn;
    jn["horizon"] = cfg.numeric.horizon;
    jn["step"] = cfg.numeric.step;
    jn["tail_epsilon"] = cfg.numeric.tail_epsilon;
    doc["numeric"] = std::move(jn);

    return doc.dump(2) + "\n";
}

void save_model_file(const ModelConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("IoError", "cannot write " + path);
    out << save_model(cfg);
}

}  // namespace mmapq
