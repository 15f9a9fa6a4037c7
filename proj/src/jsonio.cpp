#include "vecci/jsonio.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "vecci/error.hpp"

namespace vecci::jsonio {

namespace {

using nlohmann::json;

void require_keys(const json& doc, const std::set<std::string>& allowed, const char* what) {
    if (!doc.is_object()) throw input_error(std::string(what) + " must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (allowed.find(key) == allowed.end()) {
            throw input_error(std::string("unknown key '") + key + "' in " + what);
        }
    }
}

[[noreturn]] void bad_json(const char* what, const nlohmann::json::exception& e) {
    throw input_error(std::string("malformed ") + what + ": " + e.what());
}

int checked_dimension(const json& doc, const char* key) {
    const int value = doc.at(key).get<int>();
    if (value < 1) throw input_error(std::string("'") + key + "' must be at least 1");
    return value;
}

}  // namespace

std::string to_string(citest::GroupConditioning mode) {
    return mode == citest::GroupConditioning::Explicit ? "explicit" : "residualize";
}

citest::GroupConditioning conditioning_from_string(const std::string& name) {
    if (name == "explicit") return citest::GroupConditioning::Explicit;
    if (name == "residualize") return citest::GroupConditioning::Residualize;
    throw input_error("unknown conditioning mode '" + name +
                      "' (expected explicit or residualize)");
}

nlohmann::json grouped_dag_to_json(const graph::GroupedDag& gd) {
    const int total = gd.dag().node_count();
    std::vector<int> relabel(static_cast<std::size_t>(total), -1);
    int next = 0;
    for (int v : gd.x_nodes()) relabel[static_cast<std::size_t>(v)] = next++;
    for (int v : gd.y_nodes()) relabel[static_cast<std::size_t>(v)] = next++;

    json edges = json::array();
    for (const auto& [u, v] : gd.dag().edges()) {
        edges.push_back(json::array(
            {relabel[static_cast<std::size_t>(u)], relabel[static_cast<std::size_t>(v)]}));
    }
    json doc;
    doc["n"] = gd.n();
    doc["m"] = gd.m();
    doc["edges"] = std::move(edges);
    return doc;
}

graph::GroupedDag grouped_dag_from_json(const nlohmann::json& doc) {
    try {
        require_keys(doc, {"n", "m", "edges"}, "grouped graph");
        const int n = checked_dimension(doc, "n");
        const int m = checked_dimension(doc, "m");
        std::vector<std::pair<int, int>> edges;
        for (const json& edge : doc.at("edges")) {
            if (!edge.is_array() || edge.size() != 2) {
                throw input_error("each edge must be a [from, to] pair");
            }
            edges.emplace_back(edge[0].get<int>(), edge[1].get<int>());
        }
        graph::Dag dag(n + m, std::move(edges));
        std::vector<int> xs(static_cast<std::size_t>(n));
        std::vector<int> ys(static_cast<std::size_t>(m));
        for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = i;
        for (int j = 0; j < m; ++j) ys[static_cast<std::size_t>(j)] = n + j;
        return graph::GroupedDag(std::move(dag), std::move(xs), std::move(ys));
    } catch (const nlohmann::json::exception& e) {
        bad_json("grouped graph JSON", e);
    }
}

nlohmann::json model_to_json(const synth::LinearGroupModel& model, std::uint64_t seed) {
    const int n = model.structure.n();

    json coeff_x = json::array();
    json coeff_y = json::array();
    for (const auto& [edge, weight] : model.internal_coeffs) {
        const auto [u, v] = edge;
        if (u < n) {
            coeff_x.push_back(json::array({u, v, weight}));
        } else {
            coeff_y.push_back(json::array({u - n, v - n, weight}));
        }
    }
    json interaction = json::array();
    for (int j = 0; j < model.interaction.rows(); ++j) {
        for (int i = 0; i < model.interaction.cols(); ++i) {
            if (model.interaction(j, i) != 0.0) {
                interaction.push_back(json::array({i, j, model.interaction(j, i)}));
            }
        }
    }

    json doc;
    doc["n"] = model.structure.n();
    doc["m"] = model.structure.m();
    doc["mechanism"] = synth::to_string(model.mechanism);
    doc["seed"] = seed;
    doc["coeff_x"] = std::move(coeff_x);
    doc["coeff_y"] = std::move(coeff_y);
    doc["interaction"] = std::move(interaction);
    doc["noise_variances"] = model.noise_variances;
    return doc;
}

namespace {

struct Triplet {
    int a = 0;
    int b = 0;
    double weight = 0.0;
};

std::vector<Triplet> read_triplets(const json& array, int a_limit, int b_limit, const char* what) {
    std::vector<Triplet> out;
    for (const json& entry : array) {
        if (!entry.is_array() || entry.size() != 3) {
            throw input_error(std::string(what) + " entries must be [from, to, weight] triplets");
        }
        Triplet t{entry[0].get<int>(), entry[1].get<int>(), entry[2].get<double>()};
        if (t.a < 0 || t.a >= a_limit || t.b < 0 || t.b >= b_limit) {
            throw input_error(std::string("index out of range in ") + what);
        }
        if (!std::isfinite(t.weight)) {
            throw input_error(std::string("non-finite weight in ") + what);
        }
        out.push_back(t);
    }
    return out;
}

}  // namespace

synth::LinearGroupModel model_from_json(const nlohmann::json& doc) {
    try {
        require_keys(doc,
                     {"n", "m", "mechanism", "seed", "coeff_x", "coeff_y", "interaction",
                      "noise_variances"},
                     "model");
        const int n = checked_dimension(doc, "n");
        const int m = checked_dimension(doc, "m");

        synth::LinearGroupModel model;
        model.mechanism = synth::mechanism_from_string(doc.at("mechanism").get<std::string>());
        model.noise_variances = doc.at("noise_variances").get<std::vector<double>>();
        if (static_cast<int>(model.noise_variances.size()) != n + m) {
            throw input_error("noise variance list must have n + m entries");
        }

        const auto x_triplets = read_triplets(doc.at("coeff_x"), n, n, "coeff_x");
        const auto y_triplets = read_triplets(doc.at("coeff_y"), m, m, "coeff_y");
        const auto cross_triplets = read_triplets(doc.at("interaction"), n, m, "interaction");

        std::vector<std::pair<int, int>> edges;
        std::vector<std::pair<int, int>> eta_edges;
        model.interaction = Eigen::MatrixXd::Zero(m, n);
        for (const Triplet& t : x_triplets) {
            edges.emplace_back(t.a, t.b);
            model.internal_coeffs[{t.a, t.b}] = t.weight;
        }
        for (const Triplet& t : y_triplets) {
            edges.emplace_back(n + t.a, n + t.b);
            eta_edges.emplace_back(t.a, t.b);
            model.internal_coeffs[{n + t.a, n + t.b}] = t.weight;
        }
        for (const Triplet& t : cross_triplets) {
            edges.emplace_back(t.a, n + t.b);
            model.interaction(t.b, t.a) = t.weight;
        }

        graph::Dag dag(n + m, std::move(edges));
        std::vector<int> xs(static_cast<std::size_t>(n));
        std::vector<int> ys(static_cast<std::size_t>(m));
        for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = i;
        for (int j = 0; j < m; ++j) ys[static_cast<std::size_t>(j)] = n + j;
        model.structure = graph::GroupedDag(std::move(dag), std::move(xs), std::move(ys));
        model.eta_y_dag = graph::Dag(m, std::move(eta_edges));
        return model;
    } catch (const nlohmann::json::exception& e) {
        bad_json("model JSON", e);
    }
}

nlohmann::json report_to_json(const algorithms::DirectionReport& report) {
    json doc;
    doc["dens_x"] = report.dens_x;
    doc["dens_x_given_y"] = report.dens_x_given_y;
    doc["dens_y"] = report.dens_y;
    doc["dens_y_given_x"] = report.dens_y_given_x;
    doc["d_xy"] = report.d_xy;
    doc["d_yx"] = report.d_yx;
    doc["crit"] = report.crit;
    doc["decision"] = algorithms::to_string(report.decision);
    doc["alpha"] = report.alpha;
    doc["ci_test_count"] = report.ci_test_count;
    return doc;
}

nlohmann::json report_to_json(const algorithms::VanillaReport& report) {
    json doc;
    doc["edge_x_to_y"] = report.edge_x_to_y;
    doc["edge_y_to_x"] = report.edge_y_to_x;
    doc["edge_diff"] = report.edge_diff;
    doc["decision"] = algorithms::to_string(report.decision);
    return doc;
}

nlohmann::json report_to_json(const algorithms::TraceReport& report) {
    json doc;
    doc["delta_xy"] = report.delta_xy;
    doc["delta_yx"] = report.delta_yx;
    doc["decision"] = algorithms::to_string(report.decision);
    return doc;
}

bench::ExperimentGrid grid_from_json(const nlohmann::json& doc) {
    try {
        require_keys(doc,
                     {"n", "m", "sample_size", "dens_x", "dens_y", "dens_a", "effect_lo",
                      "effect_hi", "mechanism", "axes", "repetitions", "methods", "alpha",
                      "alpha_sig", "conditioning", "ci_backend", "vecci_max_cond",
                      "vanilla_max_cond", "permutations", "seed", "max_cells"},
                     "grid config");

        bench::ExperimentGrid grid;
        if (doc.contains("n")) grid.base.n = doc.at("n").get<int>();
        if (doc.contains("m")) grid.base.m = doc.at("m").get<int>();
        if (doc.contains("sample_size")) grid.base.sample_size = doc.at("sample_size").get<int>();
        if (doc.contains("dens_x")) grid.base.dens_x = doc.at("dens_x").get<double>();
        if (doc.contains("dens_y")) grid.base.dens_y = doc.at("dens_y").get<double>();
        if (doc.contains("dens_a")) grid.base.dens_a = doc.at("dens_a").get<double>();
        if (doc.contains("effect_lo")) grid.base.effect_lo = doc.at("effect_lo").get<double>();
        if (doc.contains("effect_hi")) grid.base.effect_hi = doc.at("effect_hi").get<double>();
        if (doc.contains("mechanism")) {
            grid.base.mechanism =
                synth::mechanism_from_string(doc.at("mechanism").get<std::string>());
        }
        if (doc.contains("axes")) {
            for (const json& axis : doc.at("axes")) {
                require_keys(axis, {"name", "values"}, "grid axis");
                grid.axes.emplace_back(axis.at("name").get<std::string>(),
                                       axis.at("values").get<std::vector<double>>());
            }
        }
        if (doc.contains("repetitions")) grid.repetitions = doc.at("repetitions").get<int>();
        if (doc.contains("methods")) {
            for (const json& name : doc.at("methods")) {
                grid.methods.push_back(bench::method_from_string(name.get<std::string>()));
            }
        }
        if (doc.contains("alpha")) {
            for (const auto& [name, value] : doc.at("alpha").items()) {
                grid.alpha[bench::method_from_string(name)] = value.get<double>();
            }
        }
        if (doc.contains("alpha_sig")) grid.alpha_sig = doc.at("alpha_sig").get<double>();
        if (doc.contains("conditioning")) {
            grid.conditioning =
                conditioning_from_string(doc.at("conditioning").get<std::string>());
        }
        if (doc.contains("ci_backend")) {
            grid.ci_backend = bench::backend_from_string(doc.at("ci_backend").get<std::string>());
        }
        if (doc.contains("vecci_max_cond")) {
            grid.vecci_max_cond = doc.at("vecci_max_cond").get<int>();
        }
        if (doc.contains("vanilla_max_cond")) {
            grid.vanilla_max_cond = doc.at("vanilla_max_cond").get<int>();
        }
        if (doc.contains("permutations")) grid.permutations = doc.at("permutations").get<int>();
        if (doc.contains("seed")) grid.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("max_cells")) grid.max_cells = doc.at("max_cells").get<int>();
        return grid;
    } catch (const nlohmann::json::exception& e) {
        bad_json("grid config JSON", e);
    }
}

bench::ExperimentGrid read_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("malformed grid config: ") + e.what());
    }
    return grid_from_json(doc);
}

}  // namespace vecci::jsonio
