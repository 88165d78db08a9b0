#include "hdl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hdl/errors.hpp"

namespace hdl {

namespace {

using nlohmann::json;

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

json parse_json(const std::string& text) {
    json parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded()) throw input_error("malformed JSON document");
    return parsed;
}

}  // namespace

std::string graph_to_json(const WeightedDag& wdag) {
    json edges = json::array();
    for (const auto& [u, v] : wdag.dag().edges())
        edges.push_back({u, v, wdag.coeff(v, u)});
    json out;
    out["p"] = wdag.node_count();
    out["edges"] = std::move(edges);
    return out.dump();
}

WeightedDag graph_from_json(const std::string& text) {
    const json parsed = parse_json(text);
    if (!parsed.contains("p") || !parsed["p"].is_number_integer())
        throw input_error("graph JSON needs an integer field 'p'");
    const int p = parsed["p"].get<int>();
    if (p < 0) throw input_error("node count must be nonnegative");
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(p, p);
    std::vector<std::pair<int, int>> edges;
    if (parsed.contains("edges")) {
        if (!parsed["edges"].is_array())
            throw input_error("graph JSON field 'edges' must be an array");
        for (const auto& entry : parsed["edges"]) {
            if (!entry.is_array() || entry.size() != 3)
                throw input_error("each edge must be a [u, v, weight] triple");
            const int u = entry[0].get<int>();
            const int v = entry[1].get<int>();
            const double w = entry[2].get<double>();
            if (u < 1 || u > p || v < 1 || v > p)
                throw input_error("edge label outside 1.." + std::to_string(p));
            edges.push_back({u, v});
            coeffs(v - 1, u - 1) = w;
        }
    }
    return WeightedDag(Dag(p, std::move(edges)), std::move(coeffs));
}

std::string sem_to_json(const Sem& sem) {
    json errors = json::array();
    for (const auto& e : sem.errors()) {
        json entry;
        entry["var"] = e.variance();
        entry["sampler"] = e.family_name();
        json moments = json::array();
        for (int k = 1; k <= e.max_order(); ++k) moments.push_back(e.moment(k));
        entry["moments"] = std::move(moments);
        errors.push_back(std::move(entry));
    }
    json out;
    out["graph"] = json::parse(graph_to_json(sem.wdag()));
    out["errors"] = std::move(errors);
    return out.dump();
}

Sem sem_from_json(const std::string& text) {
    const json parsed = parse_json(text);
    if (!parsed.contains("graph"))
        throw input_error("SEM JSON needs a 'graph' object");
    WeightedDag wdag = graph_from_json(parsed["graph"].dump());
    if (!parsed.contains("errors") || !parsed["errors"].is_array())
        throw input_error("SEM JSON needs an 'errors' array");
    std::vector<ErrorSpec> errors;
    int index = 0;
    for (const auto& entry : parsed["errors"]) {
        ++index;
        const std::string where = "error spec " + std::to_string(index);
        if (!entry.contains("sampler"))
            throw input_error(where + " is missing 'sampler'");
        const auto family = error_family_from_name(entry["sampler"].get<std::string>());
        std::vector<double> moments;
        if (entry.contains("moments")) {
            if (!entry["moments"].is_array())
                throw input_error(where + ": 'moments' must be an array");
            for (const auto& m : entry["moments"]) moments.push_back(m.get<double>());
        }
        if (family == ErrorSpec::Family::CustomMoments) {
            if (moments.size() < 2)
                throw input_error(where + ": custom specs need explicit moments");
            errors.push_back(ErrorSpec::custom(std::move(moments)));
            continue;
        }
        if (!entry.contains("var"))
            throw input_error(where + " is missing 'var'");
        const double variance = entry["var"].get<double>();
        if (variance <= 0.0)
            throw input_error(where + ": variance must be positive");
        const int order = moments.empty() ? 12 : static_cast<int>(moments.size());
        ErrorSpec spec = family == ErrorSpec::Family::Uniform
                             ? ErrorSpec::uniform(variance, order)
                             : ErrorSpec::gaussian(variance, order);
        for (std::size_t k = 1; k <= moments.size(); ++k) {
            const double expected = spec.moment(static_cast<int>(k));
            const double tolerance =
                1e-9 * std::max(1.0, std::abs(expected));
            if (std::abs(moments[k - 1] - expected) > tolerance)
                throw input_error(where + ": moment " + std::to_string(k) +
                                  " is inconsistent with the " +
                                  spec.family_name() + " family");
        }
        errors.push_back(std::move(spec));
    }
    return Sem(std::move(wdag), std::move(errors));
}

std::string estimate_to_json(const GraphEstimate& estimate) {
    json parents;
    for (std::size_t i = 0; i < estimate.parents.size(); ++i)
        parents[std::to_string(i + 1)] = estimate.parents[i];
    json g = json::array();
    json root_stats = json::array();
    json roots = json::array();
    for (const auto& step : estimate.steps) {
        g.push_back(step.cutoff);
        root_stats.push_back(step.root_stat);
        roots.push_back(step.root);
    }
    json diagnostics;
    diagnostics["g"] = std::move(g);
    diagnostics["root_stats"] = std::move(root_stats);
    diagnostics["roots"] = std::move(roots);
    diagnostics["capped_nodes"] = estimate.capped_nodes;
    json out;
    out["ordering"] = estimate.ordering;
    out["parents"] = std::move(parents);
    out["diagnostics"] = std::move(diagnostics);
    return out.dump();
}

std::string dataset_to_csv(const Dataset& dataset) {
    std::string out;
    const auto& labels = dataset.labels();
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (j) out += ",";
        out += labels[j];
    }
    out += "\n";
    const auto& values = dataset.values();
    for (int i = 0; i < values.rows(); ++i) {
        for (int j = 0; j < values.cols(); ++j) {
            if (j) out += ",";
            out += format_double(values(i, j));
        }
        out += "\n";
    }
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    out.push_back(cell);
    return out;
}

}  // namespace

Dataset dataset_from_csv(const std::string& text) {
    std::istringstream stream(text);
    std::string line;
    if (!std::getline(stream, line) || line.empty())
        throw input_error("CSV is missing a header row");
    const std::vector<std::string> labels = split_line(line);
    const int p = static_cast<int>(labels.size());

    std::vector<double> values;
    int rows = 0;
    int line_no = 1;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_line(line);
        if (static_cast<int>(cells.size()) != p)
            throw input_error("row " + std::to_string(line_no) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(p));
        for (int j = 0; j < p; ++j) {
            const std::string& cell = cells[j];
            char* end = nullptr;
            const double value = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size() ||
                !std::isfinite(value))
                throw input_error("row " + std::to_string(line_no) +
                                  ", column " + std::to_string(j + 1) + " ('" +
                                  labels[j] + "'): cell '" + cell +
                                  "' is not a finite number");
            values.push_back(value);
        }
        ++rows;
    }
    if (rows == 0) throw input_error("CSV contains no data rows");
    Eigen::MatrixXd matrix(rows, p);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < p; ++j) matrix(i, j) = values[i * p + j];
    return Dataset(std::move(matrix), labels);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw input_error("failed writing '" + path + "'");
}

}  // namespace hdl
