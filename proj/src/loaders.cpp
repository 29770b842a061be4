#include "mignn/loaders.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mignn {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::vector<double> parse_csv_doubles(const std::string& line, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ParseError(where + ": bad number '" + tok + "'");
        }
    }
    if (out.empty()) throw ParseError(where + ": empty line");
    return out;
}

std::vector<long> parse_csv_longs(const std::string& line, const std::string& where) {
    std::vector<long> out;
    for (double v : parse_csv_doubles(line, where)) out.push_back(static_cast<long>(v));
    return out;
}

struct KnownStats {
    std::size_t feature_dim;
    std::size_t num_categories;
    bool multi_label;
};

// Table of collections whose published statistics the loader verifies
const std::map<std::string, KnownStats> kKnownCollections = {
    {"COX2", {3, 8, false}},
    {"DHFR", {3, 9, false}},
    {"Cuneiform", {3, 7, true}},
};

}  // namespace

GraphCollection load_tudataset(const std::string& directory, const std::string& name,
                               const TudOptions& options) {
    fs::path dir(directory);
    if (!fs::exists(dir / (name + "_A.txt")) && fs::exists(dir / name / (name + "_A.txt")))
        dir /= name;
    const auto file = [&](const std::string& suffix) { return (dir / (name + suffix)).string(); };

    if (!fs::exists(file("_A.txt"))) throw LoadError("missing file " + file("_A.txt"));
    if (!fs::exists(file("_graph_indicator.txt")))
        throw LoadError("missing file " + file("_graph_indicator.txt"));

    const std::vector<std::string> indicator_lines = read_lines(file("_graph_indicator.txt"));
    const std::size_t total_nodes = indicator_lines.size();
    std::vector<std::size_t> graph_of(total_nodes);
    std::size_t n_graphs = 0;
    for (std::size_t i = 0; i < total_nodes; ++i) {
        const long gid = parse_csv_longs(indicator_lines[i], "graph_indicator line " +
                                         std::to_string(i + 1))[0];
        if (gid < 1) throw ValidationError("graph indicator ids must be 1-based");
        graph_of[i] = static_cast<std::size_t>(gid - 1);
        n_graphs = std::max(n_graphs, static_cast<std::size_t>(gid));
    }
    // contiguity check: node blocks per graph, local id = global - first
    std::vector<std::size_t> first_node(n_graphs, total_nodes), node_count(n_graphs, 0);
    for (std::size_t i = 0; i < total_nodes; ++i) {
        const std::size_t g = graph_of[i];
        first_node[g] = std::min(first_node[g], i);
        ++node_count[g];
    }
    for (std::size_t g = 0; g < n_graphs; ++g) {
        for (std::size_t i = first_node[g]; i < first_node[g] + node_count[g]; ++i)
            if (i >= total_nodes || graph_of[i] != g)
                throw ValidationError("graph indicator is not contiguous for graph " +
                                      std::to_string(g + 1));
    }

    // node labels: one or more integer channels
    const bool have_labels = fs::exists(file("_node_labels.txt"));
    const bool have_attrs = fs::exists(file("_node_attributes.txt"));
    if (!have_labels) throw LoadError("missing file " + file("_node_labels.txt"));

    const std::vector<std::string> label_lines = read_lines(file("_node_labels.txt"));
    if (label_lines.size() != total_nodes)
        throw ValidationError("node_labels row count differs from graph_indicator");
    std::vector<std::vector<long>> raw_labels(total_nodes);
    std::size_t n_channels = 0;
    for (std::size_t i = 0; i < total_nodes; ++i) {
        raw_labels[i] = parse_csv_longs(label_lines[i], "node_labels line " + std::to_string(i + 1));
        if (i == 0)
            n_channels = raw_labels[i].size();
        else if (raw_labels[i].size() != n_channels)
            throw ValidationError("node_labels channel count varies across rows");
    }

    // remap each channel's values to contiguous 0-based codes
    std::vector<std::vector<long>> channel_values(n_channels);
    for (std::size_t ch = 0; ch < n_channels; ++ch) {
        std::set<long> values;
        for (const auto& row : raw_labels) values.insert(row[ch]);
        channel_values[ch].assign(values.begin(), values.end());
    }
    const auto channel_code = [&](std::size_t ch, long v) -> std::size_t {
        const auto& vals = channel_values[ch];
        return static_cast<std::size_t>(
            std::lower_bound(vals.begin(), vals.end(), v) - vals.begin());
    };

    GraphCollection c;
    c.name = name;

    // features: attributes when present, otherwise one-hot of the non-target
    // label channels (the target channel must never leak into the input)
    std::vector<std::vector<double>> features(total_nodes);
    if (have_attrs) {
        const std::vector<std::string> attr_lines = read_lines(file("_node_attributes.txt"));
        if (attr_lines.size() != total_nodes)
            throw ValidationError("node_attributes row count differs from graph_indicator");
        for (std::size_t i = 0; i < total_nodes; ++i)
            features[i] =
                parse_csv_doubles(attr_lines[i], "node_attributes line " + std::to_string(i + 1));
        c.feature_dim = features[0].size();
        for (const auto& row : features)
            if (row.size() != c.feature_dim)
                throw ValidationError("node_attributes column count varies across rows");
    } else {
        if (n_channels < 2)
            throw LoadError(name +
                            ": no node attributes and a single label channel; features would "
                            "leak the classification target");
        std::size_t dim = 0;
        for (std::size_t ch = 0; ch < n_channels; ++ch)
            if (ch != options.target_channel) dim += channel_values[ch].size();
        c.feature_dim = dim;
        for (std::size_t i = 0; i < total_nodes; ++i) {
            std::vector<double> row(dim, 0.0);
            std::size_t off = 0;
            for (std::size_t ch = 0; ch < n_channels; ++ch) {
                if (ch == options.target_channel) continue;
                row[off + channel_code(ch, raw_labels[i][ch])] = 1.0;
                off += channel_values[ch].size();
            }
            features[i] = std::move(row);
        }
    }

    // classification target: with attributes, every label channel is a
    // target; one channel -> single-label category, several -> multi-label
    std::vector<std::size_t> target_channels;
    if (have_attrs) {
        for (std::size_t ch = 0; ch < n_channels; ++ch) target_channels.push_back(ch);
    } else {
        if (options.target_channel >= n_channels)
            throw ConfigError("target_channel out of range");
        target_channels.push_back(options.target_channel);
    }
    c.multi_label = target_channels.size() > 1;
    c.num_categories = 0;
    for (std::size_t ch : target_channels) c.num_categories += channel_values[ch].size();

    // graphs
    c.graphs.resize(n_graphs);
    for (std::size_t g = 0; g < n_graphs; ++g) {
        Graph& gr = c.graphs[g];
        gr.node_count = node_count[g];
        gr.labeled.assign(gr.node_count, 1);
        std::vector<double> feat(gr.node_count * c.feature_dim);
        if (c.multi_label) gr.label_bits.resize(gr.node_count);
        else gr.label_index.assign(gr.node_count, -1);
        for (std::size_t v = 0; v < gr.node_count; ++v) {
            const std::size_t global = first_node[g] + v;
            std::copy(features[global].begin(), features[global].end(),
                      feat.begin() + static_cast<std::ptrdiff_t>(v * c.feature_dim));
            if (c.multi_label) {
                std::vector<std::uint8_t> bits(c.num_categories, 0);
                std::size_t off = 0;
                for (std::size_t ch : target_channels) {
                    bits[off + channel_code(ch, raw_labels[global][ch])] = 1;
                    off += channel_values[ch].size();
                }
                gr.label_bits[v] = std::move(bits);
            } else {
                gr.label_index[v] = static_cast<int>(
                    channel_code(target_channels[0], raw_labels[global][target_channels[0]]));
            }
        }
        Tensor x({gr.node_count, c.feature_dim}, std::move(feat));
        if (options.standardize) x = standardize_features(x);
        if (options.row_normalize) x = row_normalize_features(x);
        gr.features = x;
    }

    // edges
    const std::vector<std::string> edge_lines = read_lines(file("_A.txt"));
    std::vector<std::set<std::pair<std::size_t, std::size_t>>> edge_sets(n_graphs);
    for (std::size_t i = 0; i < edge_lines.size(); ++i) {
        if (edge_lines[i].empty()) continue;
        const auto pair = parse_csv_longs(edge_lines[i], "A line " + std::to_string(i + 1));
        if (pair.size() != 2) throw ParseError("A line " + std::to_string(i + 1) + ": need 2 ids");
        const long u1 = pair[0], v1 = pair[1];
        if (u1 < 1 || v1 < 1 || static_cast<std::size_t>(u1) > total_nodes ||
            static_cast<std::size_t>(v1) > total_nodes)
            throw ValidationError("A line " + std::to_string(i + 1) + ": node id out of range");
        const std::size_t u = static_cast<std::size_t>(u1 - 1);
        const std::size_t v = static_cast<std::size_t>(v1 - 1);
        if (graph_of[u] != graph_of[v])
            throw ValidationError("A line " + std::to_string(i + 1) +
                                  ": edge crosses graphs (inconsistent graph indicator)");
        if (u == v) continue;  // drop self-loops
        const std::size_t g = graph_of[u];
        const std::size_t lu = u - first_node[g], lv = v - first_node[g];
        edge_sets[g].insert({std::min(lu, lv), std::max(lu, lv)});
    }
    for (std::size_t g = 0; g < n_graphs; ++g)
        c.graphs[g].edges.assign(edge_sets[g].begin(), edge_sets[g].end());

    c.validate();

    const auto known = kKnownCollections.find(name);
    if (known != kKnownCollections.end()) {
        const KnownStats& k = known->second;
        if (c.feature_dim != k.feature_dim || c.num_categories != k.num_categories ||
            c.multi_label != k.multi_label)
            throw ValidationError(name + ": loaded dimensions (d=" + std::to_string(c.feature_dim) +
                                  ", |C|=" + std::to_string(c.num_categories) +
                                  ") do not match the published statistics");
    }
    return c;
}

GraphCollection load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path);

    GraphCollection c;
    c.name = fs::path(path).stem().string();
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "line " + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (!j.contains("n") || !j.contains("edges") || !j.contains("x") || !j.contains("y"))
            throw ParseError(where + ": record needs n, edges, x, y");

        Graph g;
        g.node_count = j["n"].get<std::size_t>();
        if (j["x"].size() != g.node_count) throw ParseError(where + ": x row count != n");

        const bool multi = !j["y"].empty() && j["y"][0].is_array();
        if (first) {
            c.feature_dim = j["x"].empty() ? 0 : j["x"][0].size();
            c.multi_label = multi;
            first = false;
        } else if (multi != c.multi_label) {
            throw ParseError(where + ": mixed single/multi-label records");
        }

        std::vector<double> feat;
        feat.reserve(g.node_count * c.feature_dim);
        for (const auto& row : j["x"]) {
            if (row.size() != c.feature_dim) throw ParseError(where + ": feature width varies");
            for (const auto& v : row) feat.push_back(v.get<double>());
        }
        g.features = Tensor({g.node_count, c.feature_dim}, std::move(feat));

        if (j["y"].size() != g.node_count) throw ParseError(where + ": y row count != n");
        std::vector<std::uint8_t> labeled(g.node_count, 1);
        if (j.contains("labeled")) {
            if (j["labeled"].size() != g.node_count)
                throw ParseError(where + ": labeled row count != n");
            for (std::size_t v = 0; v < g.node_count; ++v)
                labeled[v] = j["labeled"][v].get<bool>() ? 1 : 0;
        }
        g.labeled = labeled;
        if (c.multi_label) {
            g.label_bits.resize(g.node_count);
            for (std::size_t v = 0; v < g.node_count; ++v) {
                if (!labeled[v]) continue;
                std::vector<std::uint8_t> bits;
                for (const auto& b : j["y"][v]) {
                    const int iv = b.get<int>();
                    if (iv != 0 && iv != 1) throw ParseError(where + ": multi-label entries must be 0/1");
                    bits.push_back(static_cast<std::uint8_t>(iv));
                }
                if (c.num_categories == 0) c.num_categories = bits.size();
                if (bits.size() != c.num_categories)
                    throw ParseError(where + ": label width varies");
                g.label_bits[v] = std::move(bits);
            }
        } else {
            g.label_index.assign(g.node_count, -1);
            for (std::size_t v = 0; v < g.node_count; ++v) {
                if (!labeled[v]) continue;
                const long y = j["y"][v].get<long>();
                if (y < 0) throw ParseError(where + ": negative category");
                g.label_index[v] = static_cast<int>(y);
                c.num_categories = std::max(c.num_categories, static_cast<std::size_t>(y) + 1);
            }
        }

        for (const auto& e : j["edges"]) {
            if (e.size() != 2) throw ParseError(where + ": edge needs two endpoints");
            const std::size_t u = e[0].get<std::size_t>(), v = e[1].get<std::size_t>();
            if (u >= g.node_count || v >= g.node_count)
                throw ParseError(where + ": edge endpoint >= node count");
            if (u == v) throw ParseError(where + ": self-loop");
            g.edges.push_back({std::min(u, v), std::max(u, v)});
        }
        std::sort(g.edges.begin(), g.edges.end());
        g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());

        c.graphs.push_back(std::move(g));
    }
    if (c.graphs.empty()) throw LoadError(path + ": empty collection");
    c.validate();
    return c;
}

}  // namespace mignn
