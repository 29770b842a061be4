#include "mignn/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace mignn {

std::vector<std::size_t> Graph::labeled_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < node_count; ++v)
        if (labeled[v]) out.push_back(v);
    return out;
}

void Graph::validate(std::size_t feature_dim, std::size_t num_categories, bool multi_label) const {
    if (features.rows() != node_count || features.cols() != feature_dim)
        throw ValidationError("graph feature matrix shape mismatch");
    if (labeled.size() != node_count) throw ValidationError("labeled mask size mismatch");
    for (const auto& [u, v] : edges) {
        if (u >= node_count || v >= node_count)
            throw ValidationError("edge endpoint out of range");
        if (u == v) throw ValidationError("self-loop in edge list");
    }
    if (multi_label) {
        if (label_bits.size() != node_count) throw ValidationError("label rows size mismatch");
        for (std::size_t v = 0; v < node_count; ++v) {
            if (labeled[v] != (label_bits[v].size() == num_categories ? 1 : 0))
                throw ValidationError("labels present exactly where labeled_mask is set");
        }
    } else {
        if (label_index.size() != node_count) throw ValidationError("label index size mismatch");
        for (std::size_t v = 0; v < node_count; ++v) {
            if (labeled[v]) {
                if (label_index[v] < 0 || static_cast<std::size_t>(label_index[v]) >= num_categories)
                    throw ValidationError("label index out of range");
            } else if (label_index[v] != -1) {
                throw ValidationError("labels present exactly where labeled_mask is set");
            }
        }
    }
}

void GraphCollection::validate() const {
    for (const Graph& g : graphs) g.validate(feature_dim, num_categories, multi_label);
}

SparseMatrix build_normalized_adjacency(const Graph& g) {
    const std::size_t n = g.node_count;
    std::vector<double> degree(n, 1.0);  // self-loop
    for (const auto& [u, v] : g.edges) {
        degree[u] += 1.0;
        degree[v] += 1.0;
    }
    std::vector<SparseMatrix::Entry> entries;
    entries.reserve(2 * g.edges.size() + n);
    for (std::size_t i = 0; i < n; ++i) entries.push_back({i, i, 1.0 / degree[i]});
    for (const auto& [u, v] : g.edges) {
        const double w = 1.0 / std::sqrt(degree[u] * degree[v]);
        entries.push_back({u, v, w});
        entries.push_back({v, u, w});
    }
    return SparseMatrix::from_coo(n, n, std::move(entries));
}

const SparseMatrix& normalized_adjacency(Graph& g) {
    if (!g.cached_adjacency)
        g.cached_adjacency = std::make_shared<const SparseMatrix>(build_normalized_adjacency(g));
    return *g.cached_adjacency;
}

const SparseMatrix& neighbor_mean_adjacency(Graph& g) {
    if (!g.cached_neighbor_mean) {
        const std::size_t n = g.node_count;
        std::vector<double> degree(n, 0.0);
        for (const auto& [u, v] : g.edges) {
            degree[u] += 1.0;
            degree[v] += 1.0;
        }
        std::vector<SparseMatrix::Entry> entries;
        entries.reserve(2 * g.edges.size());
        for (const auto& [u, v] : g.edges) {
            entries.push_back({u, v, 1.0 / degree[u]});
            entries.push_back({v, u, 1.0 / degree[v]});
        }
        g.cached_neighbor_mean =
            std::make_shared<const SparseMatrix>(SparseMatrix::from_coo(n, n, std::move(entries)));
    }
    return *g.cached_neighbor_mean;
}

Tensor row_normalize_features(const Tensor& x) {
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<double> out(x.data());
    for (std::size_t i = 0; i < n; ++i) {
        double l1 = 0.0;
        for (std::size_t j = 0; j < d; ++j) l1 += std::abs(out[i * d + j]);
        if (l1 > 0.0)
            for (std::size_t j = 0; j < d; ++j) out[i * d + j] /= l1;
    }
    return Tensor({n, d}, std::move(out));
}

Tensor standardize_features(const Tensor& x) {
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<double> out(x.data());
    if (n == 0) return Tensor({n, d}, std::move(out));
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += out[i * d + j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = out[i * d + j] - mean;
            var += c * c;
        }
        var /= static_cast<double>(n);
        const double sd = std::sqrt(var);
        for (std::size_t i = 0; i < n; ++i) {
            const double c = out[i * d + j] - mean;
            out[i * d + j] = sd > 0.0 ? c / sd : 0.0;
        }
    }
    return Tensor({n, d}, std::move(out));
}

std::array<GraphCollection, 3> partition_graphs(const GraphCollection& c,
                                                const std::array<double, 3>& ratios,
                                                std::uint64_t seed) {
    for (double r : ratios)
        if (r <= 0.0) throw ValidationError("partition ratios must be positive");
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9)
        throw ValidationError("partition ratios must sum to 1");
    const std::size_t n = c.graphs.size();
    if (n < 3) throw ValidationError("partition requires at least 3 graphs");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::size_t n_train = static_cast<std::size_t>(std::floor(ratios[0] * static_cast<double>(n)));
    const std::size_t n_val = static_cast<std::size_t>(std::floor(ratios[1] * static_cast<double>(n)));
    const std::size_t n_test = static_cast<std::size_t>(std::floor(ratios[2] * static_cast<double>(n)));
    n_train += n - (n_train + n_val + n_test);  // remainder to train

    std::array<GraphCollection, 3> out;
    for (auto& part : out) {
        part.feature_dim = c.feature_dim;
        part.num_categories = c.num_categories;
        part.multi_label = c.multi_label;
        part.name = c.name;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Graph& g = c.graphs[order[i]];
        if (i < n_train)
            out[0].graphs.push_back(g);
        else if (i < n_train + n_val)
            out[1].graphs.push_back(g);
        else
            out[2].graphs.push_back(g);
    }
    return out;
}

EpisodeSplit sample_episode(const Graph& g, double support_fraction, Rng& rng) {
    std::vector<std::size_t> ids = g.labeled_nodes();
    if (ids.size() < 2) throw ValidationError("episode needs at least 2 labeled nodes");
    if (support_fraction <= 0.0 || support_fraction > 1.0)
        throw ValidationError("episode support fraction must be in (0, 1]");
    rng.shuffle(ids);
    const std::size_t m = static_cast<std::size_t>(
        std::ceil(support_fraction * static_cast<double>(ids.size())));
    if (m >= ids.size())
        throw ValidationError("episode query set is empty");
    EpisodeSplit split;
    split.support.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(m));
    split.query.assign(ids.begin() + static_cast<std::ptrdiff_t>(m), ids.end());
    std::sort(split.support.begin(), split.support.end());
    std::sort(split.query.begin(), split.query.end());
    return split;
}

GraphCollection synth_collection(const SynthParams& p, std::uint64_t seed) {
    if (p.n_graphs == 0 || p.feature_dim == 0 || p.num_categories == 0 ||
        p.nodes_min < 2 || p.nodes_max < p.nodes_min)
        throw ValidationError("synth_collection parameters must be positive");
    Rng rng(seed);

    std::vector<std::vector<double>> means(p.num_categories, std::vector<double>(p.feature_dim));
    for (auto& m : means)
        for (double& v : m) v = p.mean_spread * rng.normal();

    GraphCollection c;
    c.feature_dim = p.feature_dim;
    c.num_categories = p.num_categories;
    c.multi_label = false;
    c.name = "synth";

    for (std::size_t gi = 0; gi < p.n_graphs; ++gi) {
        Graph g;
        g.node_count = p.nodes_min + rng.uniform_int(p.nodes_max - p.nodes_min + 1);
        g.label_index.resize(g.node_count);
        g.labeled.assign(g.node_count, 1);
        std::vector<double> feat(g.node_count * p.feature_dim);
        std::vector<std::vector<std::size_t>> by_class(p.num_categories);
        for (std::size_t v = 0; v < g.node_count; ++v) {
            const std::size_t cls = rng.uniform_int(p.num_categories);
            g.label_index[v] = static_cast<int>(cls);
            by_class[cls].push_back(v);
            for (std::size_t j = 0; j < p.feature_dim; ++j)
                feat[v * p.feature_dim + j] = means[cls][j] + p.noise * rng.normal();
        }
        g.features = Tensor({g.node_count, p.feature_dim}, std::move(feat));

        std::set<std::pair<std::size_t, std::size_t>> edge_set;
        const std::size_t target =
            static_cast<std::size_t>(std::llround(p.avg_degree * static_cast<double>(g.node_count) / 2.0));
        for (std::size_t e = 0; e < target; ++e) {
            const std::size_t u = rng.uniform_int(g.node_count);
            std::size_t v = u;
            if (rng.uniform() < p.homophily) {
                const auto& peers = by_class[static_cast<std::size_t>(g.label_index[u])];
                if (peers.size() < 2) continue;  // no same-class partner available
                do {
                    v = peers[rng.uniform_int(peers.size())];
                } while (v == u);
            } else {
                do {
                    v = rng.uniform_int(g.node_count);
                } while (v == u);
            }
            edge_set.insert({std::min(u, v), std::max(u, v)});
        }
        g.edges.assign(edge_set.begin(), edge_set.end());
        c.graphs.push_back(std::move(g));
    }
    c.validate();
    return c;
}

Tensor one_hot_targets(const Graph& g, const std::vector<std::size_t>& nodes,
                       std::size_t num_categories) {
    Tensor t = Tensor::zeros({nodes.size(), num_categories});
    for (std::size_t r = 0; r < nodes.size(); ++r) {
        const std::size_t v = nodes[r];
        if (!g.labeled[v] || g.label_index[v] < 0)
            throw ContractError("one_hot_targets: node " + std::to_string(v) + " is unlabeled");
        t.mutable_data()[r * num_categories + static_cast<std::size_t>(g.label_index[v])] = 1.0;
    }
    return t;
}

Tensor binary_targets(const Graph& g, const std::vector<std::size_t>& nodes,
                      std::size_t num_categories) {
    Tensor t = Tensor::zeros({nodes.size(), num_categories});
    for (std::size_t r = 0; r < nodes.size(); ++r) {
        const std::size_t v = nodes[r];
        if (!g.labeled[v] || g.label_bits[v].size() != num_categories)
            throw ContractError("binary_targets: node " + std::to_string(v) + " is unlabeled");
        for (std::size_t c = 0; c < num_categories; ++c)
            t.mutable_data()[r * num_categories + c] = g.label_bits[v][c] ? 1.0 : 0.0;
    }
    return t;
}

}  // namespace mignn
