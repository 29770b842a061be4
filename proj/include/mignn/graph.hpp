#ifndef MIGNN_GRAPH_HPP
#define MIGNN_GRAPH_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mignn/common.hpp"
#include "mignn/sparse.hpp"
#include "mignn/tensor.hpp"

namespace mignn {

// One graph of a collection: undirected deduplicated edges with 0-based local
// node ids, a dense feature matrix, and per-node labels. Exactly one of
// label_index / label_bits is populated depending on the collection's
// multi_label flag; unlabeled nodes carry -1 / an empty row.
struct Graph {
    std::size_t node_count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // u < v
    Tensor features;                                         // node_count x d
    std::vector<int> label_index;                            // single-label
    std::vector<std::vector<std::uint8_t>> label_bits;       // multi-label
    std::vector<std::uint8_t> labeled;

    // filled on first use; immutable afterwards
    std::shared_ptr<const SparseMatrix> cached_adjacency;
    std::shared_ptr<const SparseMatrix> cached_neighbor_mean;

    std::vector<std::size_t> labeled_nodes() const;
    void validate(std::size_t feature_dim, std::size_t num_categories, bool multi_label) const;
};

struct GraphCollection {
    std::vector<Graph> graphs;
    std::size_t feature_dim = 0;
    std::size_t num_categories = 0;
    bool multi_label = false;
    std::string name;

    void validate() const;
};

// Disjoint support/query split of a graph's labeled nodes. Labels are looked
// up on the graph; at pure prediction time the query ids may point at
// unlabeled nodes.
struct EpisodeSplit {
    std::vector<std::size_t> support;
    std::vector<std::size_t> query;
};

// S_hat = D^{-1/2} (A + I) D^{-1/2}, cached on the graph
const SparseMatrix& normalized_adjacency(Graph& g);
SparseMatrix build_normalized_adjacency(const Graph& g);

// row-normalized adjacency without self-loops (neighbor mean); isolated
// nodes get an all-zero row
const SparseMatrix& neighbor_mean_adjacency(Graph& g);

// each nonzero row divided by its L1 norm
Tensor row_normalize_features(const Tensor& x);

// per-column z-score within one graph; zero-variance columns become zero
Tensor standardize_features(const Tensor& x);

std::array<GraphCollection, 3> partition_graphs(const GraphCollection& c,
                                                const std::array<double, 3>& ratios,
                                                std::uint64_t seed);

EpisodeSplit sample_episode(const Graph& g, double support_fraction, Rng& rng);

struct SynthParams {
    std::size_t n_graphs = 20;
    std::size_t nodes_min = 10;
    std::size_t nodes_max = 20;
    std::size_t feature_dim = 5;
    std::size_t num_categories = 3;
    double homophily = 0.9;
    double mean_spread = 2.0;
    double noise = 0.5;
    double avg_degree = 4.0;
};

// Deterministic synthetic collection: class-dependent Gaussian features,
// edges preferring same-class endpoints with the given probability.
GraphCollection synth_collection(const SynthParams& p, std::uint64_t seed);

// builders for targets used by losses and metrics
Tensor one_hot_targets(const Graph& g, const std::vector<std::size_t>& nodes,
                       std::size_t num_categories);
Tensor binary_targets(const Graph& g, const std::vector<std::size_t>& nodes,
                      std::size_t num_categories);

}  // namespace mignn

#endif
