#ifndef MIGNN_LOADERS_HPP
#define MIGNN_LOADERS_HPP

#include <optional>
#include <string>

#include "mignn/graph.hpp"

namespace mignn {

struct TudOptions {
    // which node-label channel is the classification target when attributes
    // are absent and labels must double as features; with attributes present
    // every label channel is part of the target
    std::size_t target_channel = 0;
    // per-graph column z-score of the input features
    bool standardize = true;
    bool row_normalize = false;
};

// Multi-file graph-collection format: <name>_A.txt (1-based global edge
// pairs), <name>_graph_indicator.txt, <name>_node_labels.txt and optional
// <name>_node_attributes.txt. Accepts either the directory holding the files
// or its parent containing a <name>/ subdirectory.
GraphCollection load_tudataset(const std::string& directory, const std::string& name,
                               const TudOptions& options = {});

// JSON-lines format, one graph object per line:
//   {"n": int, "edges": [[u,v],...], "x": [[f,...],...],
//    "y": [int,...] | [[0/1,...],...], "labeled": [bool,...]}
GraphCollection load_jsonl(const std::string& path);

}  // namespace mignn

#endif
