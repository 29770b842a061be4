#ifndef MIGNN_METRICS_HPP
#define MIGNN_METRICS_HPP

#include <functional>

#include "mignn/train.hpp"

namespace mignn {

// Pooled prediction decisions over all query nodes of all test graphs.
// Single-label: one decision per node. Multi-label: one binary decision per
// (node, category) pair.
struct EvalCounts {
    std::size_t correct = 0;
    std::size_t total = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
    double micro_f1() const {
        const std::size_t denom = 2 * tp + fp + fn;
        return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    }
};

struct EvalEpisode {
    std::size_t graph_index;
    EpisodeSplit split;
};

// one fixed 50/50-style split per test graph, deterministic per (seed, index)
std::vector<EvalEpisode> make_eval_episodes(const GraphCollection& c, double support_fraction,
                                            std::uint64_t seed);

using Predictor =
    std::function<Predictions(std::size_t graph_index, Graph& g, const EpisodeSplit& split)>;

EvalCounts evaluate_with(GraphCollection& c, const std::vector<EvalEpisode>& episodes,
                         const Predictor& predictor);

// dual-adaptation predictions from a trained state
EvalCounts evaluate(GraphCollection& c, const std::vector<EvalEpisode>& episodes,
                    const MetaState& state, const HyperParams& hp);

// two-sided 95% Student-t interval: (mean, t * sd / sqrt(n))
std::pair<double, double> confidence_interval(const std::vector<double>& values);

}  // namespace mignn

#endif
