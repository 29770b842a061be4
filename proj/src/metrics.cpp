#include "mignn/metrics.hpp"

#include <cmath>

namespace mignn {

namespace {

// two-sided 95% t quantiles for df = 1..30; 1.96 beyond
constexpr double kT95[30] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                             2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                             2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                             2.060,  2.056, 2.052, 2.048, 2.045, 2.042};

double t_quantile(std::size_t df) {
    if (df == 0) throw ContractError("confidence interval needs df >= 1");
    return df <= 30 ? kT95[df - 1] : 1.96;
}

}  // namespace

std::vector<EvalEpisode> make_eval_episodes(const GraphCollection& c, double support_fraction,
                                            std::uint64_t seed) {
    std::vector<EvalEpisode> out;
    Rng root(seed);
    for (std::size_t i = 0; i < c.graphs.size(); ++i) {
        Rng rng = root.fork(i);
        out.push_back({i, sample_episode(c.graphs[i], support_fraction, rng)});
    }
    return out;
}

EvalCounts evaluate_with(GraphCollection& c, const std::vector<EvalEpisode>& episodes,
                         const Predictor& predictor) {
    EvalCounts counts;
    for (const EvalEpisode& ep : episodes) {
        Graph& g = c.graphs[ep.graph_index];
        for (std::size_t v : ep.split.query)
            if (!g.labeled[v])
                throw ContractError("evaluate: query node without ground-truth label");
        const Predictions pred = predictor(ep.graph_index, g, ep.split);
        if (c.multi_label) {
            for (std::size_t r = 0; r < ep.split.query.size(); ++r) {
                const auto& truth = g.label_bits[ep.split.query[r]];
                const auto& dec = pred.decisions[r];
                for (std::size_t j = 0; j < c.num_categories; ++j) {
                    const bool t = truth[j] != 0, p = dec[j] != 0;
                    counts.total += 1;
                    if (t == p) counts.correct += 1;
                    if (p && t) counts.tp += 1;
                    if (p && !t) counts.fp += 1;
                    if (!p && t) counts.fn += 1;
                }
            }
        } else {
            for (std::size_t r = 0; r < ep.split.query.size(); ++r) {
                const int truth = g.label_index[ep.split.query[r]];
                const int p = pred.categories[r];
                counts.total += 1;
                if (p == truth) {
                    counts.correct += 1;
                    counts.tp += 1;
                } else {
                    counts.fp += 1;  // for the predicted class
                    counts.fn += 1;  // for the true class
                }
            }
        }
    }
    return counts;
}

EvalCounts evaluate(GraphCollection& c, const std::vector<EvalEpisode>& episodes,
                    const MetaState& state, const HyperParams& hp) {
    return evaluate_with(c, episodes, [&](std::size_t, Graph& g, const EpisodeSplit& split) {
        return predict(g, split, state, hp);
    });
}

std::pair<double, double> confidence_interval(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) throw ContractError("confidence interval needs at least 2 values");
    bool all_equal = true;
    for (double v : values) all_equal = all_equal && v == values[0];
    if (all_equal) return {values[0], 0.0};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const double half = t_quantile(n - 1) * sd / std::sqrt(static_cast<double>(n));
    return {mean, half};
}

}  // namespace mignn
