#ifndef MIGNN_BASELINES_HPP
#define MIGNN_BASELINES_HPP

#include "mignn/metrics.hpp"

namespace mignn {

enum class Method {
    MiGnn,
    Induct,
    Transduct,
    FinetuneAgf,
    Knn,
    MetaGnn,
    GraphOnly,
    TaskOnly,
};

Method parse_method(const std::string& name);
std::string method_name(Method m);

// fixed budget for from-scratch training on a single test graph
inline constexpr std::size_t kTransductEpochs = 200;

struct SeedResult {
    double accuracy = 0.0;
    double micro_f1 = 0.0;
    double runtime_sec = 0.0;
};

// Trains the given method on (train, val), evaluates on the test graphs with
// the shared per-seed evaluation episodes, and returns pooled metrics.
// - transduct:   per test graph, train the encoder from scratch on its support
// - induct:      supervised training on the training graphs, frozen at test
// - finetune_agf: induct plus inner_steps support gradient steps per test graph
// - knn:         induct representations, 1-nearest support neighbor (Euclidean)
// - meta_gnn / task_only: graph-level adaptation removed (no FiLM)
// - graph_only:  inner_steps forced to 0
SeedResult run_method(Method method, GraphCollection& train, GraphCollection& val,
                      GraphCollection& test, const EncoderSpec& spec, const HyperParams& hp,
                      std::uint64_t seed, MetaState* trained_state = nullptr);

// evaluation episodes shared by every method for one seed
std::vector<EvalEpisode> eval_episodes_for_seed(const GraphCollection& test,
                                                const HyperParams& hp, std::uint64_t seed);

// mean of ||gamma|| + ||beta|| produced by the trained graph prior over a
// collection (logged by the regularization sweep)
double mean_film_norms(const MetaState& state, GraphCollection& c);

}  // namespace mignn

#endif
