#ifndef MIGNN_TRAIN_HPP
#define MIGNN_TRAIN_HPP

#include <string>

#include "mignn/meta.hpp"

namespace mignn {

struct AdamState {
    std::vector<double> m, v;
    std::size_t step = 0;
};

// named views over the trainable arrays, in a fixed order
struct ParamBundle {
    struct Entry {
        std::string name;
        std::vector<double>* values;
    };
    std::vector<Entry> entries;

    std::size_t total() const;
};

void adam_step(AdamState& opt, const ParamBundle& params,
               const std::vector<std::vector<double>>& grads, double lr);

struct TrainLogEntry {
    std::size_t epoch = 0;
    double train_objective = 0.0;  // mean episode objective over the epoch
    double val_objective = 0.0;
    double val_query_loss = 0.0;
    double val_accuracy = 0.0;
};

struct MetaState {
    EncoderSpec spec;
    HyperParams hp;
    bool use_film = true;
    bool multi_label = false;
    std::uint64_t seed = 0;
    ParamVector theta;
    GraphPrior phi;
    AdamState opt;
    std::vector<TrainLogEntry> log;

    ParamBundle trainables();
};

// Algorithm: shuffle training graphs into batches, per graph sample an
// episode and compute the episode objective, sum over the batch, one Adam
// step on {theta, phi}. Validation runs fixed episodes every epoch; the kept
// state and the patience counter follow validation query accuracy (the
// objective is logged alongside, but selecting on it drifts toward
// over-confident late epochs with measurably worse decisions). `use_film`
// off trains the task prior alone (MAML-style ablation).
MetaState train_mignn(GraphCollection& train_graphs, GraphCollection& val_graphs,
                      const EncoderSpec& spec, const HyperParams& hp, std::uint64_t seed,
                      bool use_film = true);

// Standard supervised encoder training on all labeled nodes of each training
// graph (the inductive baseline); same optimizer and early stopping.
MetaState train_supervised(GraphCollection& train_graphs, GraphCollection& val_graphs,
                           const EncoderSpec& spec, const HyperParams& hp, std::uint64_t seed);

// From-scratch training on one graph's support nodes (transductive baseline)
ParamVector train_transduct(Graph& g, const std::vector<std::size_t>& support,
                            const EncoderSpec& spec, const HyperParams& hp, std::uint64_t seed,
                            std::size_t epochs);

struct Predictions {
    std::vector<int> categories;                       // single-label
    std::vector<std::vector<std::uint8_t>> decisions;  // multi-label
};

// Dual adaptation on the support set, then query predictions
Predictions predict(Graph& g, const EpisodeSplit& split, const MetaState& state,
                    const HyperParams& hp);

void save_checkpoint(const std::string& path, const MetaState& state);
MetaState load_checkpoint(const std::string& path);

}  // namespace mignn

#endif
