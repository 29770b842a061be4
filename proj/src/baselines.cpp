#include "mignn/baselines.hpp"

#include <chrono>
#include <cmath>

namespace mignn {

namespace {



double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::uint64_t eval_seed_of(std::uint64_t seed) { return Rng(seed).fork(5).next_u64(); }

Predictions predict_plain(const EncoderSpec& spec, Graph& g, const EpisodeSplit& split,
                          const ParamVector& theta, bool multi_label) {
    PreparedGraph prep = prepare_graph(spec, g);
    Tensor logits =
        gather_rows(forward_logits(spec, prep, Tensor({theta.dim()}, theta.values)), split.query);
    Predictions out;
    if (multi_label)
        out.decisions = threshold_rows(logits);
    else
        out.categories = argmax_rows(logits);
    return out;
}

Predictions predict_knn(const EncoderSpec& spec, Graph& g, const EpisodeSplit& split,
                        const ParamVector& theta, bool multi_label, std::size_t num_categories) {
    PreparedGraph prep = prepare_graph(spec, g);
    Tensor reps = hidden_representation(spec, prep, Tensor({theta.dim()}, theta.values));
    const std::size_t d = reps.cols();
    Predictions out;
    for (std::size_t q : split.query) {
        double best = 0.0;
        std::size_t best_s = split.support[0];
        bool first = true;
        for (std::size_t s : split.support) {
            double dist = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = reps(q, j) - reps(s, j);
                dist += diff * diff;
            }
            if (first || dist < best) {  // ties keep the earliest support node
                best = dist;
                best_s = s;
                first = false;
            }
        }
        if (multi_label) {
            std::vector<std::uint8_t> bits(num_categories, 0);
            for (std::size_t j = 0; j < num_categories; ++j) bits[j] = g.label_bits[best_s][j];
            out.decisions.push_back(std::move(bits));
        } else {
            out.categories.push_back(g.label_index[best_s]);
        }
    }
    return out;
}

}  // namespace

Method parse_method(const std::string& name) {
    if (name == "mignn") return Method::MiGnn;
    if (name == "induct") return Method::Induct;
    if (name == "transduct") return Method::Transduct;
    if (name == "finetune_agf") return Method::FinetuneAgf;
    if (name == "knn") return Method::Knn;
    if (name == "meta_gnn") return Method::MetaGnn;
    if (name == "graph_only") return Method::GraphOnly;
    if (name == "task_only") return Method::TaskOnly;
    throw ConfigError("unknown method '" + name + "'");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::MiGnn: return "mignn";
        case Method::Induct: return "induct";
        case Method::Transduct: return "transduct";
        case Method::FinetuneAgf: return "finetune_agf";
        case Method::Knn: return "knn";
        case Method::MetaGnn: return "meta_gnn";
        case Method::GraphOnly: return "graph_only";
        case Method::TaskOnly: return "task_only";
    }
    throw ConfigError("unknown method");
}

std::vector<EvalEpisode> eval_episodes_for_seed(const GraphCollection& test,
                                                const HyperParams& hp, std::uint64_t seed) {
    return make_eval_episodes(test, hp.support_fraction, eval_seed_of(seed));
}

SeedResult run_method(Method method, GraphCollection& train, GraphCollection& val,
                      GraphCollection& test, const EncoderSpec& spec, const HyperParams& hp,
                      std::uint64_t seed, MetaState* trained_state) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<EvalEpisode> episodes = eval_episodes_for_seed(test, hp, seed);
    const bool multi = test.multi_label;

    EvalCounts counts;
    MetaState state;
    switch (method) {
        case Method::MiGnn: {
            state = train_mignn(train, val, spec, hp, seed, /*use_film=*/true);
            counts = evaluate(test, episodes, state, hp);
            break;
        }
        case Method::MetaGnn:
        case Method::TaskOnly: {
            state = train_mignn(train, val, spec, hp, seed, /*use_film=*/false);
            counts = evaluate(test, episodes, state, hp);
            break;
        }
        case Method::GraphOnly: {
            HyperParams hp0 = hp;
            hp0.inner_steps = 0;
            state = train_mignn(train, val, spec, hp0, seed, /*use_film=*/true);
            counts = evaluate(test, episodes, state, hp0);
            break;
        }
        case Method::Induct: {
            state = train_supervised(train, val, spec, hp, seed);
            HyperParams frozen = hp;
            frozen.inner_steps = 0;  // labeled test nodes are not used to adapt
            counts = evaluate(test, episodes, state, frozen);
            break;
        }
        case Method::FinetuneAgf: {
            state = train_supervised(train, val, spec, hp, seed);
            counts = evaluate(test, episodes, state, hp);
            break;
        }
        case Method::Knn: {
            state = train_supervised(train, val, spec, hp, seed);
            counts = evaluate_with(test, episodes,
                                   [&](std::size_t, Graph& g, const EpisodeSplit& split) {
                                       return predict_knn(spec, g, split, state.theta, multi,
                                                          test.num_categories);
                                   });
            break;
        }
        case Method::Transduct: {
            state.spec = spec;
            state.hp = hp;
            state.seed = seed;
            counts = evaluate_with(
                test, episodes, [&](std::size_t gi, Graph& g, const EpisodeSplit& split) {
                    ParamVector theta = train_transduct(
                        g, split.support, spec, hp, Rng(seed).fork(100 + gi).next_u64(),
                        kTransductEpochs);
                    return predict_plain(spec, g, split, theta, multi);
                });
            break;
        }
    }

    if (trained_state != nullptr) *trained_state = state;
    SeedResult r;
    r.accuracy = counts.accuracy();
    r.micro_f1 = counts.micro_f1();
    r.runtime_sec = seconds_since(t0);
    return r;
}

double mean_film_norms(const MetaState& state, GraphCollection& c) {
    if (!state.use_film || c.graphs.empty()) return 0.0;
    double sum = 0.0;
    for (Graph& g : c.graphs) {
        Tape tape;
        Tape::Activate scope(tape);
        PriorLeaves leaves = make_prior_leaves(tape, state.phi);
        FilmFactors f = film(graph_embedding(g, leaves.w_att), leaves, state.hp.leaky_slope);
        sum += l2_norm(f.gamma).value() + l2_norm(f.beta).value();
    }
    return sum / static_cast<double>(c.graphs.size());
}

}  // namespace mignn
