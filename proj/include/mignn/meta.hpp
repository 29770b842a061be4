#ifndef MIGNN_META_HPP
#define MIGNN_META_HPP

#include <functional>

#include "mignn/encoder.hpp"
#include "mignn/graph.hpp"

namespace mignn {

// Graph prior: attention-pooling projection plus the two FiLM hypernetwork
// MLPs (one hidden layer, LeakyReLU), all trained end to end with the task
// prior. Output layers start at zero so the initial transform is identity.
struct GraphPrior {
    std::size_t input_dim = 0;   // d
    std::size_t hidden_dim = 0;  // hypernetwork width
    std::size_t param_dim = 0;   // d_theta of the bound encoder

    std::vector<double> w_att;                            // d x d
    std::vector<double> w_g1, b_g1, w_g2, b_g2;           // gamma MLP
    std::vector<double> w_b1, b_b1, w_b2, b_b2;           // beta MLP

    static GraphPrior init(std::size_t d, std::size_t hidden, std::size_t d_theta, Rng& rng);

    // ordered name/array/shape view shared by the optimizer and checkpoints
    struct ArrayRef {
        const char* name;
        std::vector<double>* values;
        std::array<std::size_t, 2> shape;
    };
    std::vector<ArrayRef> arrays();
};

// Tape handles for one episode's differentiable parameters
struct PriorLeaves {
    Tensor w_att;
    Tensor w_g1, b_g1, w_g2, b_g2;
    Tensor w_b1, b_b1, w_b2, b_b2;

    std::vector<Tensor> all() const {
        return {w_att, w_g1, b_g1, w_g2, b_g2, w_b1, b_b1, w_b2, b_b2};
    }
};

PriorLeaves make_prior_leaves(Tape& tape, const GraphPrior& phi);
// constant (untracked) handles for plain evaluation
PriorLeaves prior_constants(const GraphPrior& phi);

struct HyperParams {
    double inner_lr = 0.5;  // alpha
    std::size_t inner_steps = 2;
    double lambda = 0.001;
    double outer_lr = 0.01;
    std::size_t batch_size = 10;
    std::size_t max_epochs = 500;
    std::size_t patience = 30;
    bool second_order = true;
    double support_fraction = 0.5;
    std::size_t hyper_hidden = 32;
    bool fixed_episode = false;
    double leaky_slope = 0.01;

    void validate() const;
};

struct FilmFactors {
    Tensor gamma;  // [d_theta]
    Tensor beta;   // [d_theta]
};

// Attention-pooled graph representation from raw node features:
//   c = tanh(mean_v W_a x_v),  a_v = sigmoid(x_v' W_a c),
//   g = sum_v a_v (W_a x_v).  Returns a 1 x d row.
Tensor graph_embedding(const Graph& g, const Tensor& w_att);

FilmFactors film(const Tensor& graph_repr, const PriorLeaves& phi, double leaky_slope);

// theta_i = (gamma + 1) (.) theta + beta
Tensor graph_adapt(const Tensor& theta, const FilmFactors& f);

// classification loss of the encoder restricted to the given nodes; sums over
// nodes (and categories when multi-label), no averaging
Tensor loss_on_nodes(const EncoderSpec& spec, const PreparedGraph& prep, const Graph& g,
                     const std::vector<std::size_t>& nodes, const Tensor& theta,
                     bool multi_label, std::size_t num_categories);

Tensor support_loss(const EncoderSpec& spec, const PreparedGraph& prep, const Graph& g,
                    const EpisodeSplit& split, const Tensor& theta, bool multi_label,
                    std::size_t num_categories);

// Generic inner loop: steps of theta <- theta - lr * dL/dtheta. With
// second_order the inner gradients stay on the tape so an outer backward
// flows through them; otherwise they are detached (first-order variant).
Tensor inner_adapt(const Tensor& theta0, const std::function<Tensor(const Tensor&)>& loss_fn,
                   std::size_t steps, double lr, bool second_order);

Tensor task_adapt(const EncoderSpec& spec, const PreparedGraph& prep, const Graph& g,
                  const EpisodeSplit& split, const Tensor& theta_i, const HyperParams& hp,
                  bool multi_label, std::size_t num_categories);

struct EpisodeTrace {
    double query_loss = 0.0;
    double reg_norms = 0.0;  // ||gamma|| + ||beta||
};

// Full episode objective L(Q, theta') + lambda (||gamma|| + ||beta||).
// `use_film` off freezes gamma = beta = 0 (task-only ablation).
Tensor episode_objective(const EncoderSpec& spec, const PreparedGraph& prep, const Graph& g,
                         const EpisodeSplit& split, const Tensor& theta,
                         const PriorLeaves* phi, const HyperParams& hp, bool multi_label,
                         std::size_t num_categories, EpisodeTrace* trace = nullptr);

// Single-label predictions (ties toward the lowest category index)
std::vector<int> argmax_rows(const Tensor& logits);
// Multi-label decisions: sigma(logit) >= 0.5 per category
std::vector<std::vector<std::uint8_t>> threshold_rows(const Tensor& logits);

}  // namespace mignn

#endif
