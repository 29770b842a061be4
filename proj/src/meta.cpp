#include "mignn/meta.hpp"

#include <cmath>

namespace mignn {

GraphPrior GraphPrior::init(std::size_t d, std::size_t hidden, std::size_t d_theta, Rng& rng) {
    GraphPrior p;
    p.input_dim = d;
    p.hidden_dim = hidden;
    p.param_dim = d_theta;
    const auto glorot = [&rng](std::vector<double>& v, std::size_t rows, std::size_t cols) {
        const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
        v.resize(rows * cols);
        for (double& x : v) x = rng.uniform(-bound, bound);
    };
    glorot(p.w_att, d, d);
    glorot(p.w_g1, d, hidden);
    glorot(p.w_b1, d, hidden);
    p.b_g1.assign(hidden, 0.0);
    p.b_b1.assign(hidden, 0.0);
    // zero output layers: gamma = beta = 0 at start, so the graph-level
    // transform begins as the identity
    p.w_g2.assign(hidden * d_theta, 0.0);
    p.w_b2.assign(hidden * d_theta, 0.0);
    p.b_g2.assign(d_theta, 0.0);
    p.b_b2.assign(d_theta, 0.0);
    return p;
}

std::vector<GraphPrior::ArrayRef> GraphPrior::arrays() {
    return {
        {"phi_att", &w_att, {input_dim, input_dim}},
        {"phi_gamma_w1", &w_g1, {input_dim, hidden_dim}},
        {"phi_gamma_b1", &b_g1, {1, hidden_dim}},
        {"phi_gamma_w2", &w_g2, {hidden_dim, param_dim}},
        {"phi_gamma_b2", &b_g2, {1, param_dim}},
        {"phi_beta_w1", &w_b1, {input_dim, hidden_dim}},
        {"phi_beta_b1", &b_b1, {1, hidden_dim}},
        {"phi_beta_w2", &w_b2, {hidden_dim, param_dim}},
        {"phi_beta_b2", &b_b2, {1, param_dim}},
    };
}

PriorLeaves make_prior_leaves(Tape& tape, const GraphPrior& phi) {
    PriorLeaves l;
    l.w_att = tape.leaf({phi.input_dim, phi.input_dim}, phi.w_att);
    l.w_g1 = tape.leaf({phi.input_dim, phi.hidden_dim}, phi.w_g1);
    l.b_g1 = tape.leaf({1, phi.hidden_dim}, phi.b_g1);
    l.w_g2 = tape.leaf({phi.hidden_dim, phi.param_dim}, phi.w_g2);
    l.b_g2 = tape.leaf({1, phi.param_dim}, phi.b_g2);
    l.w_b1 = tape.leaf({phi.input_dim, phi.hidden_dim}, phi.w_b1);
    l.b_b1 = tape.leaf({1, phi.hidden_dim}, phi.b_b1);
    l.w_b2 = tape.leaf({phi.hidden_dim, phi.param_dim}, phi.w_b2);
    l.b_b2 = tape.leaf({1, phi.param_dim}, phi.b_b2);
    return l;
}

PriorLeaves prior_constants(const GraphPrior& phi) {
    PriorLeaves l;
    l.w_att = Tensor({phi.input_dim, phi.input_dim}, phi.w_att);
    l.w_g1 = Tensor({phi.input_dim, phi.hidden_dim}, phi.w_g1);
    l.b_g1 = Tensor({1, phi.hidden_dim}, phi.b_g1);
    l.w_g2 = Tensor({phi.hidden_dim, phi.param_dim}, phi.w_g2);
    l.b_g2 = Tensor({1, phi.param_dim}, phi.b_g2);
    l.w_b1 = Tensor({phi.input_dim, phi.hidden_dim}, phi.w_b1);
    l.b_b1 = Tensor({1, phi.hidden_dim}, phi.b_b1);
    l.w_b2 = Tensor({phi.hidden_dim, phi.param_dim}, phi.w_b2);
    l.b_b2 = Tensor({1, phi.param_dim}, phi.b_b2);
    return l;
}

void HyperParams::validate() const {
    if (inner_lr <= 0.0) throw ValidationError("inner learning rate must be positive");
    if (lambda < 0.0) throw ValidationError("lambda must be non-negative");
    if (outer_lr <= 0.0) throw ValidationError("outer learning rate must be positive");
    if (batch_size == 0) throw ValidationError("batch size must be positive");
    if (support_fraction <= 0.0 || support_fraction >= 1.0)
        throw ValidationError("support fraction must be in (0, 1)");
}

Tensor graph_embedding(const Graph& g, const Tensor& w_att) {
    if (g.node_count == 0) throw ContractError("graph_embedding: empty graph");
    const std::size_t n = g.node_count;
    // projected features: row v is W_a x_v
    Tensor projected = matmul(g.features, transpose(w_att));           // n x d
    Tensor context = tanh(scale(colwise_sum(projected), 1.0 / static_cast<double>(n)));  // 1 x d
    Tensor query = matmul(w_att, reshape(context, {context.cols(), 1}));  // d x 1
    Tensor attn = sigmoid(matmul(g.features, query));                     // n x 1
    Tensor pooled = matmul(transpose(projected), attn);                   // d x 1
    return transpose(pooled);                                             // 1 x d
}

FilmFactors film(const Tensor& graph_repr, const PriorLeaves& phi, double leaky_slope) {
    if (graph_repr.rows() != 1 || graph_repr.cols() != phi.w_g1.shape()[0])
        throw ContractError("film: graph representation width does not match the hypernetwork");
    const std::size_t d_theta = phi.w_g2.shape()[1];
    const auto mlp = [&](const Tensor& w1, const Tensor& b1, const Tensor& w2, const Tensor& b2) {
        Tensor h = leaky_relu(add(matmul(graph_repr, w1), b1), leaky_slope);
        return reshape(add(matmul(h, w2), b2), {d_theta});
    };
    return FilmFactors{mlp(phi.w_g1, phi.b_g1, phi.w_g2, phi.b_g2),
                       mlp(phi.w_b1, phi.b_b1, phi.w_b2, phi.b_b2)};
}

Tensor graph_adapt(const Tensor& theta, const FilmFactors& f) {
    if (theta.numel() != f.gamma.numel() || theta.numel() != f.beta.numel())
        throw ContractError("graph_adapt: factor lengths differ from d_theta");
    Tensor ones = Tensor::full(f.gamma.shape(), 1.0);
    return add(hadamard(add(f.gamma, ones), theta), f.beta);
}

Tensor loss_on_nodes(const EncoderSpec& spec, const PreparedGraph& prep, const Graph& g,
                     const std::vector<std::size_t>& nodes, const Tensor& theta,
                     bool multi_label, std::size_t num_categories) {
    if (nodes.empty()) throw ContractError("loss_on_nodes: empty node set");
    Tensor logits = gather_rows(forward_logits(spec, prep, theta), nodes);
    if (multi_label)
        return sigmoid_bce(logits, binary_targets(g, nodes, num_categories));
    return softmax_cross_entropy_rows(logits, one_hot_targets(g, nodes, num_categories));
}

Tensor support_loss(const EncoderSpec& spec, const PreparedGraph& prep, const Graph& g,
                    const EpisodeSplit& split, const Tensor& theta, bool multi_label,
                    std::size_t num_categories) {
    if (split.support.empty()) throw ContractError("support set is empty");
    return loss_on_nodes(spec, prep, g, split.support, theta, multi_label, num_categories);
}

Tensor inner_adapt(const Tensor& theta0, const std::function<Tensor(const Tensor&)>& loss_fn,
                   std::size_t steps, double lr, bool second_order) {
    if (steps == 0) return theta0;
    if (theta0.on_tape() && Tape::active() == theta0.tape()) {
        Tensor theta = theta0;
        for (std::size_t s = 0; s < steps; ++s) {
            Tensor loss = loss_fn(theta);
            if (!loss.on_tape()) return theta;  // loss does not depend on theta
            Tensor grad = backward(loss, {theta}, /*create_graph=*/second_order)[0];
            theta = sub(theta, scale(grad, lr));
        }
        return theta;
    }
    // plain evaluation: the steps still need gradients, so run them on a
    // confined local tape and return detached values
    Tape local;
    Tape::Activate scope(local);
    Tensor theta = local.leaf(theta0.shape(), theta0.data());
    for (std::size_t s = 0; s < steps; ++s) {
        Tensor loss = loss_fn(theta);
        if (!loss.on_tape()) break;
        Tensor grad = backward(loss, {theta})[0];
        theta = sub(theta, scale(grad, lr));
    }
    return theta.detach();
}

Tensor task_adapt(const EncoderSpec& spec, const PreparedGraph& prep, const Graph& g,
                  const EpisodeSplit& split, const Tensor& theta_i, const HyperParams& hp,
                  bool multi_label, std::size_t num_categories) {
    // The support loss sums over nodes (and categories when multi-label), so
    // the published per-dataset rates keep their calibration only if the step
    // is normalized by the number of summed terms.
    const double terms = static_cast<double>(split.support.size()) *
                         (multi_label ? static_cast<double>(num_categories) : 1.0);
    return inner_adapt(
        theta_i,
        [&](const Tensor& t) {
            return support_loss(spec, prep, g, split, t, multi_label, num_categories);
        },
        hp.inner_steps, hp.inner_lr / terms, hp.second_order);
}

Tensor episode_objective(const EncoderSpec& spec, const PreparedGraph& prep, const Graph& g,
                         const EpisodeSplit& split, const Tensor& theta,
                         const PriorLeaves* phi, const HyperParams& hp, bool multi_label,
                         std::size_t num_categories, EpisodeTrace* trace) {
    if (split.query.empty()) throw ContractError("episode objective: empty query set");
    for (std::size_t v : split.query)
        if (!g.labeled[v]) throw ContractError("episode objective: query labels missing");

    Tensor theta_i = theta;
    Tensor reg;
    if (phi != nullptr) {
        Tensor repr = graph_embedding(g, phi->w_att);
        FilmFactors factors = film(repr, *phi, hp.leaky_slope);
        theta_i = graph_adapt(theta, factors);
        reg = add(l2_norm(factors.gamma), l2_norm(factors.beta));
    }
    Tensor adapted = task_adapt(spec, prep, g, split, theta_i, hp, multi_label, num_categories);
    Tensor query_loss =
        loss_on_nodes(spec, prep, g, split.query, adapted, multi_label, num_categories);

    Tensor objective = query_loss;
    if (phi != nullptr) objective = add(query_loss, scale(reg, hp.lambda));
    if (trace != nullptr) {
        trace->query_loss = query_loss.value();
        trace->reg_norms = phi != nullptr ? reg.value() : 0.0;
    }
    return objective;
}

std::vector<int> argmax_rows(const Tensor& logits) {
    const std::size_t n = logits.rows(), c = logits.cols();
    std::vector<int> out(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = logits(i, 0);
        int arg = 0;
        for (std::size_t j = 1; j < c; ++j) {
            if (logits(i, j) > best) {  // strict: ties go to the lowest index
                best = logits(i, j);
                arg = static_cast<int>(j);
            }
        }
        out[i] = arg;
    }
    return out;
}

std::vector<std::vector<std::uint8_t>> threshold_rows(const Tensor& logits) {
    const std::size_t n = logits.rows(), c = logits.cols();
    std::vector<std::vector<std::uint8_t>> out(n, std::vector<std::uint8_t>(c, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j)
            out[i][j] = logits(i, j) >= 0.0 ? 1 : 0;  // sigma(z) >= 0.5  <=>  z >= 0
    return out;
}

}  // namespace mignn
