#ifndef MIGNN_ENCODER_HPP
#define MIGNN_ENCODER_HPP

#include <array>
#include <string>
#include <vector>

#include "mignn/graph.hpp"
#include "mignn/ops.hpp"

namespace mignn {

enum class Arch { SGC, GCN, SAGE };

Arch parse_arch(const std::string& name);
std::string arch_name(Arch a);

// Two-layer encoders expressed as pure maps from (graph, flat parameter
// vector) to node logits, so parameters can be transformed and adapted as
// plain vectors. No softmax (losses apply it). Bias rows appear in the
// parameter list as 1 x dim shapes and start at zero; without them a model on
// centered features cannot express the class priors at all.
struct EncoderSpec {
    Arch arch = Arch::SGC;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 16;
    std::size_t output_dim = 0;
    std::size_t propagation_steps = 2;  // SGC only
    bool sgc_collapsed = false;         // single d x |C| map instead of two layers
    bool biases = true;
    double leaky_slope = 0.01;

    std::vector<std::array<std::size_t, 2>> param_shapes() const;
    std::size_t param_dim() const;
};

// Flattened encoder parameters: layer order, row-major within a matrix.
struct ParamVector {
    std::vector<double> values;
    std::vector<std::array<std::size_t, 2>> shapes;
    Arch arch = Arch::SGC;

    std::size_t dim() const { return values.size(); }
};

// Glorot-uniform entries per matrix, deterministic under the generator
ParamVector init_params(const EncoderSpec& spec, Rng& rng);

// flat vector -> per-layer matrices (tape-aware, lossless)
std::vector<Tensor> unflatten(const EncoderSpec& spec, const Tensor& flat);
// per-layer matrices -> flat vector (plain values)
Tensor flatten_mats(const std::vector<Tensor>& mats);

// Per-graph constants reused across forward calls: propagated features for
// SGC, first-hop products for GCN/SAGE, and the propagation operators.
struct PreparedGraph {
    Tensor base;  // SGC: S^K X; GCN: S X; SAGE: [X | M X]
    std::shared_ptr<const SparseMatrix> shat;
    std::shared_ptr<const SparseMatrix> neighbor_mean;
};

PreparedGraph prepare_graph(const EncoderSpec& spec, Graph& g);

// node logits from a prepared graph; theta may live on a tape
Tensor forward_logits(const EncoderSpec& spec, const PreparedGraph& prep, const Tensor& theta);
// convenience: prepares internally (plain evaluation path)
Tensor forward_logits(const EncoderSpec& spec, Graph& g, const ParamVector& theta);

// pre-logit representation (input to the final layer), used by the K-NN head
Tensor hidden_representation(const EncoderSpec& spec, const PreparedGraph& prep,
                             const Tensor& theta);

}  // namespace mignn

#endif
