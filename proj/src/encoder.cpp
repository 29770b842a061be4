#include "mignn/encoder.hpp"

#include <cmath>

namespace mignn {

Arch parse_arch(const std::string& name) {
    if (name == "sgc") return Arch::SGC;
    if (name == "gcn") return Arch::GCN;
    if (name == "sage") return Arch::SAGE;
    throw ConfigError("unknown architecture '" + name + "' (expected sgc, gcn or sage)");
}

std::string arch_name(Arch a) {
    switch (a) {
        case Arch::SGC: return "sgc";
        case Arch::GCN: return "gcn";
        case Arch::SAGE: return "sage";
    }
    return "?";
}

std::vector<std::array<std::size_t, 2>> EncoderSpec::param_shapes() const {
    if (input_dim == 0 || hidden_dim == 0 || output_dim == 0)
        throw ContractError("encoder spec dimensions must be positive");
    std::vector<std::array<std::size_t, 2>> weights;
    switch (arch) {
        case Arch::SGC:
            if (sgc_collapsed)
                weights = {{input_dim, output_dim}};
            else
                weights = {{input_dim, hidden_dim}, {hidden_dim, output_dim}};
            break;
        case Arch::GCN:
            weights = {{input_dim, hidden_dim}, {hidden_dim, output_dim}};
            break;
        case Arch::SAGE:
            // concatenation variant of the mean aggregator: [h | mean] W
            weights = {{2 * input_dim, hidden_dim}, {2 * hidden_dim, output_dim}};
            break;
    }
    if (!biases) return weights;
    std::vector<std::array<std::size_t, 2>> shapes;
    for (const auto& w : weights) {
        shapes.push_back(w);
        shapes.push_back({1, w[1]});
    }
    return shapes;
}

std::size_t EncoderSpec::param_dim() const {
    std::size_t n = 0;
    for (const auto& s : param_shapes()) n += s[0] * s[1];
    return n;
}

ParamVector init_params(const EncoderSpec& spec, Rng& rng) {
    ParamVector p;
    p.arch = spec.arch;
    p.shapes = spec.param_shapes();
    p.values.reserve(spec.param_dim());
    for (const auto& s : p.shapes) {
        if (s[0] == 1) {  // bias row
            for (std::size_t i = 0; i < s[1]; ++i) p.values.push_back(0.0);
            continue;
        }
        const double bound = std::sqrt(6.0 / static_cast<double>(s[0] + s[1]));
        for (std::size_t i = 0; i < s[0] * s[1]; ++i)
            p.values.push_back(rng.uniform(-bound, bound));
    }
    return p;
}

std::vector<Tensor> unflatten(const EncoderSpec& spec, const Tensor& flat) {
    const auto shapes = spec.param_shapes();
    if (flat.ndim() != 1 || flat.numel() != spec.param_dim())
        throw ContractError("unflatten: parameter vector length " + std::to_string(flat.numel()) +
                            " does not match d_theta " + std::to_string(spec.param_dim()));
    std::vector<Tensor> mats;
    mats.reserve(shapes.size());
    std::size_t off = 0;
    for (const auto& s : shapes) {
        mats.push_back(reshape(slice_flat(flat, off, s[0] * s[1]), {s[0], s[1]}));
        off += s[0] * s[1];
    }
    return mats;
}

Tensor flatten_mats(const std::vector<Tensor>& mats) {
    std::vector<double> out;
    for (const Tensor& m : mats) out.insert(out.end(), m.data().begin(), m.data().end());
    const std::size_t n = out.size();
    return Tensor({n}, std::move(out));
}

PreparedGraph prepare_graph(const EncoderSpec& spec, Graph& g) {
    PreparedGraph prep;
    switch (spec.arch) {
        case Arch::SGC: {
            normalized_adjacency(g);
            prep.shat = g.cached_adjacency;
            Tensor x = g.features;
            for (std::size_t k = 0; k < spec.propagation_steps; ++k) x = spmm(*prep.shat, x);
            prep.base = x;
            break;
        }
        case Arch::GCN: {
            normalized_adjacency(g);
            prep.shat = g.cached_adjacency;
            prep.base = spmm(*prep.shat, g.features);
            break;
        }
        case Arch::SAGE: {
            neighbor_mean_adjacency(g);
            prep.neighbor_mean = g.cached_neighbor_mean;
            prep.base = concat_cols(g.features, spmm(*prep.neighbor_mean, g.features));
            break;
        }
    }
    return prep;
}

namespace {

// x W (+ broadcast bias row)
Tensor affine(const Tensor& x, const Tensor& w, const Tensor* bias) {
    Tensor out = matmul(x, w);
    if (bias != nullptr) out = add(out, bcast_rows(*bias, out.shape()[0]));
    return out;
}

struct Layers {
    Tensor w1, w2;
    const Tensor* b1 = nullptr;
    const Tensor* b2 = nullptr;
    std::vector<Tensor> storage;
};

Layers split_layers(const EncoderSpec& spec, const Tensor& theta) {
    Layers l;
    l.storage = unflatten(spec, theta);
    if (spec.biases) {
        l.w1 = l.storage[0];
        l.b1 = &l.storage[1];
        if (l.storage.size() > 2) {
            l.w2 = l.storage[2];
            l.b2 = &l.storage[3];
        }
    } else {
        l.w1 = l.storage[0];
        if (l.storage.size() > 1) l.w2 = l.storage[1];
    }
    return l;
}

}  // namespace

Tensor hidden_representation(const EncoderSpec& spec, const PreparedGraph& prep,
                             const Tensor& theta) {
    Layers l = split_layers(spec, theta);
    switch (spec.arch) {
        case Arch::SGC:
            if (spec.sgc_collapsed) return prep.base;
            return affine(prep.base, l.w1, l.b1);
        case Arch::GCN:
            return spmm(*prep.shat, leaky_relu(affine(prep.base, l.w1, l.b1), spec.leaky_slope));
        case Arch::SAGE: {
            Tensor h1 = leaky_relu(affine(prep.base, l.w1, l.b1), spec.leaky_slope);
            return concat_cols(h1, spmm(*prep.neighbor_mean, h1));
        }
    }
    throw ContractError("unreachable");
}

Tensor forward_logits(const EncoderSpec& spec, const PreparedGraph& prep, const Tensor& theta) {
    Layers l = split_layers(spec, theta);
    if (spec.arch == Arch::SGC && spec.sgc_collapsed) return affine(prep.base, l.w1, l.b1);
    return affine(hidden_representation(spec, prep, theta), l.w2, l.b2);
}

Tensor forward_logits(const EncoderSpec& spec, Graph& g, const ParamVector& theta) {
    if (theta.shapes != spec.param_shapes())
        throw ContractError("parameter shapes do not match the encoder spec");
    PreparedGraph prep = prepare_graph(spec, g);
    return forward_logits(spec, prep, Tensor({theta.values.size()}, theta.values));
}

}  // namespace mignn
