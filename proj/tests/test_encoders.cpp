#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "mignn/encoder.hpp"
#include "mignn/fd.hpp"

using namespace mignn;

namespace {

EncoderSpec spec_of(Arch arch, std::size_t d, std::size_t h, std::size_t c,
                    bool biases = false) {
    EncoderSpec s;
    s.arch = arch;
    s.input_dim = d;
    s.hidden_dim = h;
    s.output_dim = c;
    s.biases = biases;
    return s;
}

Graph graph_with(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges,
                 Tensor features) {
    Graph g;
    g.node_count = n;
    g.edges = std::move(edges);
    g.features = std::move(features);
    g.label_index.assign(n, 0);
    g.labeled.assign(n, 1);
    return g;
}

Graph random_graph(Rng& rng, std::size_t n, std::size_t d, double edge_prob = 0.4) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
            if (rng.uniform() < edge_prob) edges.push_back({u, v});
    std::vector<double> x(n * d);
    for (double& v : x) v = rng.uniform(-1, 1);
    return graph_with(n, std::move(edges), Tensor({n, d}, std::move(x)));
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    return a.shape() == b.shape() &&
           std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("parameter dimension arithmetic") {
    // weight-only configurations
    CHECK(spec_of(Arch::SGC, 3, 16, 8).param_dim() == 176);     // 3*16 + 16*8
    CHECK(spec_of(Arch::GCN, 500, 16, 7).param_dim() == 8112);  // 500*16 + 16*7
    CHECK(spec_of(Arch::SAGE, 3, 16, 8).param_dim() == 352);    // 6*16 + 32*8
    EncoderSpec collapsed = spec_of(Arch::SGC, 3, 16, 8);
    collapsed.sgc_collapsed = true;
    CHECK(collapsed.param_dim() == 24);
    // bias rows add one row per layer
    CHECK(spec_of(Arch::SGC, 3, 16, 8, true).param_dim() == 200);
    CHECK(spec_of(Arch::SAGE, 3, 16, 8, true).param_dim() == 376);
}

TEST_CASE("glorot initialization is deterministic and bounded") {
    EncoderSpec spec = spec_of(Arch::SGC, 4, 8, 3, true);
    Rng a(123), b(123);
    ParamVector pa = init_params(spec, a);
    ParamVector pb = init_params(spec, b);
    CHECK(pa.values == pb.values);
    const double bound1 = std::sqrt(6.0 / (4 + 8));
    for (std::size_t i = 0; i < 4 * 8; ++i) CHECK(std::abs(pa.values[i]) <= bound1);
    for (std::size_t i = 4 * 8; i < 4 * 8 + 8; ++i) CHECK(pa.values[i] == 0.0);  // bias row
}

TEST_CASE("flatten and unflatten round trip") {
    Tensor a({1, 1}, {2.5});
    Tensor b({1, 1}, {-7.0});
    Tensor flat = flatten_mats({a, b});
    CHECK(flat[0] == 2.5);
    CHECK(flat[1] == -7.0);

    EncoderSpec spec = spec_of(Arch::SGC, 3, 4, 2);
    Rng rng(9);
    ParamVector p = init_params(spec, rng);
    Tensor pf({p.dim()}, p.values);
    const auto mats = unflatten(spec, pf);
    REQUIRE(mats.size() == 2);
    CHECK(mats[0].shape() == std::vector<std::size_t>{3, 4});
    CHECK(bit_equal(flatten_mats(mats), pf));

    CHECK_THROWS_AS(unflatten(spec, Tensor::zeros({5})), ContractError);
}

TEST_CASE("sgc forward on an isolated node is x w1 w2") {
    EncoderSpec spec = spec_of(Arch::SGC, 2, 3, 2);
    Graph g = graph_with(1, {}, Tensor({1, 2}, {0.7, -0.4}));
    Rng rng(11);
    ParamVector p = init_params(spec, rng);
    Tensor logits = forward_logits(spec, g, p);

    Tensor pf({p.dim()}, p.values);
    const auto mats = unflatten(spec, pf);
    Tensor expected = matmul(matmul(g.features, mats[0]), mats[1]);
    CHECK(bit_equal(logits, expected));
}

TEST_CASE("zero parameters give zero logits") {
    Rng rng(13);
    Graph g = random_graph(rng, 6, 3);
    for (Arch arch : {Arch::SGC, Arch::GCN, Arch::SAGE}) {
        EncoderSpec spec = spec_of(arch, 3, 4, 2);
        ParamVector p;
        p.arch = arch;
        p.shapes = spec.param_shapes();
        p.values.assign(spec.param_dim(), 0.0);
        Graph gc = g;
        Tensor logits = forward_logits(spec, gc, p);
        for (double v : logits.data()) CHECK(v == 0.0);
    }
}

TEST_CASE("sgc hand computation on the 2-node complete graph") {
    EncoderSpec spec = spec_of(Arch::SGC, 1, 1, 1);
    spec.propagation_steps = 1;
    Graph g = graph_with(2, {{0, 1}}, Tensor({2, 1}, {1.0, 2.0}));
    ParamVector p;
    p.arch = Arch::SGC;
    p.shapes = spec.param_shapes();
    p.values = {2.0, 3.0};  // w1 = [2], w2 = [3]
    // S = [[.5,.5],[.5,.5]], S X = [1.5, 1.5], logits = 1.5*2*3 = 9
    Tensor logits = forward_logits(spec, g, p);
    CHECK(logits(0, 0) == 9.0);
    CHECK(logits(1, 0) == 9.0);
}

TEST_CASE("sgc is exactly linear in the features") {
    Rng rng(17);
    Graph g = random_graph(rng, 8, 3);
    EncoderSpec spec = spec_of(Arch::SGC, 3, 4, 2);
    ParamVector p = init_params(spec, rng);
    Tensor once = forward_logits(spec, g, p);

    Graph doubled = g;
    std::vector<double> x2 = g.features.data();
    for (double& v : x2) v *= 2.0;
    doubled.features = Tensor(g.features.shape(), std::move(x2));
    doubled.cached_adjacency.reset();
    Tensor twice = forward_logits(spec, doubled, p);
    CHECK(bit_equal(twice, scale(once, 2.0)));
}

TEST_CASE("permuting node ids permutes logits rows") {
    Rng rng(19);
    const std::size_t n = 7;
    Graph g = random_graph(rng, n, 3);

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);

    Graph pg;
    pg.node_count = n;
    pg.label_index.assign(n, 0);
    pg.labeled.assign(n, 1);
    std::vector<double> px(n * 3);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t j = 0; j < 3; ++j) px[perm[v] * 3 + j] = g.features(v, j);
    pg.features = Tensor({n, 3}, std::move(px));
    for (const auto& [u, v] : g.edges)
        pg.edges.push_back({std::min(perm[u], perm[v]), std::max(perm[u], perm[v])});

    for (Arch arch : {Arch::SGC, Arch::GCN, Arch::SAGE}) {
        EncoderSpec spec = spec_of(arch, 3, 4, 2);
        Rng prng(23);
        ParamVector p = init_params(spec, prng);
        Graph g1 = g, g2 = pg;
        Tensor base = forward_logits(spec, g1, p);
        Tensor permuted = forward_logits(spec, g2, p);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t c = 0; c < 2; ++c)
                CHECK(permuted(perm[v], c) == doctest::Approx(base(v, c)).epsilon(1e-9));
    }
}

TEST_CASE("sage on an edgeless graph is a per-node mlp of [x | 0]") {
    Rng rng(29);
    Graph g = random_graph(rng, 5, 3, /*edge_prob=*/0.0);
    EncoderSpec spec = spec_of(Arch::SAGE, 3, 4, 2);
    ParamVector p = init_params(spec, rng);
    Graph gc = g;
    Tensor logits = forward_logits(spec, gc, p);

    Tensor pf({p.dim()}, p.values);
    const auto mats = unflatten(spec, pf);
    Tensor zeros = Tensor::zeros({5, 3});
    Tensor h1 = leaky_relu(matmul(concat_cols(g.features, zeros), mats[0]), spec.leaky_slope);
    Tensor expected = matmul(concat_cols(h1, Tensor::zeros({5, 4})), mats[1]);
    CHECK(bit_equal(logits, expected));
}

TEST_CASE("forward is differentiable end to end") {
    Rng rng(31);
    Graph g = random_graph(rng, 6, 3);
    for (bool biased : {false, true})
    for (Arch arch : {Arch::SGC, Arch::GCN, Arch::SAGE}) {
        EncoderSpec spec = spec_of(arch, 3, 4, 2, biased);
        Rng prng(37);
        ParamVector p = init_params(spec, prng);
        Graph gc = g;
        PreparedGraph prep = prepare_graph(spec, gc);
        const auto f = [&](const Tensor& theta) {
            Tensor logits = forward_logits(spec, prep, theta);
            return sum_all(hadamard(logits, logits));
        };
        CHECK(fd_check(f, Tensor({p.dim()}, p.values)) <= 1e-5);
    }
}

TEST_CASE("collapsed sgc variant") {
    EncoderSpec spec = spec_of(Arch::SGC, 2, 16, 3);
    spec.sgc_collapsed = true;
    Rng rng(41);
    Graph g = random_graph(rng, 4, 2);
    ParamVector p = init_params(spec, rng);
    REQUIRE(p.dim() == 6);
    Graph gc = g;
    Tensor logits = forward_logits(spec, gc, p);
    CHECK(logits.rows() == 4);
    CHECK(logits.cols() == 3);
}

TEST_CASE("spec mismatch raises a contract error") {
    EncoderSpec spec = spec_of(Arch::SGC, 3, 4, 2);
    ParamVector p;
    p.arch = Arch::SGC;
    p.shapes = {{3, 5}, {5, 2}};
    p.values.assign(25, 0.0);
    Rng rng(43);
    Graph g = random_graph(rng, 3, 3);
    CHECK_THROWS_AS(forward_logits(spec, g, p), ContractError);
}
