#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "mignn/common.hpp"
#include "mignn/fd.hpp"
#include "mignn/ops.hpp"
#include "mignn/sparse.hpp"
#include "mignn/tensor.hpp"

using namespace mignn;

namespace {

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double lo = -1.0, double hi = 1.0) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return Tensor(std::move(shape), std::move(v));
}

// random values bounded away from zero, for kinked activations
Tensor random_tensor_off_kink(Rng& rng, std::vector<std::size_t> shape) {
    Tensor t = random_tensor(rng, std::move(shape));
    for (double& x : t.mutable_data()) {
        if (std::abs(x) < 0.05) x += (x >= 0.0 ? 0.1 : -0.1);
    }
    return t;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return false;
    return std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(double)) == 0;
}

Tensor one_hot_rows(const std::vector<std::size_t>& classes, std::size_t c) {
    Tensor t = Tensor::zeros({classes.size(), c});
    for (std::size_t i = 0; i < classes.size(); ++i) t.mutable_data()[i * c + classes[i]] = 1.0;
    return t;
}

}  // namespace

TEST_CASE("matmul examples") {
    Tensor eye({2, 2}, {1, 0, 0, 1});
    Tensor b({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(bit_equal(matmul(eye, b), b));

    Tensor a({2, 2}, {1, 2, 3, 4});
    Tensor v({2, 1}, {0, 1});
    Tensor r = matmul(a, v);
    CHECK(r(0, 0) == 2.0);
    CHECK(r(1, 0) == 4.0);

    Tensor z = Tensor::zeros({3, 2});
    Rng rng(7);
    Tensor any = random_tensor(rng, {2, 5});
    Tensor zr = matmul(z, any);
    for (double x : zr.data()) CHECK(x == 0.0);

    CHECK_THROWS_AS(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), ShapeError);
}

TEST_CASE("spmm examples and bit-exact equivalence with dense matmul") {
    Rng rng(11);
    Tensor d = random_tensor(rng, {4, 3});

    SparseMatrix empty(4, 4);
    Tensor r0 = spmm(empty, d);
    for (double x : r0.data()) CHECK(x == 0.0);

    std::vector<SparseMatrix::Entry> eye_entries;
    for (std::size_t i = 0; i < 4; ++i) eye_entries.push_back({i, i, 1.0});
    SparseMatrix eye = SparseMatrix::from_coo(4, 4, eye_entries);
    CHECK(bit_equal(spmm(eye, d), d));

    // random sparsity patterns against the densified product
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<SparseMatrix::Entry> es;
        const std::size_t nnz = 1 + rng.uniform_int(10);
        for (std::size_t k = 0; k < nnz; ++k)
            es.push_back({static_cast<std::size_t>(rng.uniform_int(4)),
                          static_cast<std::size_t>(rng.uniform_int(4)), rng.uniform(-2, 2)});
        SparseMatrix s = SparseMatrix::from_coo(4, 4, es);
        Tensor dd = random_tensor(rng, {4, 3});
        CHECK(bit_equal(spmm(s, dd), matmul(s.to_dense(), dd)));
    }

    CHECK_THROWS_AS(spmm(eye, Tensor::zeros({3, 2})), ShapeError);
}

TEST_CASE("elementwise examples") {
    Rng rng(3);
    Tensor a = random_tensor(rng, {3, 2});
    Tensor ones = Tensor::full({3, 2}, 1.0);
    CHECK(bit_equal(hadamard(a, ones), a));

    CHECK(sigmoid(Tensor::scalar(0.0)).value() == 0.5);
    CHECK(leaky_relu(Tensor::scalar(-2.0), 0.01).value() == doctest::Approx(-0.02).epsilon(1e-15));
    // subgradient at exactly zero follows the positive branch
    {
        Tape tape;
        Tape::Activate scope(tape);
        Tensor x = tape.leaf({1}, {0.0});
        Tensor y = leaky_relu(x, 0.01);
        CHECK(backward(y, {x})[0].value() == 1.0);
    }
    CHECK_THROWS_AS(add(Tensor::zeros({2}), Tensor::zeros({3})), ShapeError);
}

TEST_CASE("softmax cross entropy examples") {
    Tensor uniform = Tensor::zeros({1, 7});
    Tensor t = one_hot_rows({3}, 7);
    CHECK(softmax_cross_entropy_rows(uniform, t).value() ==
          doctest::Approx(std::log(7.0)).epsilon(1e-14));
    CHECK(softmax_cross_entropy_rows(uniform, t).value() ==
          doctest::Approx(1.945910).epsilon(1e-6));

    Tensor sharp({1, 2}, {10.0, -10.0});
    Tensor t0 = one_hot_rows({0}, 2);
    // -log softmax(10 | [10,-10]) = log1p(exp(-20))
    CHECK(softmax_cross_entropy_rows(sharp, t0).value() ==
          doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-9));
    CHECK(softmax_cross_entropy_rows(sharp, t0).value() == doctest::Approx(2.061e-9).epsilon(1e-3));

    // additivity over rows
    Rng rng(5);
    Tensor two = random_tensor(rng, {2, 4});
    Tensor row0({1, 4}, {two(0, 0), two(0, 1), two(0, 2), two(0, 3)});
    Tensor row1({1, 4}, {two(1, 0), two(1, 1), two(1, 2), two(1, 3)});
    Tensor targets = one_hot_rows({2, 0}, 4);
    const double joint = softmax_cross_entropy_rows(two, targets).value();
    const double split = softmax_cross_entropy_rows(row0, one_hot_rows({2}, 4)).value() +
                         softmax_cross_entropy_rows(row1, one_hot_rows({0}, 4)).value();
    CHECK(joint == doctest::Approx(split).epsilon(1e-12));

    CHECK_THROWS_AS(softmax_cross_entropy_rows(Tensor({1, 2}, {0, 0}), Tensor({1, 2}, {0.5, 0.5})),
                    ValidationError);
}

TEST_CASE("sigmoid bce examples") {
    CHECK(sigmoid_bce(Tensor::scalar(0.0), Tensor::scalar(1.0)).value() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(sigmoid_bce(Tensor::scalar(0.0), Tensor::scalar(0.0)).value() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
    Tensor z({2}, {3.0, -3.0});
    Tensor t({2}, {1.0, 0.0});
    CHECK(sigmoid_bce(z, t).value() ==
          doctest::Approx(2.0 * std::log1p(std::exp(-3.0))).epsilon(1e-14));
    CHECK_THROWS_AS(sigmoid_bce(Tensor::scalar(1.0), Tensor::scalar(0.5)), ValidationError);
}

TEST_CASE("l2 norm examples") {
    CHECK(l2_norm(Tensor({2}, {3.0, 4.0})).value() == 5.0);
    CHECK(l2_norm(Tensor::zeros({5})).value() == 0.0);
    CHECK(l2_norm(Tensor({4}, {1.0, 1.0, 1.0, 1.0})).value() == 2.0);

    // gradient at the origin is the zero vector
    Tape tape;
    Tape::Activate scope(tape);
    Tensor x = tape.leaf({3}, {0.0, 0.0, 0.0});
    Tensor g = backward(l2_norm(x), {x})[0];
    for (double v : g.data()) CHECK(v == 0.0);
}

TEST_CASE("backward examples") {
    {
        Tape tape;
        Tape::Activate scope(tape);
        Tensor x = tape.leaf({4}, {1.0, -2.0, 0.5, 3.0});
        Tensor g = backward(sum_all(x), {x})[0];
        for (double v : g.data()) CHECK(v == 1.0);
    }
    {
        Tape tape;
        Tape::Activate scope(tape);
        Tensor x = tape.leaf({1}, {3.0});
        Tensor y = hadamard(x, x);
        Tensor g = backward(y, {x}, /*create_graph=*/true)[0];
        CHECK(g.value() == 6.0);
        Tensor g2 = backward(g, {x})[0];
        CHECK(g2.value() == 2.0);
    }
    {
        Tape tape;
        Tape::Activate scope(tape);
        Tensor x = tape.leaf({2}, {1.0, 2.0});
        CHECK_THROWS_AS(backward(x, {x}), ContractError);          // non-scalar output
        Tensor detached({1}, {1.0});
        CHECK_THROWS_AS(backward(detached, {x}), ContractError);   // output off the tape
        Tensor other = sum_all(x);
        Tensor stray({2}, {0.0, 0.0});
        CHECK_THROWS_AS(backward(other, {stray}), ContractError);  // wrt off the tape
    }
}

TEST_CASE("fd oracle examples") {
    CHECK(fd_check([](const Tensor& x) { return l2_norm(x); }, Tensor({2}, {3.0, 4.0})) <= 1e-6);
    // analytic gradient of the norm is x / ||x||
    Tensor g = analytic_gradient([](const Tensor& x) { return l2_norm(x); },
                                 Tensor({2}, {3.0, 4.0}));
    CHECK(g[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(0.8).epsilon(1e-12));

    Rng rng(17);
    Tensor logits = random_tensor(rng, {3, 4});
    Tensor targets = one_hot_rows({1, 3, 0}, 4);
    CHECK(fd_check([&](const Tensor& x) { return softmax_cross_entropy_rows(x, targets); },
                   logits) <= 1e-5);

    CHECK(fd_check([](const Tensor&) { return Tensor::scalar(4.0); }, Tensor({3}, {1, 2, 3})) ==
          0.0);
}

TEST_CASE("first-order gradients match finite differences per primitive") {
    Rng rng(23);
    const int trials = 100;

    auto check_many = [&](const char* name, auto make_fn, bool off_kink = false) {
        double worst = 0.0;
        for (int i = 0; i < trials; ++i) {
            Tensor x = off_kink ? random_tensor_off_kink(rng, {2, 3}) : random_tensor(rng, {2, 3});
            auto f = make_fn(i);
            worst = std::max(worst, fd_check(f, x));
        }
        INFO(name);
        CHECK(worst <= 1e-5);
    };

    Rng aux(29);
    Tensor b23 = random_tensor(aux, {2, 3});
    Tensor b34 = random_tensor(aux, {3, 4});
    std::vector<SparseMatrix::Entry> es = {{0, 1, 0.7}, {1, 0, -1.3}, {1, 1, 0.4}};
    SparseMatrix s22 = SparseMatrix::from_coo(2, 2, es);
    std::vector<std::size_t> idx = {1, 1, 0};

    check_many("add", [&](int) {
        return [&](const Tensor& x) { return sum_all(hadamard(add(x, b23), add(x, x))); };
    });
    check_many("sub", [&](int) {
        return [&](const Tensor& x) { return sum_all(hadamard(sub(x, b23), x)); };
    });
    check_many("hadamard", [&](int) {
        return [&](const Tensor& x) { return sum_all(hadamard(hadamard(x, b23), x)); };
    });
    check_many("divide", [&](int) {
        return [&](const Tensor& x) {
            Tensor denom = add(hadamard(x, x), Tensor::full(x.shape(), 1.5));
            return sum_all(divide(b23, denom));
        };
    });
    check_many("scale", [&](int) {
        return [&](const Tensor& x) { return sum_all(scale(hadamard(x, x), -2.5)); };
    });
    check_many("leaky_relu", [&](int) {
        return [&](const Tensor& x) { return sum_all(hadamard(leaky_relu(x, 0.01), b23)); };
    }, /*off_kink=*/true);
    check_many("sigmoid", [&](int) {
        return [&](const Tensor& x) { return sum_all(hadamard(sigmoid(x), b23)); };
    });
    check_many("tanh", [&](int) {
        return [&](const Tensor& x) { return sum_all(hadamard(tanh(x), b23)); };
    });
    check_many("exp", [&](int) {
        return [&](const Tensor& x) { return sum_all(hadamard(exp(x), b23)); };
    });
    check_many("softplus", [&](int) {
        return [&](const Tensor& x) { return sum_all(hadamard(softplus(x), b23)); };
    });
    check_many("matmul", [&](int) {
        return [&](const Tensor& x) { return sum_all(hadamard(matmul(x, b34), matmul(x, b34))); };
    });
    check_many("transpose", [&](int) {
        return [&](const Tensor& x) { return sum_all(hadamard(transpose(x), transpose(b23))); };
    });
    check_many("spmm", [&](int) {
        return [&](const Tensor& x) { return sum_all(hadamard(spmm(s22, x), spmm(s22, x))); };
    });
    check_many("reshape", [&](int) {
        return [&](const Tensor& x) {
            return sum_all(hadamard(reshape(x, {3, 2}), reshape(b23, {3, 2})));
        };
    });
    check_many("gather/scatter", [&](int) {
        return [&](const Tensor& x) {
            Tensor picked = gather_rows(x, idx);
            return sum_all(hadamard(scatter_rows(picked, idx, 2), x));
        };
    });
    check_many("slice/pad", [&](int) {
        return [&](const Tensor& x) {
            Tensor flat = reshape(x, {6});
            Tensor mid = slice_flat(flat, 1, 3);
            return sum_all(hadamard(pad_flat(mid, 2, 6), flat));
        };
    });
    check_many("concat/slice_cols", [&](int) {
        return [&](const Tensor& x) {
            Tensor both = concat_cols(x, hadamard(x, x));
            return sum_all(hadamard(slice_cols(both, 2, 3), b23));
        };
    });
    check_many("reductions", [&](int) {
        return [&](const Tensor& x) {
            Tensor a = bcast_rows(colwise_sum(x), 2);
            Tensor b = bcast_cols(rowwise_sum(x), 3);
            return sum_all(hadamard(a, b));
        };
    });
    check_many("bcast_scalar", [&](int) {
        return [&](const Tensor& x) {
            return sum_all(hadamard(bcast_scalar(sum_all(x), {2, 3}), b23));
        };
    });
    check_many("log_softmax", [&](int) {
        return [&](const Tensor& x) { return sum_all(hadamard(log_softmax_rows(x), b23)); };
    });
    check_many("l2_norm", [&](int) {
        return [&](const Tensor& x) { return l2_norm(add(x, b23)); };
    });
    check_many("sigmoid_bce", [&](int) {
        Tensor t = Tensor::zeros({2, 3});
        t.mutable_data()[0] = 1.0;
        t.mutable_data()[4] = 1.0;
        return [t](const Tensor& x) { return sigmoid_bce(x, t); };
    });
}

TEST_CASE("second-order gradients of compositions match finite differences") {
    Rng rng(31);
    Tensor b = random_tensor(rng, {2, 2});
    Tensor targets = one_hot_rows({1, 0}, 2);

    auto composite = [&](const Tensor& x) {
        Tensor h = tanh(matmul(x, b));
        Tensor probs_loss = softmax_cross_entropy_rows(h, targets);
        return add(probs_loss, l2_norm(reshape(sigmoid(x), {4})));
    };
    for (int i = 0; i < 5; ++i) {
        Tensor x = random_tensor(rng, {2, 2});
        CHECK(fd_check_second_order(composite, x) <= 1e-4);
    }

    auto quadratic = [&](const Tensor& x) { return sum_all(hadamard(hadamard(x, x), x)); };
    for (int i = 0; i < 5; ++i) {
        Tensor x = random_tensor_off_kink(rng, {2, 2});
        CHECK(fd_check_second_order(quadratic, x) <= 1e-4);
    }
}

TEST_CASE("softmax rows sum to one") {
    Rng rng(37);
    for (int i = 0; i < 20; ++i) {
        Tensor x = random_tensor(rng, {4, 6}, -30.0, 30.0);
        Tensor p = softmax_rows(x);
        for (std::size_t r = 0; r < 4; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < 6; ++c) s += p(r, c);
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("recording the same computation twice is bit-identical") {
    auto run = [](std::vector<double>* grad_out) {
        Rng rng(41);
        Tensor x0 = random_tensor(rng, {3, 3});
        Tape tape;
        Tape::Activate scope(tape);
        Tensor x = tape.leaf(x0);
        Tensor y = sum_all(hadamard(sigmoid(matmul(x, transpose(x))), tanh(x)));
        Tensor g = backward(y, {x})[0];
        *grad_out = g.data();
        return y.value();
    };
    std::vector<double> g1, g2;
    const double y1 = run(&g1);
    const double y2 = run(&g2);
    CHECK(std::memcmp(&y1, &y2, sizeof(double)) == 0);
    REQUIRE(g1.size() == g2.size());
    CHECK(std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(double)) == 0);
}

TEST_CASE("sparse matrix invariants") {
    std::vector<SparseMatrix::Entry> es = {{1, 2, 1.0}, {0, 1, 2.0}, {1, 2, 0.5}};
    SparseMatrix s = SparseMatrix::from_coo(3, 3, es);
    CHECK(s.nnz() == 2);  // duplicates merged
    CHECK(s.entries[0].row == 0);
    CHECK(s.entries[1].value == 1.5);
    CHECK_THROWS_AS(SparseMatrix::from_coo(2, 2, {{2, 0, 1.0}}), ValidationError);

    SparseMatrix st = s.transposed();
    CHECK(st.entries[0].row == 1);
    CHECK(st.entries[0].col == 0);
}
