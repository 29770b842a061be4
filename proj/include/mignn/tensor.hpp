#ifndef MIGNN_TENSOR_HPP
#define MIGNN_TENSOR_HPP

#include <functional>
#include <memory>
#include <vector>

#include "mignn/common.hpp"

namespace mignn {

class Tape;

namespace detail {
struct TensorImpl {
    std::vector<std::size_t> shape;
    std::vector<double> data;  // row-major
    Tape* tape = nullptr;      // set iff recorded
    int node = -1;
};
}  // namespace detail

// Dense 64-bit float tensor with value semantics (shared storage). A tensor
// either lives on a tape (differentiable) or is a plain constant.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double v);
    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    bool defined() const { return p_ != nullptr; }
    const std::vector<std::size_t>& shape() const { return p_->shape; }
    std::size_t numel() const { return p_->data.size(); }
    std::size_t ndim() const { return p_->shape.size(); }

    // 2-d accessors; a 1-d tensor of length n is treated as n x 1
    std::size_t rows() const;
    std::size_t cols() const;

    const std::vector<double>& data() const { return p_->data; }
    std::vector<double>& mutable_data() { return p_->data; }
    double operator()(std::size_t i, std::size_t j) const { return p_->data[i * cols() + j]; }
    double operator[](std::size_t i) const { return p_->data[i]; }

    // value of a one-element tensor
    double value() const;

    bool on_tape() const { return p_ && p_->node >= 0; }
    int node() const { return p_ ? p_->node : -1; }
    Tape* tape() const { return p_ ? p_->tape : nullptr; }

    // same values, no tape reference
    Tensor detach() const;

    bool same_shape(const Tensor& o) const { return p_->shape == o.p_->shape; }

private:
    explicit Tensor(std::shared_ptr<detail::TensorImpl> p) : p_(std::move(p)) {}
    std::shared_ptr<detail::TensorImpl> p_;
    friend class Tape;
    friend std::vector<Tensor> backward(const Tensor&, const std::vector<Tensor>&, bool);
};

// Backward map for one recorded node: (grad wrt output, saved output) ->
// grads wrt parents (aligned with the parent list; an undefined Tensor means
// no gradient). The saved output is on the tape, so output-dependent formulas
// stay differentiable for second-order passes.
using BackwardFn = std::function<std::vector<Tensor>(const Tensor&, const Tensor&)>;

// Append-only record of the computation. Nodes are topological by
// construction: parents of node k all have index < k. Backward runs the
// per-node closures in reverse index order; with create_graph the closures
// re-record onto the same tape so gradients are themselves differentiable.
class Tape {
public:
    struct Node {
        const char* op;
        std::vector<int> parents;
        std::shared_ptr<detail::TensorImpl> value;
        BackwardFn backward;
    };

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    ~Tape();

    // registers an input as a differentiable leaf
    Tensor leaf(std::vector<std::size_t> shape, std::vector<double> data);
    Tensor leaf(const Tensor& values);

    Tensor record(const char* op, std::vector<std::size_t> shape, std::vector<double> data,
                  const std::vector<const Tensor*>& inputs, BackwardFn backward);

    std::size_t size() const { return nodes_.size(); }
    const Node& node(std::size_t i) const { return nodes_[i]; }
    bool recording() const { return recording_; }

    static Tape* active();

    // RAII: make a tape the active recording target for the current thread
    struct Activate {
        explicit Activate(Tape& t);
        ~Activate();
        Activate(const Activate&) = delete;
        Activate& operator=(const Activate&) = delete;

    private:
        Tape* prev_;
    };

    // RAII: suspend recording on the active tape
    struct NoRecord {
        NoRecord();
        ~NoRecord();
        NoRecord(const NoRecord&) = delete;
        NoRecord& operator=(const NoRecord&) = delete;

    private:
        Tape* tape_;
        bool prev_;
    };

private:
    std::vector<Node> nodes_;
    bool recording_ = true;
};

// Reverse-mode gradient of a scalar output wrt each tensor in `wrt`.
// With create_graph the returned gradients stay on the tape, so a second
// backward through them yields exact second-order derivatives.
std::vector<Tensor> backward(const Tensor& output, const std::vector<Tensor>& wrt,
                             bool create_graph = false);

}  // namespace mignn

#endif
