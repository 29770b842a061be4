#include "mignn/tensor.hpp"

#include <numeric>
#include <optional>
#include <string>

#include "mignn/ops.hpp"

namespace mignn {

namespace {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

thread_local Tape* g_active_tape = nullptr;

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data) {
    if (shape_numel(shape) != data.size())
        throw ShapeError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape product " + std::to_string(shape_numel(shape)));
    p_ = std::make_shared<detail::TensorImpl>();
    p_->shape = std::move(shape);
    p_->data = std::move(data);
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    const std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
    const std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, v));
}

std::size_t Tensor::rows() const {
    return p_->shape.empty() ? 1 : p_->shape[0];
}

std::size_t Tensor::cols() const {
    if (p_->shape.size() < 2) return 1;
    std::size_t c = 1;
    for (std::size_t i = 1; i < p_->shape.size(); ++i) c *= p_->shape[i];
    return c;
}

double Tensor::value() const {
    if (numel() != 1) throw ContractError("value() requires a one-element tensor");
    return p_->data[0];
}

Tensor Tensor::detach() const {
    Tensor t(p_->shape, p_->data);
    return t;
}

Tape::~Tape() {
    if (g_active_tape == this) g_active_tape = nullptr;
}

Tape* Tape::active() { return g_active_tape; }

Tape::Activate::Activate(Tape& t) : prev_(g_active_tape) { g_active_tape = &t; }
Tape::Activate::~Activate() { g_active_tape = prev_; }

Tape::NoRecord::NoRecord() : tape_(g_active_tape), prev_(tape_ ? tape_->recording_ : false) {
    if (tape_) tape_->recording_ = false;
}
Tape::NoRecord::~NoRecord() {
    if (tape_) tape_->recording_ = prev_;
}

Tensor Tape::leaf(std::vector<std::size_t> shape, std::vector<double> data) {
    Tensor t(std::move(shape), std::move(data));
    t.p_->tape = this;
    t.p_->node = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{"leaf", {}, t.p_, nullptr});
    return t;
}

Tensor Tape::leaf(const Tensor& values) { return leaf(values.shape(), values.data()); }

Tensor Tape::record(const char* op, std::vector<std::size_t> shape, std::vector<double> data,
                    const std::vector<const Tensor*>& inputs, BackwardFn bw) {
    Tensor t(std::move(shape), std::move(data));
    if (!recording_) return t;
    std::vector<int> parents;
    parents.reserve(inputs.size());
    bool any = false;
    for (const Tensor* in : inputs) {
        if (in->on_tape() && in->tape() == this) {
            parents.push_back(in->node());
            any = true;
        } else {
            parents.push_back(-1);
        }
    }
    if (!any) return t;  // pure constant computation, nothing to track
    t.p_->tape = this;
    t.p_->node = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{op, std::move(parents), t.p_, std::move(bw)});
    return t;
}

std::vector<Tensor> backward(const Tensor& output, const std::vector<Tensor>& wrt,
                             bool create_graph) {
    if (!output.defined() || output.numel() != 1)
        throw ContractError("backward requires a scalar output");
    if (!output.on_tape())
        throw ContractError("backward output is not on a tape (detached input)");
    Tape* tape = output.tape();
    for (const Tensor& w : wrt) {
        if (!w.on_tape() || w.tape() != tape)
            throw ContractError("backward wrt tensor is not on the output's tape (detached input)");
    }

    const int out_node = output.node();
    std::vector<std::optional<Tensor>> grads(static_cast<std::size_t>(out_node) + 1);
    grads[out_node] = Tensor::scalar(1.0);

    Tape::Activate scope(*tape);
    for (int id = out_node; id >= 0; --id) {
        if (!grads[id].has_value()) continue;
        // copy: the closure may append nodes and reallocate the tape's storage
        const char* op = tape->node(static_cast<std::size_t>(id)).op;
        const std::vector<int> parents = tape->node(static_cast<std::size_t>(id)).parents;
        const BackwardFn bw = tape->node(static_cast<std::size_t>(id)).backward;
        const Tensor saved_out(tape->node(static_cast<std::size_t>(id)).value);
        if (!bw) continue;  // leaf
        std::vector<Tensor> parent_grads;
        if (create_graph) {
            parent_grads = bw(*grads[id], saved_out);
        } else {
            Tape::NoRecord off;
            parent_grads = bw(*grads[id], saved_out);
        }
        if (parent_grads.size() != parents.size())
            throw ContractError(std::string("backward of ") + op + " returned " +
                                std::to_string(parent_grads.size()) + " grads for " +
                                std::to_string(parents.size()) + " parents");
        for (std::size_t k = 0; k < parents.size(); ++k) {
            const int p = parents[k];
            if (p < 0 || !parent_grads[k].defined()) continue;
            if (!grads[p].has_value()) {
                grads[p] = parent_grads[k];
            } else if (create_graph) {
                grads[p] = add(*grads[p], parent_grads[k]);
            } else {
                Tape::NoRecord off;
                grads[p] = add(*grads[p], parent_grads[k]);
            }
        }
    }

    std::vector<Tensor> out;
    out.reserve(wrt.size());
    for (const Tensor& w : wrt) {
        if (w.node() <= out_node && grads[w.node()].has_value())
            out.push_back(*grads[w.node()]);
        else
            out.push_back(Tensor::zeros(w.shape()));
    }
    return out;
}

}  // namespace mignn
