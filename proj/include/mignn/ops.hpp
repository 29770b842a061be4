#ifndef MIGNN_OPS_HPP
#define MIGNN_OPS_HPP

#include <cstddef>
#include <vector>

#include "mignn/sparse.hpp"
#include "mignn/tensor.hpp"

namespace mignn {

// Elementwise. Binary ops require identical shapes. Every op records onto the
// active tape when any input is tracked, and every backward closure is itself
// built from these primitives so gradients remain differentiable.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor divide(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor neg(const Tensor& a);
// slope applies for x < 0; the subgradient at exactly 0 is the positive branch
Tensor leaky_relu(const Tensor& a, double slope);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor softplus(const Tensor& a);

// Linear algebra (all row-major, summation in ascending inner index)
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
// sparse-dense product; equals matmul(s.to_dense(), d) bit-exactly
Tensor spmm(const SparseMatrix& s, const Tensor& d);

// Structure
Tensor reshape(const Tensor& a, std::vector<std::size_t> shape);
Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& idx);
Tensor scatter_rows(const Tensor& a, const std::vector<std::size_t>& idx, std::size_t n_rows);
Tensor slice_flat(const Tensor& a, std::size_t offset, std::size_t len);
Tensor pad_flat(const Tensor& a, std::size_t offset, std::size_t total);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor slice_cols(const Tensor& a, std::size_t offset, std::size_t len);

// Reductions and broadcasts (each pair is dual under differentiation)
Tensor colwise_sum(const Tensor& a);                  // n x c -> 1 x c
Tensor bcast_rows(const Tensor& a, std::size_t n);    // 1 x c -> n x c
Tensor rowwise_sum(const Tensor& a);                  // n x c -> n x 1
Tensor bcast_cols(const Tensor& a, std::size_t c);    // n x 1 -> n x c
Tensor sum_all(const Tensor& a);                      // any -> scalar
Tensor bcast_scalar(const Tensor& a, std::vector<std::size_t> shape);

// Row softmax with per-row max subtraction; rows sum to 1
Tensor log_softmax_rows(const Tensor& a);
Tensor softmax_rows(const Tensor& a);

// Unsquared Euclidean norm; gradient at the origin is the zero vector
Tensor l2_norm(const Tensor& a);

// Losses (sum over rows / elements, no averaging)
Tensor softmax_cross_entropy_rows(const Tensor& logits, const Tensor& one_hot_targets);
Tensor sigmoid_bce(const Tensor& logits, const Tensor& binary_targets);

}  // namespace mignn

#endif
