#ifndef MIGNN_SPARSE_HPP
#define MIGNN_SPARSE_HPP

#include <cstddef>
#include <vector>

#include "mignn/common.hpp"
#include "mignn/tensor.hpp"

namespace mignn {

// Coordinate-list sparse matrix, entries sorted by (row, col), no duplicates.
// Used for graph propagation operators; never carries gradients itself.
struct SparseMatrix {
    struct Entry {
        std::size_t row;
        std::size_t col;
        double value;
    };

    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Entry> entries;

    SparseMatrix() = default;
    SparseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c) {}

    // sorts by (row, col), merges duplicates by summation, validates ranges
    static SparseMatrix from_coo(std::size_t rows, std::size_t cols,
                                 std::vector<Entry> entries);

    SparseMatrix transposed() const;
    Tensor to_dense() const;
    std::size_t nnz() const { return entries.size(); }
};

}  // namespace mignn

#endif
