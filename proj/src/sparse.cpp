#include "mignn/sparse.hpp"

#include <algorithm>
#include <string>

namespace mignn {

SparseMatrix SparseMatrix::from_coo(std::size_t rows, std::size_t cols,
                                    std::vector<Entry> entries) {
    for (const Entry& e : entries) {
        if (e.row >= rows || e.col >= cols)
            throw ValidationError("sparse entry (" + std::to_string(e.row) + ", " +
                                  std::to_string(e.col) + ") out of range");
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix s(rows, cols);
    s.entries.reserve(entries.size());
    for (const Entry& e : entries) {
        if (!s.entries.empty() && s.entries.back().row == e.row && s.entries.back().col == e.col)
            s.entries.back().value += e.value;
        else
            s.entries.push_back(e);
    }
    return s;
}

SparseMatrix SparseMatrix::transposed() const {
    std::vector<Entry> flipped;
    flipped.reserve(entries.size());
    for (const Entry& e : entries) flipped.push_back({e.col, e.row, e.value});
    return from_coo(cols, rows, std::move(flipped));
}

Tensor SparseMatrix::to_dense() const {
    std::vector<double> out(rows * cols, 0.0);
    for (const Entry& e : entries) out[e.row * cols + e.col] = e.value;
    return Tensor({rows, cols}, std::move(out));
}

}  // namespace mignn
