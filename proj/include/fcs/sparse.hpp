#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fcs/dense.hpp"

namespace fcs {

// Compressed-row symmetric sparse matrix. The full (symmetric) pattern is
// stored; column indices are sorted within each row.
class SparseMatrix {
public:
    SparseMatrix() = default;

    std::size_t size() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
    std::size_t nnz() const { return cols_.size(); }

    std::span<const std::int64_t> row_ptr() const { return row_ptr_; }
    std::span<const int> cols() const { return cols_; }
    std::span<const double> values() const { return vals_; }
    std::span<double> values() { return vals_; }

    // Entry lookup by binary search; 0.0 when outside the pattern.
    double at(int i, int j) const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> multiply(std::span<const double> x) const;

    DenseMatrix to_dense() const;

    double max_abs() const;

    // Builds from unsorted triplets; duplicates are summed in their original
    // order so the result is bitwise reproducible for a fixed triplet stream.
    static SparseMatrix from_triplets(std::size_t n, std::vector<int>&& rows,
                                      std::vector<int>&& cols, std::vector<double>&& vals);

private:
    std::vector<std::int64_t> row_ptr_;
    std::vector<int> cols_;
    std::vector<double> vals_;
};

// Deterministic triplet accumulator used by assembly and the preconditioner.
class TripletBuffer {
public:
    void reserve(std::size_t n) {
        rows_.reserve(n);
        cols_.reserve(n);
        vals_.reserve(n);
    }
    void add(int i, int j, double v) {
        rows_.push_back(i);
        cols_.push_back(j);
        vals_.push_back(v);
    }
    std::size_t size() const { return vals_.size(); }
    SparseMatrix build(std::size_t n) {
        return SparseMatrix::from_triplets(n, std::move(rows_), std::move(cols_),
                                           std::move(vals_));
    }

private:
    std::vector<int> rows_, cols_;
    std::vector<double> vals_;
};

}  // namespace fcs
