#include "fcs/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fcs {

double SparseMatrix::at(int i, int j) const {
    const auto begin = cols_.begin() + row_ptr_[i];
    const auto end = cols_.begin() + row_ptr_[i + 1];
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return vals_[static_cast<std::size_t>(it - cols_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    if (x.size() != n || y.size() != n)
        throw std::invalid_argument("sparse multiply: size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::int64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            s += vals_[k] * x[cols_[k]];
        y[i] = s;
    }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(size(), 0.0);
    multiply(x, y);
    return y;
}

DenseMatrix SparseMatrix::to_dense() const {
    const std::size_t n = size();
    DenseMatrix d(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::int64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, cols_[k]) = vals_[k];
    return d;
}

double SparseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : vals_) m = std::max(m, std::abs(v));
    return m;
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n, std::vector<int>&& rows,
                                         std::vector<int>&& cols, std::vector<double>&& vals) {
    const std::size_t m = vals.size();
    std::vector<std::uint32_t> order(m);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (rows[a] != rows[b]) return rows[a] < rows[b];
        return cols[a] < cols[b];
    });

    SparseMatrix s;
    s.row_ptr_.assign(n + 1, 0);
    s.cols_.reserve(m);
    s.vals_.reserve(m);
    std::size_t k = 0;
    while (k < m) {
        const int r = rows[order[k]];
        const int c = cols[order[k]];
        double sum = 0.0;
        while (k < m && rows[order[k]] == r && cols[order[k]] == c) {
            sum += vals[order[k]];
            ++k;
        }
        s.cols_.push_back(c);
        s.vals_.push_back(sum);
        s.row_ptr_[r + 1] += 1;
    }
    for (std::size_t i = 0; i < n; ++i) s.row_ptr_[i + 1] += s.row_ptr_[i];
    return s;
}

}  // namespace fcs
