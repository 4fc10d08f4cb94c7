#pragma once

#include <span>
#include <vector>

#include "fcs/blocks.hpp"
#include "fcs/dense.hpp"
#include "fcs/sparse.hpp"

namespace fcs {

struct BlockInverse {
    DenseMatrix inverse;  // pseudo inverse of the block submatrix
    int discarded = 0;    // eigenvalues at or below the threshold
};

struct PreconditionerStats {
    int blocks = 0;
    long long discarded = 0;
    std::size_t nnz = 0;
};

struct Preconditioner {
    SparseMatrix s;
    PreconditionerStats stats;

    void apply(std::span<const double> r, std::span<double> y) const { s.multiply(r, y); }
    std::vector<double> apply(std::span<const double> r) const { return s.multiply(r); }
};

// (A_B)_{ij} = A[B_i, B_j]
DenseMatrix extract_submatrix(const SparseMatrix& a, std::span<const int> indices);

// Symmetric eigen pseudo inverse. For eps > 0 eigenvalues at or below
// eps * lambda_max are zeroed; eps == 0 keeps the plain inverse (every
// nonzero eigenvalue inverted, sign included), which reproduces the
// unstabilized variant.
BlockInverse pseudo_inverse(const DenseMatrix& block, double eps);

// Algorithm: scatter-add R_B^T A_B^+ R_B over all blocks, then set
// S(l,l) = 1/A(l,l) for every row whose diagonal is still exactly zero.
Preconditioner build_preconditioner(const SparseMatrix& a, const BlockSet& blocks, double eps);

}  // namespace fcs
