#include "fcs/precond.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fcs/parallel.hpp"

namespace fcs {

DenseMatrix extract_submatrix(const SparseMatrix& a, std::span<const int> indices) {
    const std::size_t m = indices.size();
    DenseMatrix sub(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        const int row = indices[i];
        const auto cols = a.cols();
        const auto vals = a.values();
        const auto begin = a.row_ptr()[row];
        const auto end = a.row_ptr()[row + 1];
        // indices are sorted; merge against the sorted row pattern
        std::int64_t k = begin;
        for (std::size_t j = 0; j < m; ++j) {
            const int col = indices[j];
            while (k < end && cols[k] < col) ++k;
            if (k < end && cols[k] == col) sub(i, j) = vals[k];
        }
    }
    return sub;
}

BlockInverse pseudo_inverse(const DenseMatrix& block, double eps) {
    const std::size_t m = block.rows();
    for (double v : block.data())
        if (!std::isfinite(v))
            throw std::runtime_error("pseudo_inverse: non-finite block entry");

    EigenDecomposition eig = jacobi_eigen(block, true, JacobiMode::Frobenius);

    BlockInverse out;
    out.inverse = DenseMatrix(m, m);
    const double lambda_max = eig.values.empty() ? 0.0 : eig.values.back();
    const double threshold = eps > 0.0 ? eps * lambda_max : 0.0;

    for (std::size_t k = 0; k < m; ++k) {
        const double lambda = eig.values[k];
        const bool keep = eps > 0.0 ? (lambda > threshold) : (lambda != 0.0);
        if (!keep) {
            ++out.discarded;
            continue;
        }
        const double inv = 1.0 / lambda;
        for (std::size_t i = 0; i < m; ++i) {
            const double vi = eig.vectors(i, k) * inv;
            if (vi == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j)
                out.inverse(i, j) += vi * eig.vectors(j, k);
        }
    }
    return out;
}

Preconditioner build_preconditioner(const SparseMatrix& a, const BlockSet& blocks, double eps) {
    const std::size_t n = a.size();

    std::vector<BlockInverse> inverses(blocks.blocks.size());
    parallel_for(static_cast<int>(blocks.blocks.size()), [&](int bi) {
        const Block& block = blocks.blocks[bi];
        inverses[bi] = pseudo_inverse(extract_submatrix(a, block.dofs), eps);
    });

    TripletBuffer triplets;
    std::size_t total = n;
    for (const Block& b : blocks.blocks) total += b.dofs.size() * b.dofs.size();
    triplets.reserve(total);

    Preconditioner p;
    for (std::size_t bi = 0; bi < blocks.blocks.size(); ++bi) {
        const Block& block = blocks.blocks[bi];
        const DenseMatrix& inv = inverses[bi].inverse;
        const std::size_t m = block.dofs.size();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                const double v = inv(i, j);
                if (v != 0.0) triplets.add(block.dofs[i], block.dofs[j], v);
            }
        p.stats.discarded += inverses[bi].discarded;
    }
    // make sure every diagonal slot exists for the scaling pass
    for (std::size_t l = 0; l < n; ++l) triplets.add(static_cast<int>(l), static_cast<int>(l), 0.0);

    p.s = triplets.build(n);
    p.stats.blocks = static_cast<int>(blocks.blocks.size());

    // Diagonal scaling of rows no block touched (exact-zero test, as the
    // covered diagonal entries are sums of non-negative products).
    const auto row_ptr = p.s.row_ptr();
    const auto cols = p.s.cols();
    auto vals = p.s.values();
    for (std::size_t l = 0; l < n; ++l) {
        for (std::int64_t k = row_ptr[l]; k < row_ptr[l + 1]; ++k) {
            if (cols[k] != static_cast<int>(l)) continue;
            if (vals[k] == 0.0) {
                const double all = a.at(static_cast<int>(l), static_cast<int>(l));
                if (all == 0.0)
                    throw std::runtime_error(
                        "build_preconditioner: zero diagonal for uncovered dof " +
                        std::to_string(l) +
                        " (fully fictitious function left in the system?)");
                vals[k] = 1.0 / all;
            }
            break;
        }
    }
    p.stats.nnz = p.s.nnz();
    return p;
}

}  // namespace fcs
