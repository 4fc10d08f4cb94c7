#pragma once

#include <span>
#include <vector>

#include "fcs/mesh.hpp"

namespace fcs {

struct Block {
    enum class Kind { Full, Truncated };
    int leaf = -1;  // leaf ordinal
    Kind kind = Kind::Full;
    std::vector<int> dofs;  // global indices, sorted ascending, duplicate free
};

struct BlockSet {
    std::vector<Block> blocks;
    std::vector<int> overlap;    // per global dof: number of containing blocks
    std::vector<int> uncovered;  // active dofs in no block; Jacobi treatment
};

// One block per non-Outside leaf with every function supported on it.
BlockSet full_blocks(const MlhpMesh& mesh, const DofMap& dofs,
                     const std::vector<LeafSupport>& supports);

// Per leaf the block is reduced to n_fields*(p+1)^d functions: for every
// combination of per-axis roles (two linear hats, p-1 internal modes) the
// first active component found by walking from the leaf level toward the base
// provides the trace; a rank guard on the hats' corner values rejects
// selections that are linearly dependent on the leaf and continues the walk.
BlockSet truncated_blocks(const MlhpMesh& mesh, const DofMap& dofs,
                          const std::vector<LeafSupport>& supports);

// Keeps blocks of leaves with eta <= eta_bar; interior (eta = 1) blocks stay
// only when eta_bar reaches 1 and include_interior is set. Dofs left without
// a block land in the uncovered set.
BlockSet filter_blocks(const BlockSet& set, std::span<const double> eta, double eta_bar,
                       std::size_t n_dofs, bool include_interior = true);

}  // namespace fcs
