#pragma once

#include <span>
#include <vector>

#include "fcs/assembly.hpp"
#include "fcs/blocks.hpp"
#include "fcs/mesh.hpp"
#include "fcs/sparse.hpp"

namespace fcs {

enum class PartitionStrategy { Slab, SpaceFillingCurve };

// In-process stand-in for a distributed mesh decomposition: ranks own
// disjoint sets of non-Outside leaves plus two layers of ghost leaves
// (vertex-closure adjacency), enough to assemble complete rows of A for
// owned dofs and the exact rows of S without communication.
struct Partition {
    int n_ranks = 1;
    std::vector<int> owner;               // per leaf ordinal; -1 for Outside leaves
    std::vector<std::vector<int>> owned;  // per rank
    std::vector<std::vector<int>> ghost1;
    std::vector<std::vector<int>> ghost2;
    std::vector<int> dof_owner;  // per global dof

    bool is_local(int rank, int leaf) const;  // owned or first ghost layer
};

Partition make_partition(const MlhpMesh& mesh, const DofMap& dofs,
                         const std::vector<LeafSupport>& supports, int n_ranks,
                         PartitionStrategy strategy);

// Assembly restricted to owned + both ghost layers, in global numbering.
// Rows of owned dofs equal the serial rows bitwise.
LinearSystem local_system(const Partition& partition, int rank, const MlhpMesh& mesh,
                          const DofMap& dofs, const std::vector<LeafSupport>& supports,
                          const ImplicitDomain& domain, const ModelProblem& model,
                          const QuadratureSettings& settings);

// Processes every block whose leaf lies in owned + L1 and returns only the
// rows of S belonging to dofs this rank owns.
SparseMatrix local_preconditioner_rows(const Partition& partition, int rank,
                                       const SparseMatrix& local_a, const BlockSet& blocks,
                                       double eps);

// Merges disjoint per-rank row sets into one matrix.
SparseMatrix stitch_rows(std::span<const SparseMatrix> rank_rows);

}  // namespace fcs
