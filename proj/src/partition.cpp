#include "fcs/partition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "fcs/precond.hpp"

namespace fcs {

namespace {

// Leaf centers on the virtual grid of the finest level, exact integers.
std::array<std::int64_t, 3> scaled_center(const Element& e, int max_level) {
    std::array<std::int64_t, 3> c{0, 0, 0};
    const int shift = max_level - e.level;
    for (int i = 0; i < 3; ++i) c[i] = ((2 * e.coord[i] + 1) << shift);
    return c;
}

std::uint64_t morton(const std::array<std::int64_t, 3>& c, int dim) {
    std::uint64_t code = 0;
    for (int bit = 0; bit < 21; ++bit)
        for (int i = 0; i < dim; ++i)
            code |= ((static_cast<std::uint64_t>(c[i]) >> bit) & 1u)
                    << (bit * dim + i);
    return code;
}

bool leaves_adjacent(const Element& a, const Element& b, int dim, int max_level) {
    for (int i = 0; i < dim; ++i) {
        const std::int64_t alo = a.coord[i] << (max_level - a.level);
        const std::int64_t ahi = (a.coord[i] + 1) << (max_level - a.level);
        const std::int64_t blo = b.coord[i] << (max_level - b.level);
        const std::int64_t bhi = (b.coord[i] + 1) << (max_level - b.level);
        if (ahi < blo || bhi < alo) return false;  // closed boxes must touch
    }
    return true;
}

}  // namespace

bool Partition::is_local(int rank, int leaf) const {
    if (owner[leaf] == rank) return true;
    const auto& g = ghost1[rank];
    return std::find(g.begin(), g.end(), leaf) != g.end();
}

Partition make_partition(const MlhpMesh& mesh, const DofMap& dofs,
                         const std::vector<LeafSupport>& supports, int n_ranks,
                         PartitionStrategy strategy) {
    if (n_ranks < 1) throw std::invalid_argument("make_partition: need at least one rank");
    const int dim = mesh.dim();
    const int max_level = mesh.max_level();

    std::vector<int> eligible;
    for (int leaf = 0; leaf < static_cast<int>(mesh.leaf_count()); ++leaf)
        if (mesh.element(mesh.leaf_element(leaf)).cls != CutClassification::Outside)
            eligible.push_back(leaf);
    if (n_ranks > static_cast<int>(eligible.size()))
        throw std::invalid_argument("make_partition: more ranks than active leaves");

    std::vector<int> order = eligible;
    if (strategy == PartitionStrategy::Slab) {
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const auto ca = scaled_center(mesh.element(mesh.leaf_element(a)), max_level);
            const auto cb = scaled_center(mesh.element(mesh.leaf_element(b)), max_level);
            if (ca != cb) return ca < cb;
            return a < b;
        });
    } else {
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const auto ma =
                morton(scaled_center(mesh.element(mesh.leaf_element(a)), max_level), dim);
            const auto mb =
                morton(scaled_center(mesh.element(mesh.leaf_element(b)), max_level), dim);
            if (ma != mb) return ma < mb;
            return a < b;
        });
    }

    Partition part;
    part.n_ranks = n_ranks;
    part.owner.assign(mesh.leaf_count(), -1);
    part.owned.resize(n_ranks);
    part.ghost1.resize(n_ranks);
    part.ghost2.resize(n_ranks);

    const std::size_t total = order.size();
    for (std::size_t k = 0; k < total; ++k) {
        const int rank = static_cast<int>((k * n_ranks) / total);
        part.owner[order[k]] = rank;
        part.owned[rank].push_back(order[k]);
    }
    for (int r = 0; r < n_ranks; ++r) std::sort(part.owned[r].begin(), part.owned[r].end());

    // ghost layers by closed-box adjacency over active leaves
    for (int r = 0; r < n_ranks; ++r) {
        std::vector<char> state(mesh.leaf_count(), 0);  // 1 owned, 2 L1, 3 L2
        for (int leaf : part.owned[r]) state[leaf] = 1;
        for (int leaf : eligible) {
            if (state[leaf]) continue;
            const Element& el = mesh.element(mesh.leaf_element(leaf));
            for (int own : part.owned[r]) {
                if (leaves_adjacent(el, mesh.element(mesh.leaf_element(own)), dim, max_level)) {
                    state[leaf] = 2;
                    part.ghost1[r].push_back(leaf);
                    break;
                }
            }
        }
        for (int leaf : eligible) {
            if (state[leaf]) continue;
            const Element& el = mesh.element(mesh.leaf_element(leaf));
            for (int g1 : part.ghost1[r]) {
                if (leaves_adjacent(el, mesh.element(mesh.leaf_element(g1)), dim, max_level)) {
                    state[leaf] = 3;
                    part.ghost2[r].push_back(leaf);
                    break;
                }
            }
        }
    }

    // a dof belongs to the rank owning the first active leaf of its support
    part.dof_owner.assign(dofs.size(), 0);
    std::vector<int> first_leaf(dofs.scalar_count(), -1);
    for (int leaf = 0; leaf < static_cast<int>(mesh.leaf_count()); ++leaf) {
        if (part.owner[leaf] < 0) continue;
        for (const SupportEntry& e : supports[leaf].entries)
            if (first_leaf[e.scalar] < 0) first_leaf[e.scalar] = leaf;
    }
    for (int s = 0; s < dofs.scalar_count(); ++s) {
        const int rank = first_leaf[s] >= 0 ? part.owner[first_leaf[s]] : 0;
        for (int f = 0; f < dofs.n_fields(); ++f) part.dof_owner[dofs.global(s, f)] = rank;
    }
    return part;
}

LinearSystem local_system(const Partition& partition, int rank, const MlhpMesh& mesh,
                          const DofMap& dofs, const std::vector<LeafSupport>& supports,
                          const ImplicitDomain& domain, const ModelProblem& model,
                          const QuadratureSettings& settings) {
    if (rank < 0 || rank >= partition.n_ranks)
        throw std::invalid_argument("local_system: invalid rank");
    std::vector<char> mask(mesh.leaf_count(), 0);
    for (int leaf : partition.owned[rank]) mask[leaf] = 1;
    for (int leaf : partition.ghost1[rank]) mask[leaf] = 1;
    for (int leaf : partition.ghost2[rank]) mask[leaf] = 1;
    return assemble(mesh, dofs, supports, domain, model, settings, &mask);
}

SparseMatrix local_preconditioner_rows(const Partition& partition, int rank,
                                       const SparseMatrix& local_a, const BlockSet& blocks,
                                       double eps) {
    const std::size_t n = local_a.size();
    TripletBuffer triplets;

    for (const Block& block : blocks.blocks) {
        if (!partition.is_local(rank, block.leaf)) continue;
        const BlockInverse inv = pseudo_inverse(extract_submatrix(local_a, block.dofs), eps);
        const std::size_t m = block.dofs.size();
        for (std::size_t i = 0; i < m; ++i) {
            if (partition.dof_owner[block.dofs[i]] != rank) continue;
            for (std::size_t j = 0; j < m; ++j) {
                const double v = inv.inverse(i, j);
                if (v != 0.0) triplets.add(block.dofs[i], block.dofs[j], v);
            }
        }
    }
    for (std::size_t l = 0; l < n; ++l)
        if (partition.dof_owner[l] == rank)
            triplets.add(static_cast<int>(l), static_cast<int>(l), 0.0);

    SparseMatrix rows = triplets.build(n);
    const auto row_ptr = rows.row_ptr();
    const auto cols = rows.cols();
    auto vals = rows.values();
    for (std::size_t l = 0; l < n; ++l) {
        if (partition.dof_owner[l] != rank) continue;
        for (std::int64_t k = row_ptr[l]; k < row_ptr[l + 1]; ++k) {
            if (cols[k] != static_cast<int>(l)) continue;
            if (vals[k] == 0.0) {
                const double all = local_a.at(static_cast<int>(l), static_cast<int>(l));
                if (all == 0.0)
                    throw std::runtime_error("local_preconditioner_rows: zero diagonal");
                vals[k] = 1.0 / all;
            }
            break;
        }
    }
    return rows;
}

SparseMatrix stitch_rows(std::span<const SparseMatrix> rank_rows) {
    if (rank_rows.empty()) return {};
    const std::size_t n = rank_rows.front().size();
    TripletBuffer triplets;
    for (const SparseMatrix& m : rank_rows) {
        const auto row_ptr = m.row_ptr();
        const auto cols = m.cols();
        const auto vals = m.values();
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
                triplets.add(static_cast<int>(i), cols[k], vals[k]);
    }
    return triplets.build(n);
}

}  // namespace fcs
