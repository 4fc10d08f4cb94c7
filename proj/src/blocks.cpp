#include "fcs/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fcs {

namespace {

void finalize(BlockSet& set, std::size_t n) {
    set.overlap.assign(n, 0);
    for (const Block& b : set.blocks)
        for (int d : b.dofs) set.overlap[d] += 1;
    set.uncovered.clear();
    for (std::size_t d = 0; d < n; ++d)
        if (set.overlap[d] == 0) set.uncovered.push_back(static_cast<int>(d));
}

// Hat values at a leaf corner, exact dyadic rationals. `num` is the corner
// position in 2^-delta units of the carrying cell.
struct AxisCandidate {
    std::int64_t vertex;
    double value;
    int preference;  // 0 favored, 1 fallback
};

std::array<AxisCandidate, 2> axis_candidates(std::int64_t leaf_coord, int side,
                                             std::int64_t cell_coord, int delta) {
    const std::int64_t den = std::int64_t{1} << delta;
    const std::int64_t num = leaf_coord + side - (cell_coord << delta);
    const double t = static_cast<double>(num) / static_cast<double>(den);
    AxisCandidate lo{cell_coord, 1.0 - t, 0};
    AxisCandidate hi{cell_coord + 1, t, 0};
    // larger value first; exact tie keeps the corner's own side
    const bool lo_first = (2 * num < den) || (2 * num == den && side == 0);
    AxisCandidate first = lo_first ? lo : hi;
    AxisCandidate second = lo_first ? hi : lo;
    first.preference = 0;
    second.preference = 1;
    return {first, second};
}

// Gram-Schmidt rank guard over the transverse corner values.
struct RankGuard {
    std::vector<std::vector<double>> basis;

    bool accept(std::vector<double> v) {
        const double norm0 = std::sqrt(dot(v, v));
        if (!(norm0 > 0.0)) return false;
        for (const auto& b : basis) {
            const double proj = dot(v, b);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * b[i];
        }
        const double norm = std::sqrt(dot(v, v));
        if (norm <= 1e-12 * norm0) return false;
        for (double& x : v) x /= norm;
        basis.push_back(std::move(v));
        return true;
    }

    static double dot(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }
};

}  // namespace

BlockSet full_blocks(const MlhpMesh& mesh, const DofMap& dofs,
                     const std::vector<LeafSupport>& supports) {
    BlockSet set;
    for (int leaf = 0; leaf < static_cast<int>(mesh.leaf_count()); ++leaf) {
        if (mesh.element(mesh.leaf_element(leaf)).cls == CutClassification::Outside) continue;
        Block block;
        block.leaf = leaf;
        block.kind = Block::Kind::Full;
        block.dofs.reserve(supports[leaf].entries.size() * dofs.n_fields());
        for (const SupportEntry& e : supports[leaf].entries)
            for (int f = 0; f < dofs.n_fields(); ++f)
                block.dofs.push_back(dofs.global(e.scalar, f));
        std::sort(block.dofs.begin(), block.dofs.end());
        block.dofs.erase(std::unique(block.dofs.begin(), block.dofs.end()), block.dofs.end());
        if (!block.dofs.empty()) set.blocks.push_back(std::move(block));
    }
    finalize(set, dofs.size());
    return set;
}

BlockSet truncated_blocks(const MlhpMesh& mesh, const DofMap& dofs,
                          const std::vector<LeafSupport>& supports) {
    (void)supports;
    const int dim = mesh.dim();
    const int p = dofs.p();
    BlockSet set;

    int expected = 1;
    for (int i = 0; i < dim; ++i) expected *= (p + 1);

    for (int leaf_id = 0; leaf_id < static_cast<int>(mesh.leaf_count()); ++leaf_id) {
        const Element& leaf = mesh.element(mesh.leaf_element(leaf_id));
        if (leaf.cls == CutClassification::Outside) continue;

        Block block;
        block.leaf = leaf_id;
        block.kind = Block::Kind::Truncated;
        int scalar_count = 0;

        for (int mask = 0; mask < (1 << dim); ++mask) {
            std::vector<int> taxes;
            for (int i = 0; i < dim; ++i)
                if (!(mask & (1 << i))) taxes.push_back(i);
            const int nt = static_cast<int>(taxes.size());
            if (dim - nt > 0 && p < 2) continue;  // no internal modes at p = 1

            RankGuard guard;
            for (int sigma = 0; sigma < (1 << nt); ++sigma) {
                bool accepted = false;
                for (int level = leaf.level; level >= 0 && !accepted; --level) {
                    const int delta = leaf.level - level;
                    std::array<std::int64_t, 3> anc{0, 0, 0};
                    for (int i = 0; i < dim; ++i) anc[i] = leaf.coord[i] >> delta;

                    // per transverse axis the two hat candidates, best first
                    std::array<std::array<AxisCandidate, 2>, 3> cand{};
                    for (int t = 0; t < nt; ++t) {
                        const int axis = taxes[t];
                        cand[t] = axis_candidates(leaf.coord[axis], (sigma >> t) & 1,
                                                  anc[axis], delta);
                    }

                    // combos ordered by descending hat-value product
                    std::vector<std::pair<double, int>> combos;
                    for (int c = 0; c < (1 << nt); ++c) {
                        double score = 1.0;
                        for (int t = 0; t < nt; ++t) score *= cand[t][(c >> t) & 1].value;
                        if (score > 0.0) combos.emplace_back(-score, c);
                    }
                    std::sort(combos.begin(), combos.end());

                    for (const auto& [neg_score, c] : combos) {
                        ComponentKey key;
                        key.level = level;
                        key.mask = mask;
                        for (int i = 0; i < dim; ++i) key.coord[i] = anc[i];
                        for (int t = 0; t < nt; ++t)
                            key.coord[taxes[t]] = cand[t][(c >> t) & 1].vertex;
                        const ComponentRecord* rec = dofs.find(key);
                        if (!rec) continue;

                        // transverse hat values at every transverse corner
                        std::vector<double> tv(std::size_t{1} << nt, 1.0);
                        for (int tau = 0; tau < (1 << nt); ++tau) {
                            for (int t = 0; t < nt; ++t) {
                                const int axis = taxes[t];
                                const std::int64_t den = std::int64_t{1} << delta;
                                const std::int64_t num = leaf.coord[axis] + ((tau >> t) & 1) -
                                                         (anc[axis] << delta);
                                const double tt =
                                    static_cast<double>(num) / static_cast<double>(den);
                                const bool rising =
                                    key.coord[axis] == anc[axis] + 1;  // hat rises to hi vertex
                                tv[tau] *= rising ? tt : 1.0 - tt;
                            }
                        }
                        if (!guard.accept(std::move(tv))) continue;

                        for (int m = 0; m < rec->modes; ++m)
                            for (int f = 0; f < dofs.n_fields(); ++f)
                                block.dofs.push_back(dofs.global(rec->first_scalar + m, f));
                        scalar_count += rec->modes;
                        accepted = true;
                        break;
                    }
                }
                if (!accepted)
                    throw std::logic_error(
                        "truncated_blocks: no independent component found; "
                        "the dof map is inconsistent");
            }
        }

        if (scalar_count != expected)
            throw std::logic_error("truncated_blocks: block size mismatch");
        std::sort(block.dofs.begin(), block.dofs.end());
        block.dofs.erase(std::unique(block.dofs.begin(), block.dofs.end()), block.dofs.end());
        set.blocks.push_back(std::move(block));
    }
    finalize(set, dofs.size());
    return set;
}

BlockSet filter_blocks(const BlockSet& set, std::span<const double> eta, double eta_bar,
                       std::size_t n_dofs, bool include_interior) {
    if (eta_bar < 0.0 || eta_bar > 1.0)
        throw std::invalid_argument("filter_blocks: eta_bar must be in [0, 1]");
    BlockSet out;
    for (const Block& b : set.blocks) {
        const double e = eta[b.leaf];
        const bool interior_kept = include_interior && eta_bar >= 1.0;
        if (e <= eta_bar && (e < 1.0 || interior_kept)) out.blocks.push_back(b);
    }
    finalize(out, n_dofs);
    return out;
}

}  // namespace fcs
