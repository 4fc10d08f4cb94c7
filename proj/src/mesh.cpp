#include "fcs/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fcs/basis.hpp"

namespace fcs {

Box MlhpMesh::cell_bounds(int level, const std::array<std::int64_t, 3>& coord) const {
    Box b;
    for (int i = 0; i < dim_; ++i) {
        // (extent * c) / (counts << level): children bisect parents exactly
        const double denom = static_cast<double>(counts_[i] << level);
        const double ext = box_.extent(i);
        b.lo[i] = box_.lo[i] + ext * static_cast<double>(coord[i]) / denom;
        b.hi[i] = box_.lo[i] + ext * static_cast<double>(coord[i] + 1) / denom;
    }
    return b;
}

Box MlhpMesh::element_bounds(int e) const {
    return cell_bounds(elements_[e].level, elements_[e].coord);
}

int MlhpMesh::find_cell(int level, const std::array<std::int64_t, 3>& coord) const {
    if (level < 0 || level >= static_cast<int>(cells_by_level_.size())) return -1;
    const auto& m = cells_by_level_[level];
    const auto it = m.find(coord);
    return it == m.end() ? -1 : it->second;
}

int MlhpMesh::leaf_of_point(const Vec3& p) const {
    std::array<std::int64_t, 3> c{0, 0, 0};
    for (int i = 0; i < dim_; ++i) {
        const double t = (p[i] - box_.lo[i]) / box_.extent(i) * static_cast<double>(counts_[i]);
        c[i] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(t)), 0,
                                        counts_[i] - 1);
    }
    int e = find_cell(0, c);
    while (elements_[e].first_child >= 0) {
        const Box b = element_bounds(e);
        const Vec3 mid = b.center();
        unsigned child = 0;
        for (int i = 0; i < dim_; ++i)
            if (p[i] >= mid[i]) child |= (1u << i);
        e = elements_[e].first_child + static_cast<int>(child);
    }
    return e;
}

void MlhpMesh::split(int e) {
    const int nchild = 1 << dim_;
    Element parent = elements_[e];
    elements_[e].first_child = static_cast<int>(elements_.size());
    for (int c = 0; c < nchild; ++c) {
        Element child;
        child.level = parent.level + 1;
        child.parent = e;
        for (int i = 0; i < dim_; ++i)
            child.coord[i] = 2 * parent.coord[i] + ((c >> i) & 1);
        child.cls = parent.cls;
        elements_.push_back(child);
    }
    max_level_ = std::max(max_level_, parent.level + 1);
}

void MlhpMesh::collect_leaves(int e) {
    if (elements_[e].first_child < 0) {
        leaves_.push_back(e);
        return;
    }
    for (int c = 0; c < (1 << dim_); ++c) collect_leaves(elements_[e].first_child + c);
}

void MlhpMesh::rebuild_leaves() {
    leaves_.clear();
    std::int64_t base = 1;
    for (int i = 0; i < dim_; ++i) base *= counts_[i];
    for (std::int64_t e = 0; e < base; ++e) collect_leaves(static_cast<int>(e));

    leaf_ordinal_.assign(elements_.size(), -1);
    for (int k = 0; k < static_cast<int>(leaves_.size()); ++k) leaf_ordinal_[leaves_[k]] = k;

    cells_by_level_.assign(max_level_ + 1, {});
    for (int e = 0; e < static_cast<int>(elements_.size()); ++e)
        cells_by_level_[elements_[e].level][elements_[e].coord] = e;
}

void MlhpMesh::refine_toward(const RegionPredicate& region, int depth) {
    if (depth < 0) throw std::invalid_argument("refine_toward: negative depth");
    for (int e = 0; e < static_cast<int>(elements_.size()); ++e) {
        if (elements_[e].level < depth && elements_[e].first_child < 0 &&
            region(element_bounds(e)))
            split(e);
    }
    rebuild_leaves();
}

void MlhpMesh::classify(const ImplicitDomain& domain, int depth) {
    for (int e = 0; e < static_cast<int>(elements_.size()); ++e)
        elements_[e].cls = classify_element(domain, element_bounds(e), depth);
    // bottom-up physical flags; children follow parents in the array
    for (int e = static_cast<int>(elements_.size()) - 1; e >= 0; --e) {
        Element& el = elements_[e];
        if (el.first_child < 0) {
            el.has_physical_leaf = el.cls != CutClassification::Outside;
        } else {
            el.has_physical_leaf = false;
            for (int c = 0; c < (1 << dim_); ++c)
                el.has_physical_leaf |= elements_[el.first_child + c].has_physical_leaf;
        }
    }
}

MlhpMesh build_base_mesh(const Box& box, const std::array<std::int64_t, 3>& counts, int dim) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("build_base_mesh: dim must be 1..3");
    for (int i = 0; i < dim; ++i) {
        if (counts[i] < 1) throw std::invalid_argument("build_base_mesh: zero element count");
        if (!(box.hi[i] > box.lo[i]))
            throw std::invalid_argument("build_base_mesh: degenerate extents");
    }
    MlhpMesh m;
    m.dim_ = dim;
    m.box_ = box;
    m.counts_ = counts;
    for (int i = dim; i < 3; ++i) m.counts_[i] = 1;

    std::array<std::int64_t, 3> c{0, 0, 0};
    std::int64_t total = 1;
    for (int i = 0; i < dim; ++i) total *= m.counts_[i];
    m.elements_.reserve(total);
    for (std::int64_t k = 0; k < total; ++k) {
        Element e;
        e.coord = c;
        m.elements_.push_back(e);
        for (int i = 0; i < dim; ++i) {
            if (++c[i] < m.counts_[i]) break;
            c[i] = 0;
        }
    }
    m.rebuild_leaves();
    return m;
}

const ComponentRecord* DofMap::find(const ComponentKey& key) const {
    const auto it = components_.find(key);
    return it == components_.end() ? nullptr : &it->second;
}

std::vector<int> DofMap::scalar_dofs_per_level(int max_level) const {
    std::vector<int> counts(max_level + 1, 0);
    for (const auto& [key, rec] : components_)
        if (key.level <= max_level) counts[key.level] += rec.modes;
    return counts;
}

namespace {

int popcount(int mask) { return __builtin_popcount(static_cast<unsigned>(mask)); }

// Enumerates the cells adjacent to a component: masked axes pin the cell
// coordinate, vertex axes touch the two cells around the lattice point.
template <typename Fn>
void for_adjacent_cells(const ComponentKey& key, int dim, Fn&& fn) {
    std::array<std::array<std::int64_t, 2>, 3> choices{};
    std::array<int, 3> counts{};
    for (int i = 0; i < dim; ++i) {
        if (key.mask & (1 << i)) {
            choices[i] = {key.coord[i], key.coord[i]};
            counts[i] = 1;
        } else {
            choices[i] = {key.coord[i] - 1, key.coord[i]};
            counts[i] = 2;
        }
    }
    std::array<int, 3> idx{0, 0, 0};
    while (true) {
        std::array<std::int64_t, 3> cell{0, 0, 0};
        for (int i = 0; i < dim; ++i) cell[i] = choices[i][idx[i]];
        fn(cell);
        int i = 0;
        for (; i < dim; ++i) {
            if (++idx[i] < counts[i]) break;
            idx[i] = 0;
        }
        if (i == dim) break;
    }
}

}  // namespace

DofMap enumerate_dofs(const MlhpMesh& mesh, int p, int n_fields, bool remove_outside) {
    if (p < 1) throw std::invalid_argument("enumerate_dofs: order must be >= 1");
    const int dim = mesh.dim();

    // Candidate components from every cell of the tree, deduplicated through
    // the ordered map so numbering is traversal independent.
    std::map<ComponentKey, ComponentRecord> active;
    const int internal_modes = p - 1;

    for (int e = 0; e < static_cast<int>(mesh.element_count()); ++e) {
        const Element& el = mesh.element(e);
        for (int mask = 0; mask < (1 << dim); ++mask) {
            const int nm = popcount(mask);
            if (nm > 0 && internal_modes == 0) continue;  // p = 1 has no high-order modes

            std::array<int, 3> vchoice{0, 0, 0};
            const int free_axes = dim - nm;
            for (int combo = 0; combo < (1 << free_axes); ++combo) {
                ComponentKey key;
                key.level = el.level;
                key.mask = mask;
                int bit = 0;
                for (int i = 0; i < dim; ++i) {
                    if (mask & (1 << i)) {
                        key.coord[i] = el.coord[i];
                    } else {
                        vchoice[i] = (combo >> bit) & 1;
                        key.coord[i] = el.coord[i] + vchoice[i];
                        ++bit;
                    }
                }
                if (active.count(key)) continue;

                // overlay vertices that coincide with a coarser lattice point
                // duplicate the coarse hat through the refinement identity
                if (key.level > 0 && nm == 0) {
                    bool any_odd = false;
                    for (int i = 0; i < dim; ++i) any_odd |= (key.coord[i] & 1) != 0;
                    if (!any_odd) continue;
                }

                // cells beyond the base grid do not make a component an
                // overlay-boundary component; only gaps inside the domain do
                std::array<std::int64_t, 3> grid_max{0, 0, 0};
                for (int i = 0; i < dim; ++i)
                    grid_max[i] = mesh.base_counts()[i] << el.level;

                bool all_present = true;
                bool any_leaf = false;
                bool any_physical = false;
                for_adjacent_cells(key, dim, [&](const std::array<std::int64_t, 3>& cell) {
                    bool in_grid = true;
                    for (int i = 0; i < dim; ++i)
                        in_grid &= cell[i] >= 0 && cell[i] < grid_max[i];
                    if (!in_grid) return;
                    const int idx = mesh.find_cell(key.level, cell);
                    if (idx < 0) {
                        all_present = false;
                        return;
                    }
                    if (mesh.is_leaf(idx)) any_leaf = true;
                    if (mesh.element(idx).has_physical_leaf) any_physical = true;
                });

                if (key.level > 0 && !all_present) continue;   // overlay boundary
                if (nm > 0 && !any_leaf) continue;             // high-order only near leaves
                if (remove_outside && !any_physical) continue; // fully fictitious

                ComponentRecord rec;
                rec.modes = 1;
                for (int k = 0; k < nm; ++k) rec.modes *= internal_modes;
                active.emplace(key, rec);
            }
        }
    }

    DofMap dofs;
    dofs.p_ = p;
    dofs.n_fields_ = n_fields;
    int next = 0;
    for (auto& [key, rec] : active) {
        rec.first_scalar = next;
        next += rec.modes;
    }
    dofs.n_scalar_ = next;
    dofs.components_ = std::move(active);
    return dofs;
}

std::vector<LeafSupport> leaf_supports(const MlhpMesh& mesh, const DofMap& dofs) {
    const int dim = mesh.dim();
    const int p = dofs.p();
    std::vector<LeafSupport> out(mesh.leaf_count());

    for (std::size_t leaf_id = 0; leaf_id < mesh.leaf_count(); ++leaf_id) {
        const int leaf_elem = mesh.leaf_element(static_cast<int>(leaf_id));
        const Element& leaf = mesh.element(leaf_elem);
        LeafSupport& sup = out[leaf_id];

        for (int level = 0; level <= leaf.level; ++level) {
            const int shift = leaf.level - level;
            std::array<std::int64_t, 3> anc{0, 0, 0};
            for (int i = 0; i < dim; ++i) anc[i] = leaf.coord[i] >> shift;
            const Box cell = mesh.cell_bounds(level, anc);

            for (int mask = 0; mask < (1 << dim); ++mask) {
                const int free_axes = dim - popcount(mask);
                for (int combo = 0; combo < (1 << free_axes); ++combo) {
                    ComponentKey key;
                    key.level = level;
                    key.mask = mask;
                    std::array<int, 3> side{0, 0, 0};
                    int bit = 0;
                    for (int i = 0; i < dim; ++i) {
                        if (mask & (1 << i)) {
                            key.coord[i] = anc[i];
                        } else {
                            side[i] = (combo >> bit) & 1;
                            key.coord[i] = anc[i] + side[i];
                            ++bit;
                        }
                    }
                    const ComponentRecord* rec = dofs.find(key);
                    if (!rec) continue;

                    // one entry per internal-degree multi-index
                    std::array<int, 3> deg{0, 0, 0};
                    for (int m = 0; m < rec->modes; ++m) {
                        SupportEntry entry;
                        entry.scalar = rec->first_scalar + m;
                        entry.level = level;
                        entry.mask = mask;
                        int rest = m;
                        for (int i = 0; i < dim; ++i) {
                            SupportFactor f;
                            f.lo = cell.lo[i];
                            f.width = cell.extent(i);
                            if (mask & (1 << i)) {
                                deg[i] = 2 + rest % (p - 1);
                                rest /= (p - 1);
                                f.kind = deg[i];
                            } else {
                                f.kind = side[i];  // 0 falls from lo vertex, 1 rises to hi
                            }
                            entry.factor[i] = f;
                        }
                        sup.entries.push_back(entry);
                    }
                }
            }
        }
    }
    return out;
}

void evaluate_support(const LeafSupport& support, int dim, const Vec3& x, bool with_gradients,
                      BasisEval& out) {
    const std::size_t n = support.entries.size();
    out.values.resize(n);
    if (with_gradients) out.gradients.resize(n);

    for (std::size_t k = 0; k < n; ++k) {
        const SupportEntry& e = support.entries[k];
        std::array<double, 3> fv{1.0, 1.0, 1.0};
        std::array<double, 3> fd{0.0, 0.0, 0.0};
        for (int i = 0; i < dim; ++i) {
            const SupportFactor& f = e.factor[i];
            const double t = (x[i] - f.lo) / f.width;
            if (f.kind == 0) {
                fv[i] = 1.0 - t;
                fd[i] = -1.0 / f.width;
            } else if (f.kind == 1) {
                fv[i] = t;
                fd[i] = 1.0 / f.width;
            } else {
                const double xi = 2.0 * t - 1.0;
                fv[i] = shape_value(f.kind + 1, xi);
                if (with_gradients) fd[i] = shape_derivative(f.kind + 1, xi) * 2.0 / f.width;
            }
        }
        double v = 1.0;
        for (int i = 0; i < dim; ++i) v *= fv[i];
        out.values[k] = v;
        if (with_gradients) {
            Vec3 g{0.0, 0.0, 0.0};
            for (int a = 0; a < dim; ++a) {
                double prod = fd[a];
                for (int i = 0; i < dim; ++i)
                    if (i != a) prod *= fv[i];
                g[a] = prod;
            }
            out.gradients[k] = g;
        }
    }
}

std::array<double, 3> evaluate_solution(const MlhpMesh& mesh, const DofMap& dofs,
                                        const std::vector<LeafSupport>& supports,
                                        std::span<const double> coeffs, const Vec3& x) {
    const int e = mesh.leaf_of_point(x);
    const int leaf_id = mesh.leaf_ordinal(e);
    std::array<double, 3> result{0.0, 0.0, 0.0};
    if (leaf_id < 0) return result;

    BasisEval eval;
    evaluate_support(supports[leaf_id], mesh.dim(), x, false, eval);
    for (std::size_t k = 0; k < supports[leaf_id].entries.size(); ++k) {
        const int scalar = supports[leaf_id].entries[k].scalar;
        for (int f = 0; f < dofs.n_fields(); ++f)
            result[f] += coeffs[dofs.global(scalar, f)] * eval.values[k];
    }
    return result;
}

}  // namespace fcs
