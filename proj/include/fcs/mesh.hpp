#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "fcs/geometry.hpp"

namespace fcs {

// Multi-level hp overlay mesh: a uniform base grid whose elements are
// recursively bisected into 2^d congruent children. Every tree node is kept;
// only leaves are integrated. Cell positions are integer coordinates in the
// virtual uniform grid of their level, which makes bounds, ancestors and
// topological components exact.
struct Element {
    std::array<std::int64_t, 3> coord{0, 0, 0};
    int level = 0;
    int parent = -1;
    int first_child = -1;  // 2^d children stored contiguously; -1 for leaves
    CutClassification cls = CutClassification::Inside;
    bool has_physical_leaf = true;
};

class MlhpMesh {
public:
    MlhpMesh() = default;

    int dim() const { return dim_; }
    int max_level() const { return max_level_; }
    const Box& domain_box() const { return box_; }
    const std::array<std::int64_t, 3>& base_counts() const { return counts_; }

    std::size_t element_count() const { return elements_.size(); }
    const Element& element(int e) const { return elements_[e]; }
    bool is_leaf(int e) const { return elements_[e].first_child < 0; }

    std::span<const int> leaves() const { return leaves_; }
    int leaf_element(int leaf_id) const { return leaves_[leaf_id]; }
    int leaf_ordinal(int element) const { return leaf_ordinal_[element]; }
    std::size_t leaf_count() const { return leaves_.size(); }

    Box element_bounds(int e) const;
    Box cell_bounds(int level, const std::array<std::int64_t, 3>& coord) const;

    // Cell lookup in the virtual level grid; -1 when absent from the tree.
    int find_cell(int level, const std::array<std::int64_t, 3>& coord) const;

    // Leaf element containing a point (points on internal boundaries resolve
    // to the high side; outside points clamp to the nearest cell).
    int leaf_of_point(const Vec3& p) const;

    void refine_toward(const RegionPredicate& region, int depth);

    // Fills the per-element classification cache and physical-leaf flags.
    void classify(const ImplicitDomain& domain, int depth);

private:
    friend MlhpMesh build_base_mesh(const Box& box, const std::array<std::int64_t, 3>& counts,
                                    int dim);
    void split(int e);
    void rebuild_leaves();
    void collect_leaves(int e);

    int dim_ = 0;
    int max_level_ = 0;
    Box box_;
    std::array<std::int64_t, 3> counts_{1, 1, 1};
    std::vector<Element> elements_;
    std::vector<int> leaves_;
    std::vector<int> leaf_ordinal_;
    std::vector<std::map<std::array<std::int64_t, 3>, int>> cells_by_level_;
};

MlhpMesh build_base_mesh(const Box& box, const std::array<std::int64_t, 3>& counts, int dim);

// A topological component at one level of the hierarchy. `mask` marks the
// axes in which the component has interior (high-order) extent: vertices have
// mask 0, an edge one bit, a 3D face two bits, the cell interior all bits.
// Coordinates are cell coordinates on masked axes and vertex (lattice)
// coordinates on the others.
struct ComponentKey {
    int level = 0;
    int mask = 0;
    std::array<std::int64_t, 3> coord{0, 0, 0};

    bool operator<(const ComponentKey& o) const {
        if (level != o.level) return level < o.level;
        if (mask != o.mask) return mask < o.mask;
        return coord < o.coord;
    }
};

struct ComponentRecord {
    int first_scalar = 0;  // scalar dof of the first mode
    int modes = 1;         // (p-1)^popcount(mask)
};

class DofMap {
public:
    int p() const { return p_; }
    int n_fields() const { return n_fields_; }
    int scalar_count() const { return n_scalar_; }
    int size() const { return n_scalar_ * n_fields_; }

    const ComponentRecord* find(const ComponentKey& key) const;
    const std::map<ComponentKey, ComponentRecord>& components() const { return components_; }

    // Global index of (scalar function, field): fields interleave fastest.
    int global(int scalar, int field) const { return scalar * n_fields_ + field; }

    std::vector<int> scalar_dofs_per_level(int max_level) const;

private:
    friend DofMap enumerate_dofs(const MlhpMesh& mesh, int p, int n_fields, bool remove_outside);
    int p_ = 1;
    int n_fields_ = 1;
    int n_scalar_ = 0;
    std::map<ComponentKey, ComponentRecord> components_;
};

// Activity rules: (a) level-0 components are active wherever supported by a
// non-Outside element; (b) for level >= 1 a component is active only when
// interior to its level's overlay subdomain (all adjacent cells of that level
// exist); (c) high-order modes are only assigned where a neighboring cell of
// the same level is a leaf; (d) non-leaf cells carry no interior modes.
// Functions supported exclusively on Outside leaves are dropped when
// remove_outside is set.
DofMap enumerate_dofs(const MlhpMesh& mesh, int p, int n_fields, bool remove_outside = true);

// One basis function (scalar mode) restricted to a leaf: per axis a linear
// hat over the carrying cell or an internal mode of degree >= 2.
struct SupportFactor {
    double lo = 0.0;
    double width = 1.0;
    int kind = 0;  // 0: hat falling from lo, 1: hat rising to hi, q >= 2: degree-q mode
};

struct SupportEntry {
    int scalar = 0;
    int level = 0;
    int mask = 0;
    std::array<SupportFactor, 3> factor;
};

struct LeafSupport {
    std::vector<SupportEntry> entries;
};

std::vector<LeafSupport> leaf_supports(const MlhpMesh& mesh, const DofMap& dofs);

struct BasisEval {
    std::vector<double> values;
    std::vector<Vec3> gradients;
};

void evaluate_support(const LeafSupport& support, int dim, const Vec3& x, bool with_gradients,
                      BasisEval& out);

// Field values of a coefficient vector at a point (n_fields entries).
std::array<double, 3> evaluate_solution(const MlhpMesh& mesh, const DofMap& dofs,
                                        const std::vector<LeafSupport>& supports,
                                        std::span<const double> coeffs, const Vec3& x);

}  // namespace fcs
