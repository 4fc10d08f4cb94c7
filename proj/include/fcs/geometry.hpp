#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fcs {

using Vec3 = std::array<double, 3>;

struct Box {
    Vec3 lo{0.0, 0.0, 0.0};
    Vec3 hi{0.0, 0.0, 0.0};

    double extent(int axis) const { return hi[axis] - lo[axis]; }
    double volume(int dim) const {
        double v = 1.0;
        for (int i = 0; i < dim; ++i) v *= extent(i);
        return v;
    }
    Vec3 center() const {
        return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
    }
    Vec3 corner(int dim, unsigned index) const {
        Vec3 c = lo;
        for (int i = 0; i < dim; ++i)
            if (index & (1u << i)) c[i] = hi[i];
        return c;
    }
    bool degenerate(int dim) const {
        for (int i = 0; i < dim; ++i)
            if (!(hi[i] > lo[i])) return true;
        return false;
    }
};

double min_dist_sq(const Vec3& p, const Box& b, int dim);
double max_dist_sq(const Vec3& p, const Box& b, int dim);

// Occupancy raster; physical where the byte is nonzero.
struct VoxelGrid {
    std::array<std::int64_t, 3> dims{1, 1, 1};
    Box box;
    std::vector<std::uint8_t> occupancy;

    bool at(std::int64_t ix, std::int64_t iy, std::int64_t iz) const {
        return occupancy[(iz * dims[1] + iy) * dims[0] + ix] != 0;
    }
    bool contains_point(const Vec3& p, int dim) const;
};

// Closed catalog of implicit shapes; physical region = where the predicate
// holds. Boolean nodes combine children.
struct Shape {
    enum class Kind {
        All,
        Empty,
        HalfSpace,     // physical where x[axis] < pos (below) or > pos
        Ball,          // physical strictly inside the sphere
        AxisBox,       // physical strictly inside the box
        Complement,
        Intersection,
        Union,
        Voxels,
    };

    Kind kind = Kind::All;
    int axis = 0;
    double pos = 0.0;
    bool below = true;
    Vec3 center{0.0, 0.0, 0.0};
    double radius = 0.0;
    Box box;
    std::vector<Shape> children;
    std::shared_ptr<const VoxelGrid> voxels;

    static Shape all();
    static Shape empty();
    static Shape half_space(int axis, double pos, bool below);
    static Shape ball(const Vec3& center, double radius);
    static Shape axis_box(const Box& box);
    static Shape complement(Shape inner);
    static Shape intersection(std::vector<Shape> parts);
    static Shape union_of(std::vector<Shape> parts);
    static Shape voxel_grid(std::shared_ptr<const VoxelGrid> grid);

    bool inside(const Vec3& p, int dim) const;
};

// Box classification against a shape. Exact parts are axis-aligned boxes the
// shape could split off without sampling; they enable full relative accuracy
// on sliver cuts.
struct ClipResult {
    enum class State { Inside, Outside, Mixed };
    State state = State::Mixed;
    bool exact = false;
    std::vector<std::pair<Box, bool>> parts;  // (box, inside), only when exact
};

ClipResult clip_box(const Shape& shape, const Box& box, int dim);

enum class CutClassification { Inside, Outside, Cut };

// Analytic surface patches for penalty Dirichlet and Neumann terms.
struct SurfacePatch {
    enum class Kind { AxisPlane, Sphere, Point };
    Kind kind = Kind::AxisPlane;

    // AxisPlane: plane x[axis] = pos bounded by [lo,hi] transversally;
    // normal = sign * e_axis.
    int axis = 0;
    double pos = 0.0;
    Box bounds;
    double normal_sign = 1.0;  // sphere: +1 outward, -1 inward

    // Sphere section, angles in radians. 3D: theta polar in [0,pi], phi
    // azimuthal; 2D: circle arc parameterized by phi.
    Vec3 center{0.0, 0.0, 0.0};
    double radius = 0.0;
    double theta0 = 0.0, theta1 = 0.0;
    double phi0 = 0.0, phi1 = 0.0;

    // Point (d=1): located at pos with normal sign*e_x.
};

enum class PenaltyMode { Components, NormalOnly };

struct DirichletSurface {
    SurfacePatch patch;
    Vec3 value{0.0, 0.0, 0.0};  // prescribed data g (field components)
    double beta = 1e10;
    PenaltyMode mode = PenaltyMode::Components;
    unsigned component_mask = ~0u;
};

struct NeumannSurface {
    SurfacePatch patch;
    Vec3 traction{0.0, 0.0, 0.0};
};

// Indicator geometry plus boundary descriptions.
struct ImplicitDomain {
    int dim = 3;
    Shape shape = Shape::all();
    double alpha_fict = 0.0;  // in [0, 1)
    std::vector<DirichletSurface> dirichlet;
    std::vector<NeumannSurface> neumann;

    bool inside(const Vec3& p) const { return shape.inside(p, dim); }
    double alpha(const Vec3& p) const { return inside(p) ? 1.0 : alpha_fict; }
};

CutClassification classify_element(const ImplicitDomain& domain, const Box& bounds, int depth);

// Recursive 2^d-tree volume-fraction estimate; exact parts contribute their
// exact measure, mixed leaf cells fall back to the midpoint predicate.
double volume_fraction(const ImplicitDomain& domain, const Box& bounds, int depth);

struct QuadratureSubCell {
    Box bounds;
    bool inside = true;  // mixed leaves carry the midpoint decision
    bool exact = true;   // false: evaluate alpha pointwise at the points
    std::vector<Vec3> points;
    std::vector<double> weights;  // global measure
};

struct QuadraturePartition {
    std::vector<QuadratureSubCell> cells;
    double inside_volume() const;
};

QuadraturePartition quadrature_cells(const ImplicitDomain& domain, const Box& bounds,
                                     int tree_depth, int order);

struct SurfacePoint {
    Vec3 point;
    double weight;
    Vec3 normal;
};

std::vector<SurfacePoint> surface_quadrature(const SurfacePatch& patch, int order, int dim);

// Region predicates used by mesh refinement.
using RegionPredicate = std::function<bool(const Box&)>;
RegionPredicate region_none();
RegionPredicate region_point(const Vec3& p, int dim);
RegionPredicate region_box(const Box& b, int dim);
RegionPredicate region_sphere_shell(const Vec3& center, double radius, int dim);

// Pore-like synthetic body: box minus a deterministic set of seeded balls.
Shape make_pore_body(const Box& box, std::uint64_t seed, int pore_count, double rmin,
                     double rmax);

// Rasterize a shape into an occupancy grid over `box` (midpoint sampling).
std::shared_ptr<VoxelGrid> rasterize(const Shape& shape, const Box& box, int dim,
                                     const std::array<std::int64_t, 3>& dims);

}  // namespace fcs
