#include "fcs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fcs/basis.hpp"

namespace fcs {

double min_dist_sq(const Vec3& p, const Box& b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = std::max({b.lo[i] - p[i], p[i] - b.hi[i], 0.0});
        s += d * d;
    }
    return s;
}

double max_dist_sq(const Vec3& p, const Box& b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = std::max(std::abs(p[i] - b.lo[i]), std::abs(p[i] - b.hi[i]));
        s += d * d;
    }
    return s;
}

bool VoxelGrid::contains_point(const Vec3& p, int dim) const {
    std::array<std::int64_t, 3> idx{0, 0, 0};
    for (int i = 0; i < dim; ++i) {
        const double t = (p[i] - box.lo[i]) / box.extent(i);
        auto k = static_cast<std::int64_t>(std::floor(t * static_cast<double>(dims[i])));
        if (k < 0 || k >= dims[i]) return false;
        idx[i] = k;
    }
    return at(idx[0], idx[1], idx[2]);
}

Shape Shape::all() { return Shape{}; }

Shape Shape::empty() {
    Shape s;
    s.kind = Kind::Empty;
    return s;
}

Shape Shape::half_space(int axis, double pos, bool below) {
    Shape s;
    s.kind = Kind::HalfSpace;
    s.axis = axis;
    s.pos = pos;
    s.below = below;
    return s;
}

Shape Shape::ball(const Vec3& center, double radius) {
    Shape s;
    s.kind = Kind::Ball;
    s.center = center;
    s.radius = radius;
    return s;
}

Shape Shape::axis_box(const Box& box) {
    Shape s;
    s.kind = Kind::AxisBox;
    s.box = box;
    return s;
}

Shape Shape::complement(Shape inner) {
    Shape s;
    s.kind = Kind::Complement;
    s.children.push_back(std::move(inner));
    return s;
}

Shape Shape::intersection(std::vector<Shape> parts) {
    Shape s;
    s.kind = Kind::Intersection;
    s.children = std::move(parts);
    return s;
}

Shape Shape::union_of(std::vector<Shape> parts) {
    Shape s;
    s.kind = Kind::Union;
    s.children = std::move(parts);
    return s;
}

Shape Shape::voxel_grid(std::shared_ptr<const VoxelGrid> grid) {
    Shape s;
    s.kind = Kind::Voxels;
    s.voxels = std::move(grid);
    return s;
}

bool Shape::inside(const Vec3& p, int dim) const {
    switch (kind) {
        case Kind::All:
            return true;
        case Kind::Empty:
            return false;
        case Kind::HalfSpace:
            return below ? (p[axis] < pos) : (p[axis] > pos);
        case Kind::Ball: {
            double s = 0.0;
            for (int i = 0; i < dim; ++i) s += (p[i] - center[i]) * (p[i] - center[i]);
            return s < radius * radius;
        }
        case Kind::AxisBox:
            for (int i = 0; i < dim; ++i)
                if (p[i] <= box.lo[i] || p[i] >= box.hi[i]) return false;
            return true;
        case Kind::Complement:
            return !children[0].inside(p, dim);
        case Kind::Intersection:
            for (const Shape& c : children)
                if (!c.inside(p, dim)) return false;
            return true;
        case Kind::Union:
            for (const Shape& c : children)
                if (c.inside(p, dim)) return true;
            return false;
        case Kind::Voxels:
            return voxels->contains_point(p, dim);
    }
    return false;
}

namespace {

ClipResult uniform(ClipResult::State s) {
    ClipResult r;
    r.state = s;
    return r;
}

ClipResult mixed_generic() { return uniform(ClipResult::State::Mixed); }

ClipResult flip(ClipResult r) {
    if (r.state == ClipResult::State::Inside)
        r.state = ClipResult::State::Outside;
    else if (r.state == ClipResult::State::Outside)
        r.state = ClipResult::State::Inside;
    for (auto& [box, in] : r.parts) in = !in;
    return r;
}

// Peels the part of `outer` outside `inner` into axis slabs; `inner` must be
// contained in `outer`. Appends (slab, false-flag) parts and returns inner.
Box peel_outside(const Box& outer, const Box& inner, int dim,
                 std::vector<std::pair<Box, bool>>& parts) {
    Box current = outer;
    for (int i = 0; i < dim; ++i) {
        if (inner.lo[i] > current.lo[i]) {
            Box slab = current;
            slab.hi[i] = inner.lo[i];
            if (!slab.degenerate(dim)) parts.emplace_back(slab, false);
            current.lo[i] = inner.lo[i];
        }
        if (inner.hi[i] < current.hi[i]) {
            Box slab = current;
            slab.lo[i] = inner.hi[i];
            if (!slab.degenerate(dim)) parts.emplace_back(slab, false);
            current.hi[i] = inner.hi[i];
        }
    }
    return current;
}

ClipResult clip_voxels(const VoxelGrid& g, const Box& box, int dim) {
    std::array<std::int64_t, 3> lo{0, 0, 0}, hi{1, 1, 1};
    for (int i = 0; i < dim; ++i) {
        const double scale = static_cast<double>(g.dims[i]) / g.box.extent(i);
        const double tlo = (box.lo[i] - g.box.lo[i]) * scale;
        const double thi = (box.hi[i] - g.box.lo[i]) * scale;
        if (thi <= 0.0 || tlo >= static_cast<double>(g.dims[i])) return uniform(ClipResult::State::Outside);
        if (tlo < 0.0 || thi > static_cast<double>(g.dims[i])) return mixed_generic();
        lo[i] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(tlo)), 0, g.dims[i] - 1);
        hi[i] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(thi)), 1, g.dims[i]);
    }
    std::int64_t count = 1;
    for (int i = 0; i < dim; ++i) count *= (hi[i] - lo[i]);
    if (count > 4096) return mixed_generic();
    bool first = g.at(lo[0], lo[1], lo[2]);
    for (std::int64_t iz = lo[2]; iz < std::max<std::int64_t>(hi[2], lo[2] + 1); ++iz)
        for (std::int64_t iy = lo[1]; iy < std::max<std::int64_t>(hi[1], lo[1] + 1); ++iy)
            for (std::int64_t ix = lo[0]; ix < std::max<std::int64_t>(hi[0], lo[0] + 1); ++ix)
                if (g.at(ix, iy, iz) != first) return mixed_generic();
    return uniform(first ? ClipResult::State::Inside : ClipResult::State::Outside);
}

}  // namespace

ClipResult clip_box(const Shape& shape, const Box& box, int dim) {
    using State = ClipResult::State;
    switch (shape.kind) {
        case Shape::Kind::All:
            return uniform(State::Inside);
        case Shape::Kind::Empty:
            return uniform(State::Outside);
        case Shape::Kind::HalfSpace: {
            const double lo = box.lo[shape.axis], hi = box.hi[shape.axis];
            if (hi <= shape.pos) return uniform(shape.below ? State::Inside : State::Outside);
            if (lo >= shape.pos) return uniform(shape.below ? State::Outside : State::Inside);
            ClipResult r;
            r.state = State::Mixed;
            r.exact = true;
            Box a = box, b = box;
            a.hi[shape.axis] = shape.pos;
            b.lo[shape.axis] = shape.pos;
            r.parts.emplace_back(a, shape.below);
            r.parts.emplace_back(b, !shape.below);
            return r;
        }
        case Shape::Kind::Ball: {
            const double r2 = shape.radius * shape.radius;
            if (max_dist_sq(shape.center, box, dim) < r2) return uniform(State::Inside);
            if (min_dist_sq(shape.center, box, dim) >= r2) return uniform(State::Outside);
            return mixed_generic();
        }
        case Shape::Kind::AxisBox: {
            bool inside_all = true, disjoint = false;
            for (int i = 0; i < dim; ++i) {
                if (box.lo[i] < shape.box.lo[i] || box.hi[i] > shape.box.hi[i]) inside_all = false;
                if (box.hi[i] <= shape.box.lo[i] || box.lo[i] >= shape.box.hi[i]) disjoint = true;
            }
            if (disjoint) return uniform(State::Outside);
            if (inside_all) return uniform(State::Inside);
            Box inner = box;
            for (int i = 0; i < dim; ++i) {
                inner.lo[i] = std::max(inner.lo[i], shape.box.lo[i]);
                inner.hi[i] = std::min(inner.hi[i], shape.box.hi[i]);
            }
            ClipResult r;
            r.state = State::Mixed;
            r.exact = true;
            const Box kept = peel_outside(box, inner, dim, r.parts);
            r.parts.emplace_back(kept, true);
            return r;
        }
        case Shape::Kind::Complement:
            return flip(clip_box(shape.children[0], box, dim));
        case Shape::Kind::Intersection: {
            const ClipResult* single = nullptr;
            ClipResult stored;
            int mixed_count = 0;
            for (const Shape& c : shape.children) {
                ClipResult r = clip_box(c, box, dim);
                if (r.state == State::Outside) return uniform(State::Outside);
                if (r.state == State::Mixed) {
                    ++mixed_count;
                    stored = std::move(r);
                    single = &stored;
                }
            }
            if (mixed_count == 0) return uniform(State::Inside);
            if (mixed_count == 1) return *single;
            return mixed_generic();
        }
        case Shape::Kind::Union: {
            ClipResult stored;
            int mixed_count = 0;
            for (const Shape& c : shape.children) {
                ClipResult r = clip_box(c, box, dim);
                if (r.state == State::Inside) return uniform(State::Inside);
                if (r.state == State::Mixed) {
                    ++mixed_count;
                    stored = std::move(r);
                }
            }
            if (mixed_count == 0) return uniform(State::Outside);
            if (mixed_count == 1) return stored;
            return mixed_generic();
        }
        case Shape::Kind::Voxels:
            return clip_voxels(*shape.voxels, box, dim);
    }
    return mixed_generic();
}

namespace {

enum class TerminalState { Inside, Outside, MixedLeaf };

// Shared recursion behind classification, volume fractions and cut-cell
// quadrature: exact clip parts terminate immediately, generic mixed boxes
// bisect until the depth budget runs out.
template <typename Fn>
void refine_clip_impl(const ImplicitDomain& domain, const Box& box, int depth, Fn&& emit) {
    const ClipResult clip = clip_box(domain.shape, box, domain.dim);
    if (clip.state == ClipResult::State::Inside) {
        emit(box, TerminalState::Inside);
        return;
    }
    if (clip.state == ClipResult::State::Outside) {
        emit(box, TerminalState::Outside);
        return;
    }
    if (clip.exact) {
        for (const auto& [part, in] : clip.parts)
            emit(part, in ? TerminalState::Inside : TerminalState::Outside);
        return;
    }
    if (depth <= 0) {
        emit(box, TerminalState::MixedLeaf);
        return;
    }
    const Vec3 mid = box.center();
    const unsigned nchild = 1u << domain.dim;
    for (unsigned c = 0; c < nchild; ++c) {
        Box child = box;
        for (int i = 0; i < domain.dim; ++i) {
            if (c & (1u << i))
                child.lo[i] = mid[i];
            else
                child.hi[i] = mid[i];
        }
        refine_clip_impl(domain, child, depth - 1, emit);
    }
}

bool probe_mixed(const ImplicitDomain& domain, const Box& box, bool& any_in, bool& any_out) {
    const unsigned corners = 1u << domain.dim;
    for (unsigned c = 0; c < corners; ++c) {
        if (domain.inside(box.corner(domain.dim, c)))
            any_in = true;
        else
            any_out = true;
        if (any_in && any_out) return true;
    }
    if (domain.inside(box.center()))
        any_in = true;
    else
        any_out = true;
    return any_in && any_out;
}

}  // namespace

CutClassification classify_element(const ImplicitDomain& domain, const Box& bounds, int depth) {
    if (bounds.degenerate(domain.dim))
        throw std::invalid_argument("classify_element: degenerate bounds");
    if (depth < 0) throw std::invalid_argument("classify_element: negative depth");

    bool any_in = false, any_out = false;
    refine_clip_impl(domain, bounds, depth, [&](const Box& part, TerminalState s) {
        if (any_in && any_out) return;
        switch (s) {
            case TerminalState::Inside:
                any_in = true;
                break;
            case TerminalState::Outside:
                any_out = true;
                break;
            case TerminalState::MixedLeaf:
                probe_mixed(domain, part, any_in, any_out);
                break;
        }
    });
    if (any_in && any_out) return CutClassification::Cut;
    return any_in ? CutClassification::Inside : CutClassification::Outside;
}

double volume_fraction(const ImplicitDomain& domain, const Box& bounds, int depth) {
    if (depth < 0) throw std::invalid_argument("volume_fraction: negative depth");
    double inside_volume = 0.0;
    refine_clip_impl(domain, bounds, depth, [&](const Box& part, TerminalState s) {
        if (s == TerminalState::Inside)
            inside_volume += part.volume(domain.dim);
        else if (s == TerminalState::MixedLeaf && domain.inside(part.center()))
            inside_volume += part.volume(domain.dim);
    });
    return inside_volume / bounds.volume(domain.dim);
}

double QuadraturePartition::inside_volume() const {
    double v = 0.0;
    for (const auto& c : cells)
        if (c.inside) {
            double vol = 1.0;
            for (int i = 0; i < 3; ++i)
                if (c.bounds.hi[i] > c.bounds.lo[i]) vol *= c.bounds.extent(i);
            v += vol;
        }
    return v;
}

namespace {

void fill_tensor_gauss(QuadratureSubCell& cell, int dim, int order) {
    const GaussRule& rule = gauss_rule(order);
    int npoints = 1;
    for (int i = 0; i < dim; ++i) npoints *= order;
    cell.points.resize(npoints);
    cell.weights.resize(npoints);
    double jac = 1.0;
    for (int i = 0; i < dim; ++i) jac *= 0.5 * cell.bounds.extent(i);
    std::array<int, 3> idx{0, 0, 0};
    for (int k = 0; k < npoints; ++k) {
        Vec3 p{0.0, 0.0, 0.0};
        double w = jac;
        for (int i = 0; i < dim; ++i) {
            const double xi = rule.points[idx[i]];
            p[i] = cell.bounds.lo[i] + 0.5 * (xi + 1.0) * cell.bounds.extent(i);
            w *= rule.weights[idx[i]];
        }
        cell.points[k] = p;
        cell.weights[k] = w;
        for (int i = 0; i < dim; ++i) {
            if (++idx[i] < order) break;
            idx[i] = 0;
        }
    }
}

}  // namespace

QuadraturePartition quadrature_cells(const ImplicitDomain& domain, const Box& bounds,
                                     int tree_depth, int order) {
    if (order < 1) throw std::invalid_argument("quadrature_cells: order must be >= 1");
    QuadraturePartition partition;
    refine_clip_impl(domain, bounds, tree_depth, [&](const Box& part, TerminalState s) {
        QuadratureSubCell cell;
        cell.bounds = part;
        if (s == TerminalState::MixedLeaf) {
            cell.exact = false;
            cell.inside = domain.inside(part.center());
        } else {
            cell.exact = true;
            cell.inside = (s == TerminalState::Inside);
        }
        fill_tensor_gauss(cell, domain.dim, order);
        partition.cells.push_back(std::move(cell));
    });
    return partition;
}

std::vector<SurfacePoint> surface_quadrature(const SurfacePatch& patch, int order, int dim) {
    if (order < 1) throw std::invalid_argument("surface_quadrature: order must be >= 1");
    std::vector<SurfacePoint> out;
    const GaussRule& rule = gauss_rule(order);

    switch (patch.kind) {
        case SurfacePatch::Kind::Point: {
            if (dim != 1) throw std::runtime_error("surface_quadrature: point patch needs d=1");
            SurfacePoint sp;
            sp.point = {patch.pos, 0.0, 0.0};
            sp.weight = 1.0;
            sp.normal = {patch.normal_sign, 0.0, 0.0};
            out.push_back(sp);
            return out;
        }
        case SurfacePatch::Kind::AxisPlane: {
            std::vector<int> taxes;
            for (int i = 0; i < dim; ++i)
                if (i != patch.axis) taxes.push_back(i);
            Vec3 normal{0.0, 0.0, 0.0};
            normal[patch.axis] = patch.normal_sign;
            if (taxes.empty()) {  // d=1 plane degenerates to a point
                SurfacePoint sp;
                sp.point = {patch.pos, 0.0, 0.0};
                sp.weight = 1.0;
                sp.normal = normal;
                out.push_back(sp);
                return out;
            }
            const int nt = static_cast<int>(taxes.size());
            int npoints = 1;
            for (int i = 0; i < nt; ++i) npoints *= order;
            std::array<int, 2> idx{0, 0};
            for (int k = 0; k < npoints; ++k) {
                SurfacePoint sp;
                sp.point = {0.0, 0.0, 0.0};
                sp.point[patch.axis] = patch.pos;
                sp.normal = normal;
                sp.weight = 1.0;
                for (int i = 0; i < nt; ++i) {
                    const int a = taxes[i];
                    const double half = 0.5 * patch.bounds.extent(a);
                    sp.point[a] = patch.bounds.lo[a] + (rule.points[idx[i]] + 1.0) * half;
                    sp.weight *= rule.weights[idx[i]] * half;
                }
                out.push_back(sp);
                for (int i = 0; i < nt; ++i) {
                    if (++idx[i] < order) break;
                    idx[i] = 0;
                }
            }
            return out;
        }
        case SurfacePatch::Kind::Sphere: {
            if (dim == 2) {
                const double half = 0.5 * (patch.phi1 - patch.phi0);
                for (int i = 0; i < order; ++i) {
                    const double phi = patch.phi0 + (rule.points[i] + 1.0) * half;
                    SurfacePoint sp;
                    sp.normal = {patch.normal_sign * std::cos(phi),
                                 patch.normal_sign * std::sin(phi), 0.0};
                    sp.point = {patch.center[0] + patch.radius * std::cos(phi),
                                patch.center[1] + patch.radius * std::sin(phi), 0.0};
                    sp.weight = rule.weights[i] * half * patch.radius;
                    out.push_back(sp);
                }
                return out;
            }
            if (dim == 3) {
                const double half_t = 0.5 * (patch.theta1 - patch.theta0);
                const double half_p = 0.5 * (patch.phi1 - patch.phi0);
                for (int i = 0; i < order; ++i) {
                    const double theta = patch.theta0 + (rule.points[i] + 1.0) * half_t;
                    for (int j = 0; j < order; ++j) {
                        const double phi = patch.phi0 + (rule.points[j] + 1.0) * half_p;
                        const Vec3 dir{std::sin(theta) * std::cos(phi),
                                       std::sin(theta) * std::sin(phi), std::cos(theta)};
                        SurfacePoint sp;
                        sp.point = {patch.center[0] + patch.radius * dir[0],
                                    patch.center[1] + patch.radius * dir[1],
                                    patch.center[2] + patch.radius * dir[2]};
                        sp.normal = {patch.normal_sign * dir[0], patch.normal_sign * dir[1],
                                     patch.normal_sign * dir[2]};
                        sp.weight = rule.weights[i] * rule.weights[j] * half_t * half_p *
                                    patch.radius * patch.radius * std::sin(theta);
                        out.push_back(sp);
                    }
                }
                return out;
            }
            throw std::runtime_error("surface_quadrature: sphere patch needs d=2 or d=3");
        }
    }
    throw std::runtime_error("surface_quadrature: unsupported patch kind");
}

RegionPredicate region_none() {
    return [](const Box&) { return false; };
}

RegionPredicate region_point(const Vec3& p, int dim) {
    return [p, dim](const Box& b) {
        for (int i = 0; i < dim; ++i)
            if (p[i] < b.lo[i] || p[i] > b.hi[i]) return false;
        return true;
    };
}

RegionPredicate region_box(const Box& r, int dim) {
    return [r, dim](const Box& b) {
        for (int i = 0; i < dim; ++i)
            if (b.hi[i] < r.lo[i] || b.lo[i] > r.hi[i]) return false;
        return true;
    };
}

RegionPredicate region_sphere_shell(const Vec3& center, double radius, int dim) {
    return [center, radius, dim](const Box& b) {
        const double r2 = radius * radius;
        return min_dist_sq(center, b, dim) <= r2 && max_dist_sq(center, b, dim) >= r2;
    };
}

Shape make_pore_body(const Box& box, std::uint64_t seed, int pore_count, double rmin,
                     double rmax) {
    // splitmix64 stream; deterministic across platforms
    auto next = [&seed]() {
        seed += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = seed;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    };
    auto uniform01 = [&]() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    };
    std::vector<Shape> pores;
    for (int k = 0; k < pore_count; ++k) {
        Vec3 c{0.0, 0.0, 0.0};
        for (int i = 0; i < 3; ++i) c[i] = box.lo[i] + uniform01() * box.extent(i);
        const double r = rmin + uniform01() * (rmax - rmin);
        pores.push_back(Shape::ball(c, r));
    }
    return Shape::intersection(
        {Shape::axis_box(box), Shape::complement(Shape::union_of(std::move(pores)))});
}

std::shared_ptr<VoxelGrid> rasterize(const Shape& shape, const Box& box, int dim,
                                     const std::array<std::int64_t, 3>& dims) {
    auto grid = std::make_shared<VoxelGrid>();
    grid->dims = dims;
    grid->box = box;
    for (int i = dim; i < 3; ++i) grid->dims[i] = 1;
    grid->occupancy.assign(grid->dims[0] * grid->dims[1] * grid->dims[2], 0);
    for (std::int64_t iz = 0; iz < grid->dims[2]; ++iz)
        for (std::int64_t iy = 0; iy < grid->dims[1]; ++iy)
            for (std::int64_t ix = 0; ix < grid->dims[0]; ++ix) {
                Vec3 p{0.0, 0.0, 0.0};
                const std::array<std::int64_t, 3> idx{ix, iy, iz};
                for (int i = 0; i < dim; ++i)
                    p[i] = box.lo[i] +
                           (static_cast<double>(idx[i]) + 0.5) * box.extent(i) /
                               static_cast<double>(grid->dims[i]);
                grid->occupancy[(iz * grid->dims[1] + iy) * grid->dims[0] + ix] =
                    shape.inside(p, dim) ? 1 : 0;
            }
    return grid;
}

}  // namespace fcs
