#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fcs/geometry.hpp"
#include "oracles.hpp"

using namespace fcs;

namespace {

ImplicitDomain domain_of(Shape shape, int dim) {
    ImplicitDomain d;
    d.dim = dim;
    d.shape = std::move(shape);
    return d;
}

Box unit_square() { return Box{{0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}}; }

}  // namespace

TEST_CASE("classification of trivial domains") {
    const Box box = unit_square();
    CHECK(classify_element(domain_of(Shape::all(), 2), box, 2) == CutClassification::Inside);
    CHECK(classify_element(domain_of(Shape::empty(), 2), box, 2) == CutClassification::Outside);
    CHECK(classify_element(domain_of(Shape::half_space(0, 0.5, true), 2), box, 2) ==
          CutClassification::Cut);
}

TEST_CASE("degenerate bounds are rejected") {
    const Box bad{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    CHECK_THROWS(classify_element(domain_of(Shape::all(), 2), bad, 1));
}

TEST_CASE("volume fractions of analytic cuts") {
    const Box box = unit_square();
    CHECK(volume_fraction(domain_of(Shape::all(), 2), box, 3) == 1.0);
    CHECK(volume_fraction(domain_of(Shape::half_space(0, 0.5, true), 2), box, 3) == 0.5);
    // non-dyadic positions stay exact through the clip path
    CHECK(volume_fraction(domain_of(Shape::half_space(0, 0.3, true), 2), box, 3) ==
          doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("disc volume fraction approaches pi/4") {
    const auto domain = domain_of(Shape::ball({0.5, 0.5, 0.0}, 0.5), 2);
    const double eta = volume_fraction(domain, unit_square(), 8);
    CHECK(std::abs(eta - M_PI / 4.0) < 2e-3);

    const double pixel = oracles::pixel_area(
        [](double x, double y) {
            return (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5) < 0.25;
        },
        0.0, 0.0, 1.0, 1.0, 2000);
    CHECK(std::abs(eta - pixel) < 2e-3);
}

TEST_CASE("volume fraction refines monotonically in depth") {
    const auto domain = domain_of(Shape::ball({0.5, 0.5, 0.0}, 0.37), 2);
    const Box box = unit_square();
    const double e2 = std::abs(volume_fraction(domain, box, 2) - volume_fraction(domain, box, 8));
    const double e4 = std::abs(volume_fraction(domain, box, 4) - volume_fraction(domain, box, 8));
    const double e6 = std::abs(volume_fraction(domain, box, 6) - volume_fraction(domain, box, 8));
    CHECK(e4 <= e2);
    CHECK(e6 <= e4);
}

TEST_CASE("classification pins the volume fraction at both ends") {
    const auto domain = domain_of(Shape::ball({0.4, 0.6, 0.0}, 0.25), 2);
    oracles::Rng rng(7);
    for (int k = 0; k < 40; ++k) {
        Box box;
        box.lo = {rng.uniform(0.0, 0.8), rng.uniform(0.0, 0.8), 0.0};
        box.hi = {box.lo[0] + rng.uniform(0.05, 0.2), box.lo[1] + rng.uniform(0.05, 0.2), 0.0};
        const auto cls = classify_element(domain, box, 3);
        const double eta = volume_fraction(domain, box, 3);
        if (cls == CutClassification::Inside) CHECK(eta == 1.0);
        if (cls == CutClassification::Outside) CHECK(eta == 0.0);
    }
}

TEST_CASE("quadrature partition of an interior element") {
    const auto domain = domain_of(Shape::all(), 2);
    const auto partition = quadrature_cells(domain, unit_square(), 3, 2);
    CHECK(partition.cells.size() == 1);
    CHECK(partition.cells[0].exact);
    CHECK(partition.cells[0].inside);
    double wsum = 0.0;
    for (double w : partition.cells[0].weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("cut element at depth zero becomes a single mixed cell") {
    const auto domain = domain_of(Shape::ball({0.5, 0.5, 0.0}, 0.4), 2);
    const auto partition = quadrature_cells(domain, unit_square(), 0, 2);
    CHECK(partition.cells.size() == 1);
    CHECK_FALSE(partition.cells[0].exact);
}

TEST_CASE("axis-aligned cuts integrate exactly") {
    // dyadic position, octree resolves it
    const auto dyadic = domain_of(Shape::half_space(0, 0.5, true), 2);
    CHECK(quadrature_cells(dyadic, unit_square(), 2, 2).inside_volume() == 0.5);
    // non-dyadic position, the exact split resolves it
    const auto sliver = domain_of(Shape::half_space(0, 1e-6, true), 2);
    CHECK(quadrature_cells(sliver, unit_square(), 2, 2).inside_volume() ==
          doctest::Approx(1e-6).epsilon(1e-12));
}

TEST_CASE("quadrature inside volume equals the volume fraction") {
    // shared recursion: the two bookkeeping paths agree exactly
    const auto domain = domain_of(Shape::ball({0.45, 0.55, 0.0}, 0.3), 2);
    for (int depth : {0, 1, 2, 3}) {
        const double vf = volume_fraction(domain, unit_square(), depth);
        const double qv = quadrature_cells(domain, unit_square(), depth, 2).inside_volume();
        CHECK(qv == vf);
    }
}

TEST_CASE("sub-cell volumes tile the element") {
    const auto domain = domain_of(Shape::ball({0.5, 0.5, 0.0}, 0.31), 2);
    const auto partition = quadrature_cells(domain, unit_square(), 3, 2);
    double total = 0.0;
    for (const auto& cell : partition.cells) {
        for (double w : cell.weights) CHECK(w > 0.0);
        total += cell.bounds.volume(2);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("plane patch weights sum to the patch measure") {
    SurfacePatch patch;
    patch.kind = SurfacePatch::Kind::AxisPlane;
    patch.axis = 0;
    patch.pos = 0.0;
    patch.bounds = Box{{0.0, 0.0, 0.0}, {0.0, 1.0, 1.0}};
    patch.normal_sign = -1.0;

    const auto points = surface_quadrature(patch, 2, 3);
    CHECK(points.size() == 4);
    double wsum = 0.0;
    for (const auto& sp : points) {
        wsum += sp.weight;
        CHECK(std::abs(sp.normal[0] + 1.0) < 1e-15);
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));

    patch.bounds.hi = {0.0, 2.0, 2.0};
    double wsum2 = 0.0;
    for (const auto& sp : surface_quadrature(patch, 2, 3)) wsum2 += sp.weight;
    CHECK(wsum2 == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("full sphere patch recovers the sphere area") {
    SurfacePatch patch;
    patch.kind = SurfacePatch::Kind::Sphere;
    patch.center = {0.3, 0.4, 0.5};
    patch.radius = 0.17;
    patch.theta0 = 0.0;
    patch.theta1 = M_PI;
    patch.phi0 = 0.0;
    patch.phi1 = 2.0 * M_PI;

    const auto points = surface_quadrature(patch, 16, 3);
    double wsum = 0.0;
    for (const auto& sp : points) {
        wsum += sp.weight;
        const double len = std::sqrt(sp.normal[0] * sp.normal[0] +
                                     sp.normal[1] * sp.normal[1] +
                                     sp.normal[2] * sp.normal[2]);
        CHECK(len == doctest::Approx(1.0).epsilon(1e-12));
    }
    const double area = 4.0 * M_PI * patch.radius * patch.radius;
    CHECK(wsum == doctest::Approx(area).epsilon(1e-10));
}

TEST_CASE("full circle patch recovers the circumference") {
    SurfacePatch patch;
    patch.kind = SurfacePatch::Kind::Sphere;
    patch.center = {0.5, 0.5, 0.0};
    patch.radius = 0.2;
    patch.phi0 = 0.0;
    patch.phi1 = 2.0 * M_PI;
    double wsum = 0.0;
    for (const auto& sp : surface_quadrature(patch, 20, 2)) wsum += sp.weight;
    CHECK(wsum == doctest::Approx(2.0 * M_PI * 0.2).epsilon(1e-12));
}

TEST_CASE("unsupported patch configurations throw") {
    SurfacePatch patch;
    patch.kind = SurfacePatch::Kind::Sphere;
    CHECK_THROWS(surface_quadrature(patch, 2, 1));  // sphere patch in 1d
    SurfacePatch point;
    point.kind = SurfacePatch::Kind::Point;
    CHECK_THROWS(surface_quadrature(point, 1, 3));  // point patch needs d=1
}

TEST_CASE("boolean shapes classify correctly") {
    // square with a corner notch: box minus ball at the corner
    const Shape shape = Shape::intersection(
        {Shape::axis_box(Box{{0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}}),
         Shape::complement(Shape::ball({1.0, 1.0, 0.0}, 0.3))});
    const auto domain = domain_of(shape, 2);
    CHECK(domain.inside({0.5, 0.5, 0.0}));
    CHECK_FALSE(domain.inside({0.95, 0.95, 0.0}));
    CHECK_FALSE(domain.inside({1.1, 0.5, 0.0}));
    CHECK(classify_element(domain, Box{{0.7, 0.7, 0.0}, {1.0, 1.0, 0.0}}, 3) ==
          CutClassification::Cut);
}

TEST_CASE("pore bodies are deterministic in the seed") {
    const Box box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
    const Shape a = make_pore_body(box, 99, 6, 0.05, 0.12);
    const Shape b = make_pore_body(box, 99, 6, 0.05, 0.12);
    const Shape c = make_pore_body(box, 100, 6, 0.05, 0.12);
    oracles::Rng rng(3);
    int diff = 0;
    for (int k = 0; k < 500; ++k) {
        const Vec3 p{rng.uniform(), rng.uniform(), rng.uniform()};
        CHECK(a.inside(p, 3) == b.inside(p, 3));
        if (a.inside(p, 3) != c.inside(p, 3)) ++diff;
    }
    CHECK(diff > 0);  // different seeds give a different body
}

TEST_CASE("voxel grids act as predicates and clip uniformly") {
    const Shape disc = Shape::ball({0.5, 0.5, 0.0}, 0.35);
    const auto grid = rasterize(disc, unit_square(), 2, {64, 64, 1});
    const Shape vox = Shape::voxel_grid(grid);
    CHECK(vox.inside({0.5, 0.5, 0.0}, 2));
    CHECK_FALSE(vox.inside({0.05, 0.05, 0.0}, 2));

    const auto domain = domain_of(vox, 2);
    const double eta = volume_fraction(domain, unit_square(), 7);
    CHECK(std::abs(eta - M_PI * 0.35 * 0.35) < 5e-3);
}

TEST_CASE("region predicates select the expected boxes") {
    const auto shell = region_sphere_shell({0.5, 0.5, 0.0}, 0.25, 2);
    CHECK(shell(Box{{0.6, 0.4, 0.0}, {0.8, 0.6, 0.0}}));        // straddles the circle
    CHECK_FALSE(shell(Box{{0.45, 0.45, 0.0}, {0.55, 0.55, 0.0}}));  // strictly inside
    CHECK_FALSE(shell(Box{{0.9, 0.9, 0.0}, {1.0, 1.0, 0.0}}));      // strictly outside

    const auto point = region_point({1.0, 0.0, 0.0}, 1);
    CHECK(point(Box{{0.5, 0.0, 0.0}, {1.0, 0.0, 0.0}}));
    CHECK_FALSE(point(Box{{0.0, 0.0, 0.0}, {0.5, 0.0, 0.0}}));
}
