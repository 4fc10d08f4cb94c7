#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "fcs/assembly.hpp"
#include "fcs/krylov.hpp"
#include "fcs/mesh.hpp"
#include "oracles.hpp"

using namespace fcs;

namespace {

ImplicitDomain everything(int dim) {
    ImplicitDomain d;
    d.dim = dim;
    return d;
}

MlhpMesh classified(MlhpMesh mesh, int dim) {
    mesh.classify(everything(dim), 2);
    return mesh;
}

// base [0,1] split in two, left element refined twice toward its left part;
// produces leaves at levels 2, 2, 1, 0 (regions stop short of the neighbor
// since closed-box contact counts as intersecting)
MlhpMesh fig3_style_mesh() {
    MlhpMesh mesh = build_base_mesh(Box{{0, 0, 0}, {1, 0, 0}}, {2, 1, 1}, 1);
    mesh.refine_toward(region_box(Box{{0.0, 0, 0}, {0.49, 0, 0}}, 1), 1);
    mesh.refine_toward(region_box(Box{{0.0, 0, 0}, {0.24, 0, 0}}, 1), 2);
    return classified(std::move(mesh), 1);
}

}  // namespace

TEST_CASE("base meshes enumerate uniform leaves") {
    const MlhpMesh m1 = build_base_mesh(Box{{0, 0, 0}, {1, 0, 0}}, {4, 1, 1}, 1);
    CHECK(m1.leaf_count() == 4);
    for (int leaf = 0; leaf < 4; ++leaf) {
        const Box b = m1.element_bounds(m1.leaf_element(leaf));
        CHECK(b.extent(0) == doctest::Approx(0.25).epsilon(1e-15));
    }

    const MlhpMesh m2 = build_base_mesh(Box{{0, 0, 0}, {1, 1, 0}}, {2, 3, 1}, 2);
    CHECK(m2.leaf_count() == 6);

    const MlhpMesh m3 = build_base_mesh(Box{{0, 0, 0}, {1, 1, 1}}, {8, 8, 8}, 3);
    CHECK(m3.leaf_count() == 512);
}

TEST_CASE("degenerate base meshes are rejected") {
    CHECK_THROWS(build_base_mesh(Box{{0, 0, 0}, {1, 1, 0}}, {0, 2, 1}, 2));
    CHECK_THROWS(build_base_mesh(Box{{0, 0, 0}, {0, 1, 0}}, {2, 2, 1}, 2));
}

TEST_CASE("refinement without a region or depth changes nothing") {
    MlhpMesh mesh = build_base_mesh(Box{{0, 0, 0}, {1, 1, 0}}, {2, 2, 1}, 2);
    mesh.refine_toward(region_none(), 3);
    CHECK(mesh.leaf_count() == 4);
    mesh.refine_toward(region_box(Box{{0, 0, 0}, {1, 1, 0}}, 2), 0);
    CHECK(mesh.leaf_count() == 4);
}

TEST_CASE("refining toward the right endpoint produces a chain") {
    // bisecting intersecting elements until level k gives the leaves
    // [0,.5], [.5,.75], [.75,.875], [.875,1]
    MlhpMesh mesh = build_base_mesh(Box{{0, 0, 0}, {1, 0, 0}}, {2, 1, 1}, 1);
    mesh.refine_toward(region_point({1.0, 0, 0}, 1), 2);
    CHECK(mesh.leaf_count() == 4);
    int deepest = 0;
    for (int leaf = 0; leaf < static_cast<int>(mesh.leaf_count()); ++leaf)
        deepest = std::max(deepest, mesh.element(mesh.leaf_element(leaf)).level);
    CHECK(deepest == 2);
    const int at_end = mesh.leaf_of_point({0.99, 0, 0});
    CHECK(mesh.element(at_end).level == 2);
}

TEST_CASE("leaf volumes tile the domain exactly") {
    MlhpMesh mesh = build_base_mesh(Box{{0, 0, 0}, {2, 1, 0}}, {3, 2, 1}, 2);
    mesh.refine_toward(region_box(Box{{0, 0, 0}, {0.7, 0.6, 0}}, 2), 3);
    // integer weights at the finest level sum to the full grid
    std::int64_t total = 0;
    const int max_level = mesh.max_level();
    for (int leaf = 0; leaf < static_cast<int>(mesh.leaf_count()); ++leaf) {
        const Element& e = mesh.element(mesh.leaf_element(leaf));
        total += std::int64_t{1} << (2 * (max_level - e.level));
    }
    CHECK(total == 3 * 2 * (std::int64_t{1} << (2 * max_level)));
}

TEST_CASE("dof counts for small configurations") {
    {  // 1d single element, p=3: two hats + two internal modes
        const MlhpMesh mesh =
            classified(build_base_mesh(Box{{0, 0, 0}, {1, 0, 0}}, {1, 1, 1}, 1), 1);
        CHECK(enumerate_dofs(mesh, 3, 1).size() == 4);
    }
    {  // 1d, two linear elements share the middle hat
        const MlhpMesh mesh =
            classified(build_base_mesh(Box{{0, 0, 0}, {1, 0, 0}}, {2, 1, 1}, 1), 1);
        CHECK(enumerate_dofs(mesh, 1, 1).size() == 3);
    }
    {  // 2d uniform: (2n+1)^2 scalar dofs at p=2
        const MlhpMesh mesh =
            classified(build_base_mesh(Box{{0, 0, 0}, {1, 1, 0}}, {4, 4, 1}, 2), 2);
        CHECK(enumerate_dofs(mesh, 2, 1).size() == 81);
        CHECK(enumerate_dofs(mesh, 2, 2).size() == 162);
    }
}

TEST_CASE("uniform leaf supports have (p+1)^d entries") {
    const MlhpMesh mesh =
        classified(build_base_mesh(Box{{0, 0, 0}, {1, 1, 0}}, {3, 3, 1}, 2), 2);
    for (int p : {1, 2, 3}) {
        const DofMap dofs = enumerate_dofs(mesh, p, 1);
        const auto sups = leaf_supports(mesh, dofs);
        for (const LeafSupport& s : sups)
            CHECK(static_cast<int>(s.entries.size()) == (p + 1) * (p + 1));
    }
}

TEST_CASE("a coarse hat shows up in every covered leaf support") {
    MlhpMesh mesh = build_base_mesh(Box{{0, 0, 0}, {1, 0, 0}}, {2, 1, 1}, 1);
    mesh.refine_toward(region_box(Box{{0, 0, 0}, {0.49, 0, 0}}, 1), 3);
    mesh.classify(everything(1), 1);
    const DofMap dofs = enumerate_dofs(mesh, 2, 1);
    const auto sups = leaf_supports(mesh, dofs);

    // level-0 hat at x = 0.5: coord 1, supported on both base elements
    ComponentKey key;
    key.level = 0;
    key.mask = 0;
    key.coord = {1, 0, 0};
    const ComponentRecord* rec = dofs.find(key);
    REQUIRE(rec != nullptr);
    for (int leaf = 0; leaf < static_cast<int>(mesh.leaf_count()); ++leaf) {
        bool found = false;
        for (const SupportEntry& e : sups[leaf].entries)
            found |= (e.scalar == rec->first_scalar);
        CHECK(found);  // the hat spans [0,1], every leaf sees it
    }
}

TEST_CASE("fig-3 style supports carry multiply-defined hats") {
    const MlhpMesh mesh = fig3_style_mesh();
    REQUIRE(mesh.leaf_count() == 4);
    const DofMap dofs = enumerate_dofs(mesh, 3, 1);
    const auto sups = leaf_supports(mesh, dofs);

    // the level-1 leaf [.25,.5]: hats from levels 0 and 1 plus two internal
    const int leaf = mesh.leaf_ordinal(mesh.leaf_of_point({0.3, 0, 0}));
    std::set<int> hat_levels;
    int hats = 0, internal = 0;
    for (const SupportEntry& e : sups[leaf].entries) {
        if (e.mask == 0) {
            ++hats;
            hat_levels.insert(e.level);
        } else {
            ++internal;
        }
    }
    CHECK(hats == 3);  // more than p+1 total functions, hats multiply defined
    CHECK(internal == 2);
    CHECK(static_cast<int>(sups[leaf].entries.size()) > 4);
    CHECK(hat_levels == std::set<int>{0, 1});

    // the deep leaf [.125,.25]: linear functions from levels 0, 1 and 2
    const int deep = mesh.leaf_ordinal(mesh.leaf_of_point({0.2, 0, 0}));
    std::set<int> deep_levels;
    for (const SupportEntry& e : sups[deep].entries)
        if (e.mask == 0) deep_levels.insert(e.level);
    CHECK(deep_levels == std::set<int>{0, 1, 2});
}

TEST_CASE("overlay-boundary components are deactivated") {
    const MlhpMesh mesh = fig3_style_mesh();
    const DofMap dofs = enumerate_dofs(mesh, 2, 1);
    // level-1 vertex at x = 0.5 sits on the overlay boundary: inactive
    ComponentKey key;
    key.level = 1;
    key.mask = 0;
    key.coord = {2, 0, 0};
    CHECK(dofs.find(key) == nullptr);
    // level-1 vertex at x = 0.25 is interior: active
    key.coord = {1, 0, 0};
    CHECK(dofs.find(key) != nullptr);
}

TEST_CASE("C0 continuity across hanging interfaces") {
    MlhpMesh mesh = build_base_mesh(Box{{0, 0, 0}, {1, 1, 0}}, {2, 2, 1}, 2);
    mesh.refine_toward(region_box(Box{{0, 0, 0}, {0.5, 0.5, 0}}, 2), 2);
    mesh.refine_toward(region_box(Box{{0, 0, 0}, {0.25, 0.25, 0}}, 2), 3);
    mesh.classify(everything(2), 2);
    const DofMap dofs = enumerate_dofs(mesh, 3, 1);
    const auto sups = leaf_supports(mesh, dofs);

    oracles::Rng rng(11);
    std::vector<double> coeffs(dofs.size());
    for (double& c : coeffs) c = rng.uniform(-1.0, 1.0);

    int checked = 0;
    while (checked < 200) {
        // random interior point on a random leaf face
        const Vec3 probe{rng.uniform(), rng.uniform(), 0.0};
        const int elem = mesh.leaf_of_point(probe);
        const Box b = mesh.element_bounds(elem);
        const int axis = rng.uniform_int(0, 1);
        const bool high = rng.uniform() < 0.5;
        const double face = high ? b.hi[axis] : b.lo[axis];
        if (face <= 0.0 || face >= 1.0) continue;

        Vec3 x = probe;
        x[axis] = face;
        Vec3 inward = x, outward = x;
        inward[axis] = face - 1e-12;
        outward[axis] = face + 1e-12;
        const int left = mesh.leaf_ordinal(mesh.leaf_of_point(inward));
        const int right = mesh.leaf_ordinal(mesh.leaf_of_point(outward));
        if (left == right) continue;

        BasisEval ev_left, ev_right;
        evaluate_support(sups[left], 2, x, false, ev_left);
        evaluate_support(sups[right], 2, x, false, ev_right);
        double ul = 0.0, ur = 0.0;
        for (std::size_t k = 0; k < sups[left].entries.size(); ++k)
            ul += coeffs[sups[left].entries[k].scalar] * ev_left.values[k];
        for (std::size_t k = 0; k < sups[right].entries.size(); ++k)
            ur += coeffs[sups[right].entries[k].scalar] * ev_right.values[k];
        CHECK(std::abs(ul - ur) < 1e-12);
        ++checked;
    }
}

TEST_CASE("mass matrix of the active basis is SPD") {
    MlhpMesh mesh = build_base_mesh(Box{{0, 0, 0}, {1, 1, 0}}, {2, 2, 1}, 2);
    mesh.refine_toward(region_box(Box{{0.5, 0.5, 0}, {1.0, 1.0, 0}}, 2), 2);
    mesh.classify(everything(2), 2);
    const DofMap dofs = enumerate_dofs(mesh, 2, 1);
    const auto sups = leaf_supports(mesh, dofs);
    QuadratureSettings quad;
    const SparseMatrix mass = assemble_mass(mesh, dofs, sups, everything(2), quad);

    const auto eig = jacobi_eigen(mass.to_dense(), false, JacobiMode::Relative);
    CHECK(eig.values.front() > 0.0);
    CHECK(eig.values.front() > 1e-12 * eig.values.back());
}

TEST_CASE("global projection reproduces polynomials") {
    MlhpMesh mesh = build_base_mesh(Box{{0, 0, 0}, {1, 1, 0}}, {2, 2, 1}, 2);
    mesh.refine_toward(region_box(Box{{0, 0.5, 0}, {0.5, 1.0, 0}}, 2), 2);
    mesh.classify(everything(2), 2);
    const int p = 2;
    const DofMap dofs = enumerate_dofs(mesh, p, 1);
    const auto sups = leaf_supports(mesh, dofs);
    QuadratureSettings quad;
    const SparseMatrix mass = assemble_mass(mesh, dofs, sups, everything(2), quad);
    const ImplicitDomain domain = everything(2);

    for (const auto [dx, dy] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 2}}) {
        auto monomial = [dx = dx, dy = dy](const Vec3& x) {
            return std::pow(x[0], dx) * std::pow(x[1], dy);
        };
        // rhs_i = integral m phi_i
        std::vector<double> rhs(dofs.size(), 0.0);
        BasisEval eval;
        for (int leaf = 0; leaf < static_cast<int>(mesh.leaf_count()); ++leaf) {
            const auto part = quadrature_cells(
                domain, mesh.element_bounds(mesh.leaf_element(leaf)), 0, p + 2);
            for (const auto& cell : part.cells)
                for (std::size_t q = 0; q < cell.points.size(); ++q) {
                    evaluate_support(sups[leaf], 2, cell.points[q], false, eval);
                    const double m = monomial(cell.points[q]);
                    for (std::size_t k = 0; k < sups[leaf].entries.size(); ++k)
                        rhs[sups[leaf].entries[k].scalar] +=
                            cell.weights[q] * m * eval.values[k];
                }
        }
        const std::vector<double> coeff = reference_solve(mass, rhs);
        // || Pi m - m ||^2 evaluated pointwise to avoid cancellation
        double residual2 = 0.0;
        for (int leaf = 0; leaf < static_cast<int>(mesh.leaf_count()); ++leaf) {
            const auto part = quadrature_cells(
                domain, mesh.element_bounds(mesh.leaf_element(leaf)), 0, p + 2);
            for (const auto& cell : part.cells)
                for (std::size_t q = 0; q < cell.points.size(); ++q) {
                    evaluate_support(sups[leaf], 2, cell.points[q], false, eval);
                    double fit = -monomial(cell.points[q]);
                    for (std::size_t k = 0; k < sups[leaf].entries.size(); ++k)
                        fit += coeff[sups[leaf].entries[k].scalar] * eval.values[k];
                    residual2 += cell.weights[q] * fit * fit;
                }
        }
        CHECK(std::sqrt(residual2) < 1e-9);
    }
}

TEST_CASE("outside elements carry no dofs") {
    // physical region x < 0.5 on a 4-element row: the two right elements are
    // outside, their exclusive functions vanish from the map
    MlhpMesh mesh = build_base_mesh(Box{{0, 0, 0}, {1, 0, 0}}, {4, 1, 1}, 1);
    ImplicitDomain half;
    half.dim = 1;
    half.shape = Shape::half_space(0, 0.5, true);
    mesh.classify(half, 3);
    const DofMap with_removal = enumerate_dofs(mesh, 2, 1, true);
    const DofMap keep_all = enumerate_dofs(mesh, 2, 1, false);
    CHECK(keep_all.size() == 9);
    // hats at 0.75 and 1.0 and the two right internal modes disappear; the
    // hat at 0.5 survives through its left support
    CHECK(with_removal.size() == 5);
    ComponentKey key;
    key.level = 0;
    key.mask = 0;
    key.coord = {2, 0, 0};
    CHECK(with_removal.find(key) != nullptr);
    key.coord = {3, 0, 0};
    CHECK(with_removal.find(key) == nullptr);
}

TEST_CASE("solution evaluation matches nodal interpolation") {
    const MlhpMesh mesh =
        classified(build_base_mesh(Box{{0, 0, 0}, {1, 1, 0}}, {2, 2, 1}, 2), 2);
    const DofMap dofs = enumerate_dofs(mesh, 1, 1);
    const auto sups = leaf_supports(mesh, dofs);
    // set u = x + 2y through the vertex hats
    std::vector<double> coeffs(dofs.size(), 0.0);
    for (const auto& [key, rec] : dofs.components()) {
        const double x = 0.5 * key.coord[0];
        const double y = 0.5 * key.coord[1];
        coeffs[rec.first_scalar] = x + 2.0 * y;
    }
    const auto u = evaluate_solution(mesh, dofs, sups, coeffs, {0.3, 0.7, 0.0});
    CHECK(u[0] == doctest::Approx(0.3 + 1.4).epsilon(1e-13));
}
