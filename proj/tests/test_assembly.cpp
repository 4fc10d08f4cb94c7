#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

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

struct Setup {
    MlhpMesh mesh;
    DofMap dofs;
    std::vector<LeafSupport> sups;
};

Setup make_setup(const Box& box, std::array<std::int64_t, 3> counts, int dim, int p,
                 const ImplicitDomain& domain, int n_fields = 1, bool remove_outside = true) {
    Setup s;
    s.mesh = build_base_mesh(box, counts, dim);
    s.mesh.classify(domain, 3);
    s.dofs = enumerate_dofs(s.mesh, p, n_fields, remove_outside);
    s.sups = leaf_supports(s.mesh, s.dofs);
    return s;
}

}  // namespace

TEST_CASE("1d linear element gives the textbook stiffness") {
    const double h = 0.4;
    const ImplicitDomain domain = everything(1);
    Setup s = make_setup(Box{{0, 0, 0}, {h, 0, 0}}, {1, 1, 1}, 1, 1, domain);
    ModelProblem model;
    QuadratureSettings quad;
    const LinearSystem sys = assemble(s.mesh, s.dofs, s.sups, domain, model, quad);

    CHECK(sys.a.at(0, 0) == doctest::Approx(1.0 / h).epsilon(1e-14));
    CHECK(sys.a.at(0, 1) == doctest::Approx(-1.0 / h).epsilon(1e-14));
    CHECK(sys.a.at(1, 0) == doctest::Approx(-1.0 / h).epsilon(1e-14));
    CHECK(sys.a.at(1, 1) == doctest::Approx(1.0 / h).epsilon(1e-14));
}

TEST_CASE("assembled matrices are symmetric") {
    ImplicitDomain domain = everything(2);
    domain.dim = 2;
    domain.shape = Shape::complement(Shape::ball({0.55, 0.52, 0.0}, 0.23));
    domain.alpha_fict = 1e-6;
    DirichletSurface bc;
    bc.patch.kind = SurfacePatch::Kind::AxisPlane;
    bc.patch.axis = 0;
    bc.patch.pos = 0.0;
    bc.patch.bounds = Box{{0, 0, 0}, {0, 1, 0}};
    bc.patch.normal_sign = -1.0;
    bc.beta = 1e8;
    domain.dirichlet.push_back(bc);

    Setup s = make_setup(Box{{0, 0, 0}, {1, 1, 0}}, {4, 4, 1}, 2, 2, domain, 2);
    ModelProblem model;
    model.kind = ModelProblem::Kind::LinearElasticity;
    model.youngs_modulus = 70.0;
    model.poisson_ratio = 0.3;
    model.body_load = {0.0, -1.0, 0.0};
    QuadratureSettings quad;
    const LinearSystem sys = assemble(s.mesh, s.dofs, s.sups, domain, model, quad);

    double max_asym = 0.0;
    const auto rp = sys.a.row_ptr();
    const auto cols = sys.a.cols();
    const auto vals = sys.a.values();
    for (std::size_t i = 0; i < sys.a.size(); ++i)
        for (std::int64_t k = rp[i]; k < rp[i + 1]; ++k)
            max_asym = std::max(
                max_asym, std::abs(vals[k] - sys.a.at(cols[k], static_cast<int>(i))));
    CHECK(max_asym < 1e-12 * sys.a.max_abs());
}

TEST_CASE("penalty solve reproduces a linear manufactured solution") {
    // u = x + y is harmonic; enforce it on all four edges with beta = 1e10
    ImplicitDomain domain = everything(2);
    const double beta = 1e10;
    for (int axis = 0; axis < 2; ++axis) {
        for (int side = 0; side < 2; ++side) {
            DirichletSurface bc;
            bc.patch.kind = SurfacePatch::Kind::AxisPlane;
            bc.patch.axis = axis;
            bc.patch.pos = side;
            bc.patch.bounds = Box{{0, 0, 0}, {1, 1, 0}};
            bc.patch.bounds.lo[axis] = bc.patch.pos;
            bc.patch.bounds.hi[axis] = bc.patch.pos;
            bc.patch.normal_sign = side == 0 ? -1.0 : 1.0;
            bc.beta = beta;
            domain.dirichlet.push_back(bc);
        }
    }
    // value g = x + y sampled through a manufactured load on b: the penalty
    // data enters through the constant part; supply g via the load functor
    Setup s = make_setup(Box{{0, 0, 0}, {1, 1, 0}}, {2, 2, 1}, 2, 1, domain);
    ModelProblem model;
    QuadratureSettings quad;

    // penalty data g is per-surface constant in the config; build the rhs by
    // hand instead: assemble with homogeneous penalty, then add the g terms
    LinearSystem sys = assemble(s.mesh, s.dofs, s.sups, domain, model, quad);
    BasisEval eval;
    for (const DirichletSurface& bc : domain.dirichlet) {
        for (const SurfacePoint& sp : mesh_aligned_surface_points(s.mesh, bc.patch, 2)) {
            const int leaf = s.mesh.leaf_ordinal(s.mesh.leaf_of_point(sp.point));
            evaluate_support(s.sups[leaf], 2, sp.point, false, eval);
            const double g = sp.point[0] + sp.point[1];
            for (std::size_t k = 0; k < s.sups[leaf].entries.size(); ++k)
                sys.b[s.sups[leaf].entries[k].scalar] +=
                    bc.beta * sp.weight * eval.values[k] * g;
        }
    }
    const std::vector<double> x = reference_solve(sys.a, sys.b);

    // vertex coefficients are nodal values for p = 1
    for (const auto& [key, rec] : s.dofs.components()) {
        const double expected = 0.5 * key.coord[0] + 0.5 * key.coord[1];
        CHECK(std::abs(x[rec.first_scalar] - expected) < 1e-6);
    }
}

TEST_CASE("eta table reflects the cut geometry") {
    {  // fully physical
        const ImplicitDomain domain = everything(2);
        Setup s = make_setup(Box{{0, 0, 0}, {1, 1, 0}}, {3, 3, 1}, 2, 1, domain);
        for (double eta : eta_table(s.mesh, domain, 6)) CHECK(eta == 1.0);
    }
    {  // half plane aligned with element boundaries: exact zeros and ones
        ImplicitDomain domain = everything(2);
        domain.shape = Shape::half_space(0, 0.5, true);
        Setup s = make_setup(Box{{0, 0, 0}, {1, 1, 0}}, {4, 4, 1}, 2, 1, domain);
        const auto eta = eta_table(s.mesh, domain, 6);
        for (int leaf = 0; leaf < static_cast<int>(s.mesh.leaf_count()); ++leaf) {
            const Box b = s.mesh.element_bounds(s.mesh.leaf_element(leaf));
            const double expected = b.hi[0] <= 0.5 ? 1.0 : 0.0;
            CHECK(eta[leaf] == expected);
        }
    }
    {  // sliver of 1e-6 on the first element column
        ImplicitDomain domain = everything(2);
        const double hx = 0.25;
        domain.shape = Shape::half_space(0, 1e-6 * hx, true);
        Setup s = make_setup(Box{{0, 0, 0}, {1, 1, 0}}, {4, 4, 1}, 2, 1, domain, 1, false);
        const auto eta = eta_table(s.mesh, domain, 8);
        const int leaf = s.mesh.leaf_ordinal(s.mesh.leaf_of_point({0.1 * hx, 0.1, 0}));
        CHECK(std::abs(eta[leaf] - 1e-6) <= 1e-7);
    }
}

TEST_CASE("alpha = 0 with retained fictitious functions gives a singular system") {
    ImplicitDomain domain = everything(1);
    domain.shape = Shape::half_space(0, 0.6, true);
    domain.alpha_fict = 0.0;
    Setup s = make_setup(Box{{0, 0, 0}, {1, 0, 0}}, {4, 1, 1}, 1, 2, domain, 1,
                         /*remove_outside=*/false);
    ModelProblem model;
    model.body_load = {1.0, 0.0, 0.0};
    DirichletSurface bc;
    bc.patch.kind = SurfacePatch::Kind::Point;
    bc.patch.pos = 0.0;
    bc.patch.normal_sign = -1.0;
    bc.beta = 1e8;
    domain.dirichlet.push_back(bc);
    QuadratureSettings quad;
    const LinearSystem sys = assemble(s.mesh, s.dofs, s.sups, domain, model, quad);

    const auto eig = jacobi_eigen(sys.a.to_dense(), false, JacobiMode::Frobenius);
    CHECK(std::abs(eig.values.front()) < 1e-12 * eig.values.back());  // singular

    // b lies in the range: unpreconditioned CG still converges
    TripletBuffer t;
    for (int i = 0; i < s.dofs.size(); ++i) t.add(i, i, 1.0);
    const SparseMatrix identity = t.build(s.dofs.size());
    PcgOptions opt;
    opt.tol = 1e-10;
    opt.max_iter = 500;
    const auto [x, report] = pcg(sys.a, sys.b, identity, opt);
    CHECK(report.reason == SolveReport::Reason::Tolerance);
}

TEST_CASE("energy is positive semi-definite on cut domains") {
    ImplicitDomain domain = everything(2);
    domain.shape = Shape::complement(Shape::ball({0.5, 0.5, 0.0}, 0.3));
    domain.alpha_fict = 0.0;
    Setup s = make_setup(Box{{0, 0, 0}, {1, 1, 0}}, {4, 4, 1}, 2, 2, domain, 2);
    ModelProblem model;
    model.kind = ModelProblem::Kind::LinearElasticity;
    model.youngs_modulus = 10.0;
    model.poisson_ratio = 0.3;
    QuadratureSettings quad;
    const LinearSystem sys = assemble(s.mesh, s.dofs, s.sups, domain, model, quad);

    oracles::Rng rng(5);
    std::vector<double> x(s.dofs.size()), ax(s.dofs.size());
    const double scale = sys.a.max_abs();
    for (int k = 0; k < 100; ++k) {
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        sys.a.multiply(x, ax);
        CHECK(dot(x, ax) > -1e-12 * scale * dot(x, x));
    }
}

TEST_CASE("volume stiffness scales exactly with the modulus") {
    ImplicitDomain domain = everything(2);
    domain.shape = Shape::complement(Shape::ball({0.4, 0.6, 0.0}, 0.22));
    Setup s = make_setup(Box{{0, 0, 0}, {1, 1, 0}}, {3, 3, 1}, 2, 2, domain, 2);
    ModelProblem model;
    model.kind = ModelProblem::Kind::LinearElasticity;
    model.youngs_modulus = 35.0;
    model.poisson_ratio = 0.34;
    QuadratureSettings quad;
    const LinearSystem base = assemble(s.mesh, s.dofs, s.sups, domain, model, quad);
    model.youngs_modulus *= 2.0;
    const LinearSystem doubled = assemble(s.mesh, s.dofs, s.sups, domain, model, quad);

    REQUIRE(base.a.nnz() == doubled.a.nnz());
    for (std::size_t k = 0; k < base.a.nnz(); ++k)
        CHECK(doubled.a.values()[k] == 2.0 * base.a.values()[k]);
}

TEST_CASE("load vectors stay finite and follow the body load") {
    const ImplicitDomain domain = everything(3);
    Setup s = make_setup(Box{{0, 0, 0}, {1, 1, 1}}, {2, 2, 2}, 3, 1, domain);
    ModelProblem model;
    model.body_load = {3.0, 0.0, 0.0};
    QuadratureSettings quad;
    const LinearSystem sys = assemble(s.mesh, s.dofs, s.sups, domain, model, quad);
    double total = 0.0;
    for (double v : sys.b) {
        CHECK(std::isfinite(v));
        total += v;
    }
    // partition of unity: sum of loads = integral of the load over the box
    CHECK(total == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("energy error functional vanishes for exactly representable fields") {
    const ImplicitDomain domain = everything(2);
    Setup s = make_setup(Box{{0, 0, 0}, {1, 1, 0}}, {2, 2, 1}, 2, 1, domain);
    std::vector<double> coeffs(s.dofs.size(), 0.0);
    for (const auto& [key, rec] : s.dofs.components())
        if (key.mask == 0 && key.level == 0)
            coeffs[rec.first_scalar] = 0.5 * key.coord[0];  // u = x
    QuadratureSettings quad;
    const double err = energy_error_vs(
        s.mesh, s.dofs, s.sups, domain, quad, coeffs,
        [](const Vec3&) { return std::array<double, 3>{1.0, 0.0, 0.0}; });
    CHECK(err < 1e-13);
}
