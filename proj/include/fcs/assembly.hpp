#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fcs/geometry.hpp"
#include "fcs/mesh.hpp"
#include "fcs/sparse.hpp"

namespace fcs {

struct ModelProblem {
    enum class Kind { Poisson, LinearElasticity };
    Kind kind = Kind::Poisson;

    double conductivity = 1.0;     // Poisson
    double youngs_modulus = 1.0;   // elasticity
    double poisson_ratio = 0.3;    // in (-1, 0.5); 2D uses plane strain

    Vec3 body_load{0.0, 0.0, 0.0};
    std::function<std::array<double, 3>(const Vec3&)> body_load_fn;  // overrides constant

    int n_fields(int dim) const { return kind == Kind::Poisson ? 1 : dim; }
    void validate() const;
};

struct QuadratureSettings {
    int tree_depth = 3;      // octree depth on cut elements
    int volume_order = 0;    // 0 -> p + 1 points per direction
    int surface_order = 0;   // 0 -> p + 1
    int classify_depth = 3;  // element classification sampling depth
    int eta_depth = 8;       // volume-fraction table depth
};

struct LinearSystem {
    SparseMatrix a;
    std::vector<double> b;
    double alpha = 0.0;
    std::vector<double> eta;    // per leaf; filled by eta_table
    std::vector<double> betas;  // per Dirichlet surface
};

// Volume stiffness (alpha-weighted) + penalty surface mass; load vector from
// alpha-weighted body load, Neumann tractions and beta-weighted Dirichlet
// data. Outside-classified leaves are never integrated. A leaf mask restricts
// integration to a subset of leaves (used by the partition simulator).
LinearSystem assemble(const MlhpMesh& mesh, const DofMap& dofs,
                      const std::vector<LeafSupport>& supports, const ImplicitDomain& domain,
                      const ModelProblem& model, const QuadratureSettings& settings,
                      const std::vector<char>* leaf_mask = nullptr);

std::vector<double> eta_table(const MlhpMesh& mesh, const ImplicitDomain& domain, int depth);

// Patch quadrature subdivided at leaf boundaries; plane patches split exactly
// along element faces, sphere patches by angular refinement to the finest
// leaf size. Assembly uses this so that piecewise integrands are integrated
// per element.
std::vector<SurfacePoint> mesh_aligned_surface_points(const MlhpMesh& mesh,
                                                      const SurfacePatch& patch, int order);

// Field-diagonal mass matrix (alpha-weighted), used by basis diagnostics.
SparseMatrix assemble_mass(const MlhpMesh& mesh, const DofMap& dofs,
                           const std::vector<LeafSupport>& supports,
                           const ImplicitDomain& domain, const QuadratureSettings& settings);

// sqrt of the alpha-weighted H1-seminorm error against an exact gradient,
// integrated with the same cut-cell quadrature as assembly.
double energy_error_vs(const MlhpMesh& mesh, const DofMap& dofs,
                       const std::vector<LeafSupport>& supports, const ImplicitDomain& domain,
                       const QuadratureSettings& settings, std::span<const double> coeffs,
                       const std::function<std::array<double, 3>(const Vec3&)>& exact_gradient,
                       int field = 0);

}  // namespace fcs
