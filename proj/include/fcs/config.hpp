#pragma once

#include <array>
#include <string>
#include <vector>

#include "fcs/assembly.hpp"
#include "fcs/geometry.hpp"
#include "fcs/mesh.hpp"
#include "fcs/partition.hpp"

namespace fcs {

enum class PreconditionerKind { None, Jacobi, FullBlocks, TruncatedBlocks };

struct SurfaceConfig {
    bool dirichlet = true;
    SurfacePatch patch;
    Vec3 value{0.0, 0.0, 0.0};  // g or traction
    double beta = 1e10;
    PenaltyMode mode = PenaltyMode::Components;
    unsigned component_mask = ~0u;
};

// Flat-section `key = value` run configuration. Unknown keys, malformed
// values and out-of-range numbers are parse errors carrying line numbers.
struct RunConfig {
    // [problem]
    ModelProblem::Kind kind = ModelProblem::Kind::Poisson;
    double conductivity = 1.0;
    double youngs_modulus = 1.0;
    double poisson_ratio = 0.3;
    Vec3 body_load{0.0, 0.0, 0.0};

    // [geometry]
    std::string domain_expr = "all";

    // [mesh]
    int dim = 1;
    Vec3 lo{0.0, 0.0, 0.0};
    Vec3 hi{1.0, 1.0, 1.0};
    std::array<std::int64_t, 3> counts{1, 1, 1};
    std::string refine_expr = "none";
    int refine_depth = 0;

    // [discretization]
    int p = 1;
    double alpha = 0.0;
    QuadratureSettings quad;
    bool remove_outside = true;

    // [surface.N]
    std::vector<SurfaceConfig> surfaces;

    // [preconditioner]
    PreconditionerKind precond = PreconditionerKind::TruncatedBlocks;
    double eta_bar = 1.0;
    double epsilon = 1e-13;
    bool stabilized = true;
    bool include_interior = true;

    // [solver]
    double tol = 1e-10;
    int max_iter = 300000;
    bool reference = false;

    // [partition]
    int n_ranks = 1;
    PartitionStrategy strategy = PartitionStrategy::Slab;

    // [output]
    std::string out_dir = "out";
    bool write_matrix = false;
    bool write_vtk = false;
    bool write_blocks = false;

    ModelProblem model() const;
    ImplicitDomain build_domain() const;
    MlhpMesh build_mesh() const;  // refined and classified
    double effective_epsilon() const { return stabilized ? epsilon : 0.0; }
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

// Geometry catalog expression -> shape; voxel paths resolve into `box`.
Shape parse_shape(const std::string& expr, int dim, const Box& box);
RegionPredicate parse_region(const std::string& expr, int dim);

}  // namespace fcs
