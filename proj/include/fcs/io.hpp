#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fcs/assembly.hpp"
#include "fcs/blocks.hpp"
#include "fcs/geometry.hpp"
#include "fcs/mesh.hpp"
#include "fcs/sparse.hpp"

namespace fcs {

// Matrix Market, coordinate format, symmetric, 1-based; the lower triangle
// is written. Vectors use the array format.
void write_matrix_market(const std::string& path, const SparseMatrix& m);
SparseMatrix read_matrix_market(const std::string& path);
void write_vector_market(const std::string& path, std::span<const double> v);
std::vector<double> read_vector_market(const std::string& path);

// Block sidecar: one line per block, leaf id then sorted global indices.
void write_block_sidecar(const std::string& path, const BlockSet& blocks);

// Voxel raster: one text header line with six integers
// (nx ny nz gx gy gz: dims and element grouping), then nx*ny*nz occupancy
// bytes in x-fastest order.
void write_voxels(const std::string& path, const VoxelGrid& grid,
                  const std::array<std::int64_t, 3>& grouping = {1, 1, 1});
std::shared_ptr<VoxelGrid> read_voxels(const std::string& path);

struct ConvergenceRow {
    std::string study;
    std::string scenario;
    int iter = 0;
    double residual = 0.0;
    double energy_error = 0.0;  // NaN when not tracked
};

// header: study,scenario,iter,residual,energy_error
void write_convergence_csv(const std::string& path, std::span<const ConvergenceRow> rows);

// Legacy VTK unstructured grid of the leaf elements with per-point solution
// magnitude and per-cell volume fraction and von Mises stress.
void write_vtk(const std::string& path, const MlhpMesh& mesh, const DofMap& dofs,
               const std::vector<LeafSupport>& supports, std::span<const double> coeffs,
               std::span<const double> eta, const ModelProblem& model);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace fcs
