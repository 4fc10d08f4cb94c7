#include "fcs/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fcs {

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

}  // namespace

void write_matrix_market(const std::string& path, const SparseMatrix& m) {
    auto out = open_out(path);
    std::size_t nnz_lower = 0;
    const auto row_ptr = m.row_ptr();
    const auto cols = m.cols();
    const auto vals = m.values();
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (cols[k] <= static_cast<int>(i)) ++nnz_lower;

    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << m.size() << " " << m.size() << " " << nnz_lower << "\n";
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (cols[k] <= static_cast<int>(i))
                out << (i + 1) << " " << (cols[k] + 1) << " " << fmt(vals[k]) << "\n";
}

SparseMatrix read_matrix_market(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
        throw std::runtime_error(path + ": not a Matrix Market file");
    const bool symmetric = line.find("symmetric") != std::string::npos;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '%') break;
    std::istringstream head(line);
    std::size_t rows = 0, cols_n = 0, nnz = 0;
    head >> rows >> cols_n >> nnz;
    if (rows != cols_n) throw std::runtime_error(path + ": matrix is not square");

    TripletBuffer triplets;
    for (std::size_t k = 0; k < nnz; ++k) {
        std::size_t i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) throw std::runtime_error(path + ": truncated entries");
        triplets.add(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
        if (symmetric && i != j)
            triplets.add(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
    }
    return triplets.build(rows);
}

void write_vector_market(const std::string& path, std::span<const double> v) {
    auto out = open_out(path);
    out << "%%MatrixMarket matrix array real general\n";
    out << v.size() << " 1\n";
    for (double x : v) out << fmt(x) << "\n";
}

std::vector<double> read_vector_market(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
        throw std::runtime_error(path + ": not a Matrix Market file");
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '%') break;
    std::istringstream head(line);
    std::size_t rows = 0, cols = 0;
    head >> rows >> cols;
    std::vector<double> v(rows * cols);
    for (double& x : v)
        if (!(in >> x)) throw std::runtime_error(path + ": truncated entries");
    return v;
}

void write_block_sidecar(const std::string& path, const BlockSet& blocks) {
    auto out = open_out(path);
    for (const Block& b : blocks.blocks) {
        out << b.leaf;
        for (int d : b.dofs) out << " " << d;
        out << "\n";
    }
}

void write_voxels(const std::string& path, const VoxelGrid& grid,
                  const std::array<std::int64_t, 3>& grouping) {
    auto out = open_out(path, true);
    out << grid.dims[0] << " " << grid.dims[1] << " " << grid.dims[2] << " " << grouping[0]
        << " " << grouping[1] << " " << grouping[2] << "\n";
    out.write(reinterpret_cast<const char*>(grid.occupancy.data()),
              static_cast<std::streamsize>(grid.occupancy.size()));
}

std::shared_ptr<VoxelGrid> read_voxels(const std::string& path) {
    auto in = open_in(path, true);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error(path + ": missing voxel header");
    std::istringstream head(header);
    auto grid = std::make_shared<VoxelGrid>();
    std::array<std::int64_t, 3> grouping{1, 1, 1};
    if (!(head >> grid->dims[0] >> grid->dims[1] >> grid->dims[2] >> grouping[0] >>
          grouping[1] >> grouping[2]))
        throw std::runtime_error(path + ": malformed voxel header (need six integers)");
    const std::int64_t count = grid->dims[0] * grid->dims[1] * grid->dims[2];
    if (count <= 0) throw std::runtime_error(path + ": empty voxel grid");
    grid->occupancy.resize(static_cast<std::size_t>(count));
    in.read(reinterpret_cast<char*>(grid->occupancy.data()), count);
    if (in.gcount() != count) throw std::runtime_error(path + ": truncated voxel payload");
    grid->box = Box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
    return grid;
}

void write_convergence_csv(const std::string& path, std::span<const ConvergenceRow> rows) {
    auto out = open_out(path);
    out << "study,scenario,iter,residual,energy_error\n";
    for (const ConvergenceRow& r : rows) {
        out << r.study << "," << r.scenario << "," << r.iter << "," << fmt(r.residual) << ",";
        if (std::isnan(r.energy_error))
            out << "";
        else
            out << fmt(r.energy_error);
        out << "\n";
    }
}

void write_vtk(const std::string& path, const MlhpMesh& mesh, const DofMap& dofs,
               const std::vector<LeafSupport>& supports, std::span<const double> coeffs,
               std::span<const double> eta, const ModelProblem& model) {
    const int dim = mesh.dim();
    const int nf = dofs.n_fields();
    const int corners = 1 << dim;
    const std::size_t nleaves = mesh.leaf_count();

    auto out = open_out(path);
    out << "# vtk DataFile Version 3.0\n";
    out << "fcsolve leaf mesh\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nleaves * corners << " double\n";
    for (std::size_t leaf = 0; leaf < nleaves; ++leaf) {
        const Box b = mesh.element_bounds(mesh.leaf_element(static_cast<int>(leaf)));
        for (int c = 0; c < corners; ++c) {
            const Vec3 p = b.corner(dim, static_cast<unsigned>(c));
            out << fmt(p[0]) << " " << fmt(dim > 1 ? p[1] : 0.0) << " "
                << fmt(dim > 2 ? p[2] : 0.0) << "\n";
        }
    }

    out << "CELLS " << nleaves << " " << nleaves * (corners + 1) << "\n";
    for (std::size_t leaf = 0; leaf < nleaves; ++leaf) {
        out << corners;
        for (int c = 0; c < corners; ++c) out << " " << leaf * corners + c;
        out << "\n";
    }
    const int cell_type = dim == 3 ? 11 : (dim == 2 ? 8 : 3);  // voxel / pixel / line
    out << "CELL_TYPES " << nleaves << "\n";
    for (std::size_t leaf = 0; leaf < nleaves; ++leaf) out << cell_type << "\n";

    // per-point solution magnitude
    out << "POINT_DATA " << nleaves * corners << "\n";
    out << "SCALARS solution_magnitude double 1\n";
    out << "LOOKUP_TABLE default\n";
    BasisEval eval;
    for (std::size_t leaf = 0; leaf < nleaves; ++leaf) {
        const Box b = mesh.element_bounds(mesh.leaf_element(static_cast<int>(leaf)));
        const LeafSupport& sup = supports[leaf];
        for (int c = 0; c < corners; ++c) {
            const Vec3 p = b.corner(dim, static_cast<unsigned>(c));
            evaluate_support(sup, dim, p, false, eval);
            double mag2 = 0.0;
            for (int f = 0; f < nf; ++f) {
                double u = 0.0;
                for (std::size_t k = 0; k < sup.entries.size(); ++k)
                    u += coeffs[dofs.global(sup.entries[k].scalar, f)] * eval.values[k];
                mag2 += u * u;
            }
            out << fmt(std::sqrt(mag2)) << "\n";
        }
    }

    out << "CELL_DATA " << nleaves << "\n";
    out << "SCALARS eta double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (std::size_t leaf = 0; leaf < nleaves; ++leaf)
        out << fmt(leaf < eta.size() ? eta[leaf] : 1.0) << "\n";

    out << "SCALARS von_mises double 1\n";
    out << "LOOKUP_TABLE default\n";
    const double lambda = model.youngs_modulus * model.poisson_ratio /
                          ((1.0 + model.poisson_ratio) * (1.0 - 2.0 * model.poisson_ratio));
    const double mu = model.youngs_modulus / (2.0 * (1.0 + model.poisson_ratio));
    for (std::size_t leaf = 0; leaf < nleaves; ++leaf) {
        const Box b = mesh.element_bounds(mesh.leaf_element(static_cast<int>(leaf)));
        const LeafSupport& sup = supports[leaf];
        const Vec3 center = b.center();
        evaluate_support(sup, dim, center, true, eval);

        double grad[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        for (std::size_t k = 0; k < sup.entries.size(); ++k)
            for (int f = 0; f < nf; ++f) {
                const double c = coeffs[dofs.global(sup.entries[k].scalar, f)];
                for (int a = 0; a < dim; ++a) grad[f][a] += c * eval.gradients[k][a];
            }

        double vm = 0.0;
        if (model.kind == ModelProblem::Kind::Poisson) {
            for (int a = 0; a < dim; ++a) vm += grad[0][a] * grad[0][a];
            vm = std::sqrt(vm);
        } else {
            double strain[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
            double trace = 0.0;
            for (int a = 0; a < dim; ++a) {
                for (int c = 0; c < dim; ++c) strain[a][c] = 0.5 * (grad[a][c] + grad[c][a]);
                trace += strain[a][a];
            }
            double stress[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
            for (int a = 0; a < 3; ++a)
                for (int c = 0; c < 3; ++c)
                    stress[a][c] = 2.0 * mu * strain[a][c] + (a == c ? lambda * trace : 0.0);
            const double mean = (stress[0][0] + stress[1][1] + stress[2][2]) / 3.0;
            double dev2 = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int c = 0; c < 3; ++c) {
                    const double s = stress[a][c] - (a == c ? mean : 0.0);
                    dev2 += s * s;
                }
            vm = std::sqrt(1.5 * dev2);
        }
        out << fmt(vm) << "\n";
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    auto out = open_out(path);
    out << content;
}

}  // namespace fcs
