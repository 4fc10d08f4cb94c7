#include "fcs/assembly.hpp"

#include <cmath>
#include <stdexcept>

#include "fcs/basis.hpp"
#include "fcs/parallel.hpp"

namespace fcs {

void ModelProblem::validate() const {
    if (kind == Kind::LinearElasticity) {
        if (!(youngs_modulus > 0.0))
            throw std::invalid_argument("model: Young's modulus must be positive");
        if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5))
            throw std::invalid_argument("model: Poisson ratio must be in (-1, 0.5)");
    } else {
        if (!(conductivity > 0.0))
            throw std::invalid_argument("model: conductivity must be positive");
    }
}

namespace {

struct ElementBatch {
    std::vector<int> dof;  // global dofs, field-interleaved
    std::vector<double> k; // dense symmetric element matrix
    std::vector<double> f; // element load
};

QuadraturePartition leaf_partition(const MlhpMesh& mesh, const ImplicitDomain& domain,
                                   int leaf_elem, int tree_depth, int order) {
    const Box bounds = mesh.element_bounds(leaf_elem);
    if (mesh.element(leaf_elem).cls == CutClassification::Inside) {
        ImplicitDomain trivial;
        trivial.dim = domain.dim;
        trivial.shape = Shape::all();
        return quadrature_cells(trivial, bounds, 0, order);
    }
    return quadrature_cells(domain, bounds, tree_depth, order);
}

void integrate_leaf(const MlhpMesh& mesh, const DofMap& dofs, const LeafSupport& support,
                    const ImplicitDomain& domain, const ModelProblem& model,
                    const QuadratureSettings& settings, int order, int leaf_elem,
                    ElementBatch& batch) {
    const int dim = mesh.dim();
    const int nf = model.n_fields(dim);
    const int ns = static_cast<int>(support.entries.size());
    const int ndof = ns * nf;

    batch.dof.resize(ndof);
    for (int s = 0; s < ns; ++s)
        for (int f = 0; f < nf; ++f)
            batch.dof[s * nf + f] = dofs.global(support.entries[s].scalar, f);
    batch.k.assign(static_cast<std::size_t>(ndof) * ndof, 0.0);
    batch.f.assign(ndof, 0.0);

    const QuadraturePartition partition =
        leaf_partition(mesh, domain, leaf_elem, settings.tree_depth, order);

    const double lambda = model.youngs_modulus * model.poisson_ratio /
                          ((1.0 + model.poisson_ratio) * (1.0 - 2.0 * model.poisson_ratio));
    const double mu = model.youngs_modulus / (2.0 * (1.0 + model.poisson_ratio));

    BasisEval eval;
    for (const QuadratureSubCell& cell : partition.cells) {
        double cell_alpha = cell.inside ? 1.0 : domain.alpha_fict;
        if (cell.exact && cell_alpha == 0.0) continue;

        for (std::size_t q = 0; q < cell.points.size(); ++q) {
            const Vec3& x = cell.points[q];
            double alpha = cell.exact ? cell_alpha : domain.alpha(x);
            if (alpha == 0.0) continue;
            const double wa = cell.weights[q] * alpha;

            evaluate_support(support, dim, x, true, eval);

            std::array<double, 3> load{model.body_load[0], model.body_load[1],
                                       model.body_load[2]};
            if (model.body_load_fn) load = model.body_load_fn(x);

            if (model.kind == ModelProblem::Kind::Poisson) {
                const double wk = wa * model.conductivity;
                for (int i = 0; i < ns; ++i) {
                    const Vec3& gi = eval.gradients[i];
                    for (int j = 0; j < ns; ++j) {
                        const Vec3& gj = eval.gradients[j];
                        double dot = 0.0;
                        for (int a = 0; a < dim; ++a) dot += gi[a] * gj[a];
                        batch.k[static_cast<std::size_t>(i) * ndof + j] += wk * dot;
                    }
                    batch.f[i] += wa * eval.values[i] * load[0];
                }
            } else {
                for (int i = 0; i < ns; ++i) {
                    const Vec3& gi = eval.gradients[i];
                    for (int j = 0; j < ns; ++j) {
                        const Vec3& gj = eval.gradients[j];
                        double dot = 0.0;
                        for (int a = 0; a < dim; ++a) dot += gi[a] * gj[a];
                        for (int a = 0; a < dim; ++a) {
                            const std::size_t row = static_cast<std::size_t>(i * nf + a) * ndof;
                            for (int b = 0; b < dim; ++b) {
                                double v = lambda * gi[a] * gj[b] + mu * gi[b] * gj[a];
                                if (a == b) v += mu * dot;
                                batch.k[row + j * nf + b] += wa * v;
                            }
                        }
                    }
                    for (int a = 0; a < dim; ++a)
                        batch.f[i * nf + a] += wa * eval.values[i] * load[a];
                }
            }
        }
    }
}

struct SurfaceScatter {
    std::vector<int> rows;
    std::vector<int> cols;
    std::vector<double> vals;
    std::vector<std::pair<int, double>> load;
};

void plane_pieces(const MlhpMesh& mesh, const SurfacePatch& patch, int order,
                  const Box& piece, std::vector<SurfacePoint>& out, int depth) {
    const int dim = mesh.dim();
    for (int i = 0; i < dim; ++i)
        if (i != patch.axis && !(piece.hi[i] > piece.lo[i])) return;

    Vec3 center = piece.center();
    center[patch.axis] = patch.pos;
    const Box leaf = mesh.element_bounds(mesh.leaf_of_point(center));

    int split_axis = -1;
    double split_pos = 0.0;
    for (int i = 0; i < dim && split_axis < 0; ++i) {
        if (i == patch.axis) continue;
        if (leaf.lo[i] > piece.lo[i] && leaf.lo[i] < piece.hi[i]) {
            split_axis = i;
            split_pos = leaf.lo[i];
        } else if (leaf.hi[i] > piece.lo[i] && leaf.hi[i] < piece.hi[i]) {
            split_axis = i;
            split_pos = leaf.hi[i];
        }
    }

    if (split_axis < 0 || depth > 60) {  // piece fits one leaf face
        SurfacePatch sub = patch;
        sub.bounds = piece;
        const auto points = surface_quadrature(sub, order, dim);
        out.insert(out.end(), points.begin(), points.end());
        return;
    }
    Box a = piece, b = piece;
    a.hi[split_axis] = split_pos;
    b.lo[split_axis] = split_pos;
    plane_pieces(mesh, patch, order, a, out, depth + 1);
    plane_pieces(mesh, patch, order, b, out, depth + 1);
}

void integrate_surfaces(const MlhpMesh& mesh, const DofMap& dofs,
                        const std::vector<LeafSupport>& supports, const ImplicitDomain& domain,
                        const ModelProblem& model, int order,
                        const std::vector<char>* leaf_mask, SurfaceScatter& out) {
    const int dim = mesh.dim();
    const int nf = model.n_fields(dim);
    BasisEval eval;

    auto scatter_point = [&](const SurfacePoint& sp, double beta, const Vec3& data,
                             PenaltyMode mode, unsigned mask, bool stiffness) {
        const int leaf_elem = mesh.leaf_of_point(sp.point);
        const int leaf_id = mesh.leaf_ordinal(leaf_elem);
        if (leaf_mask && !(*leaf_mask)[leaf_id]) return;
        const LeafSupport& support = supports[leaf_id];
        const int ns = static_cast<int>(support.entries.size());
        evaluate_support(support, dim, sp.point, false, eval);

        // penalty projector: component mask or n (x) n
        std::array<std::array<double, 3>, 3> proj{};
        if (mode == PenaltyMode::Components) {
            for (int a = 0; a < nf; ++a) proj[a][a] = (mask & (1u << a)) ? 1.0 : 0.0;
        } else {
            for (int a = 0; a < nf; ++a)
                for (int b = 0; b < nf; ++b) proj[a][b] = sp.normal[a] * sp.normal[b];
        }

        for (int i = 0; i < ns; ++i) {
            const double wi = sp.weight * eval.values[i];
            const int gi = dofs.global(support.entries[i].scalar, 0);
            if (stiffness) {
                for (int j = 0; j < ns; ++j) {
                    const double ww = beta * wi * eval.values[j];
                    const int gj = dofs.global(support.entries[j].scalar, 0);
                    for (int a = 0; a < nf; ++a)
                        for (int b = 0; b < nf; ++b) {
                            if (proj[a][b] == 0.0) continue;
                            out.rows.push_back(gi + a);
                            out.cols.push_back(gj + b);
                            out.vals.push_back(ww * proj[a][b]);
                        }
                }
                for (int a = 0; a < nf; ++a) {
                    double pa = 0.0;
                    for (int b = 0; b < nf; ++b) pa += proj[a][b] * data[b];
                    if (pa != 0.0) out.load.emplace_back(gi + a, beta * wi * pa);
                }
            } else {
                for (int a = 0; a < nf; ++a)
                    if (data[a] != 0.0) out.load.emplace_back(gi + a, wi * data[a]);
            }
        }
    };

    for (const DirichletSurface& s : domain.dirichlet) {
        const auto points = mesh_aligned_surface_points(mesh, s.patch, order);
        for (const SurfacePoint& sp : points)
            scatter_point(sp, s.beta, s.value, s.mode, s.component_mask, true);
    }
    for (const NeumannSurface& s : domain.neumann) {
        const auto points = mesh_aligned_surface_points(mesh, s.patch, order);
        for (const SurfacePoint& sp : points)
            scatter_point(sp, 1.0, s.traction, PenaltyMode::Components, ~0u, false);
    }
}

}  // namespace

std::vector<SurfacePoint> mesh_aligned_surface_points(const MlhpMesh& mesh,
                                                      const SurfacePatch& patch, int order) {
    const int dim = mesh.dim();
    std::vector<SurfacePoint> out;
    switch (patch.kind) {
        case SurfacePatch::Kind::Point:
            return surface_quadrature(patch, order, dim);
        case SurfacePatch::Kind::AxisPlane:
            plane_pieces(mesh, patch, order, patch.bounds, out, 0);
            return out;
        case SurfacePatch::Kind::Sphere: {
            double h_min = 1e300;
            for (int i = 0; i < dim; ++i)
                h_min = std::min(h_min, mesh.domain_box().extent(i) /
                                            static_cast<double>(mesh.base_counts()[i]));
            h_min /= static_cast<double>(std::int64_t{1} << mesh.max_level());
            const double target = 0.5 * h_min / std::max(patch.radius, 1e-300);
            auto segments = [&](double range) {
                const double n = std::ceil(std::abs(range) / target);
                return std::clamp(static_cast<int>(n), 1, 1024);
            };
            const int nphi = segments(patch.phi1 - patch.phi0);
            const int ntheta = dim == 3 ? segments(patch.theta1 - patch.theta0) : 1;
            for (int it = 0; it < ntheta; ++it) {
                for (int ip = 0; ip < nphi; ++ip) {
                    SurfacePatch sub = patch;
                    sub.theta0 = patch.theta0 + (patch.theta1 - patch.theta0) * it / ntheta;
                    sub.theta1 = patch.theta0 + (patch.theta1 - patch.theta0) * (it + 1) / ntheta;
                    sub.phi0 = patch.phi0 + (patch.phi1 - patch.phi0) * ip / nphi;
                    sub.phi1 = patch.phi0 + (patch.phi1 - patch.phi0) * (ip + 1) / nphi;
                    const auto points = surface_quadrature(sub, order, dim);
                    out.insert(out.end(), points.begin(), points.end());
                }
            }
            return out;
        }
    }
    return out;
}

LinearSystem assemble(const MlhpMesh& mesh, const DofMap& dofs,
                      const std::vector<LeafSupport>& supports, const ImplicitDomain& domain,
                      const ModelProblem& model, const QuadratureSettings& settings,
                      const std::vector<char>* leaf_mask) {
    model.validate();
    const int dim = mesh.dim();
    const int nf = model.n_fields(dim);
    const int n = dofs.size();
    const int order = settings.volume_order > 0 ? settings.volume_order : dofs.p() + 1;
    const int surf_order = settings.surface_order > 0 ? settings.surface_order : dofs.p() + 1;
    if (nf != dofs.n_fields())
        throw std::invalid_argument("assemble: dof map was built for a different field count");

    const int nleaves = static_cast<int>(mesh.leaf_count());
    std::vector<ElementBatch> batches(nleaves);
    parallel_for(nleaves, [&](int leaf) {
        if (leaf_mask && !(*leaf_mask)[leaf]) return;
        const int elem = mesh.leaf_element(leaf);
        if (mesh.element(elem).cls == CutClassification::Outside) return;
        integrate_leaf(mesh, dofs, supports[leaf], domain, model, settings, order, elem,
                       batches[leaf]);
    });

    LinearSystem sys;
    sys.alpha = domain.alpha_fict;
    sys.b.assign(n, 0.0);

    TripletBuffer triplets;
    std::size_t total = 0;
    for (const ElementBatch& b : batches) total += b.k.size();
    triplets.reserve(total + 1024);

    for (const ElementBatch& batch : batches) {
        const int ndof = static_cast<int>(batch.dof.size());
        for (int i = 0; i < ndof; ++i) {
            for (int j = 0; j < ndof; ++j) {
                const double v = batch.k[static_cast<std::size_t>(i) * ndof + j];
                if (v != 0.0) triplets.add(batch.dof[i], batch.dof[j], v);
            }
            sys.b[batch.dof[i]] += batch.f[i];
        }
    }

    SurfaceScatter surf;
    integrate_surfaces(mesh, dofs, supports, domain, model, surf_order, leaf_mask, surf);
    for (std::size_t k = 0; k < surf.vals.size(); ++k)
        triplets.add(surf.rows[k], surf.cols[k], surf.vals[k]);
    for (const auto& [row, v] : surf.load) sys.b[row] += v;

    sys.a = triplets.build(n);
    for (const DirichletSurface& s : domain.dirichlet) sys.betas.push_back(s.beta);

    for (double v : sys.b)
        if (!std::isfinite(v)) throw std::runtime_error("assemble: non-finite load entry");
    return sys;
}

std::vector<double> eta_table(const MlhpMesh& mesh, const ImplicitDomain& domain, int depth) {
    std::vector<double> eta(mesh.leaf_count(), 1.0);
    parallel_for(static_cast<int>(mesh.leaf_count()), [&](int leaf) {
        const int elem = mesh.leaf_element(leaf);
        switch (mesh.element(elem).cls) {
            case CutClassification::Inside:
                eta[leaf] = 1.0;
                break;
            case CutClassification::Outside:
                eta[leaf] = 0.0;
                break;
            case CutClassification::Cut:
                eta[leaf] = volume_fraction(domain, mesh.element_bounds(elem), depth);
                break;
        }
    });
    return eta;
}

SparseMatrix assemble_mass(const MlhpMesh& mesh, const DofMap& dofs,
                           const std::vector<LeafSupport>& supports,
                           const ImplicitDomain& domain, const QuadratureSettings& settings) {
    const int dim = mesh.dim();
    const int nf = dofs.n_fields();
    const int order = settings.volume_order > 0 ? settings.volume_order : dofs.p() + 1;

    TripletBuffer triplets;
    BasisEval eval;
    for (int leaf = 0; leaf < static_cast<int>(mesh.leaf_count()); ++leaf) {
        const int elem = mesh.leaf_element(leaf);
        if (mesh.element(elem).cls == CutClassification::Outside) continue;
        const QuadraturePartition partition =
            leaf_partition(mesh, domain, elem, settings.tree_depth, order);
        const LeafSupport& support = supports[leaf];
        const int ns = static_cast<int>(support.entries.size());

        for (const QuadratureSubCell& cell : partition.cells) {
            const double cell_alpha = cell.inside ? 1.0 : domain.alpha_fict;
            if (cell.exact && cell_alpha == 0.0) continue;
            for (std::size_t q = 0; q < cell.points.size(); ++q) {
                const double alpha = cell.exact ? cell_alpha : domain.alpha(cell.points[q]);
                if (alpha == 0.0) continue;
                const double wa = cell.weights[q] * alpha;
                evaluate_support(support, dim, cell.points[q], false, eval);
                for (int i = 0; i < ns; ++i)
                    for (int j = 0; j < ns; ++j) {
                        const double v = wa * eval.values[i] * eval.values[j];
                        for (int f = 0; f < nf; ++f)
                            triplets.add(dofs.global(support.entries[i].scalar, f),
                                         dofs.global(support.entries[j].scalar, f), v);
                    }
            }
        }
    }
    return triplets.build(dofs.size());
}

double energy_error_vs(const MlhpMesh& mesh, const DofMap& dofs,
                       const std::vector<LeafSupport>& supports, const ImplicitDomain& domain,
                       const QuadratureSettings& settings, std::span<const double> coeffs,
                       const std::function<std::array<double, 3>(const Vec3&)>& exact_gradient,
                       int field) {
    const int dim = mesh.dim();
    const int order = (settings.volume_order > 0 ? settings.volume_order : dofs.p() + 1) + 2;

    double err2 = 0.0;
    BasisEval eval;
    for (int leaf = 0; leaf < static_cast<int>(mesh.leaf_count()); ++leaf) {
        const int elem = mesh.leaf_element(leaf);
        if (mesh.element(elem).cls == CutClassification::Outside) continue;
        const QuadraturePartition partition =
            leaf_partition(mesh, domain, elem, settings.tree_depth, order);
        const LeafSupport& support = supports[leaf];

        for (const QuadratureSubCell& cell : partition.cells) {
            for (std::size_t q = 0; q < cell.points.size(); ++q) {
                const double alpha =
                    cell.exact ? (cell.inside ? 1.0 : 0.0) : (domain.inside(cell.points[q]) ? 1.0 : 0.0);
                if (alpha == 0.0) continue;
                evaluate_support(support, dim, cell.points[q], true, eval);
                std::array<double, 3> gh{0.0, 0.0, 0.0};
                for (std::size_t k = 0; k < support.entries.size(); ++k) {
                    const double c = coeffs[dofs.global(support.entries[k].scalar, field)];
                    for (int a = 0; a < dim; ++a) gh[a] += c * eval.gradients[k][a];
                }
                const std::array<double, 3> ge = exact_gradient(cell.points[q]);
                double d2 = 0.0;
                for (int a = 0; a < dim; ++a) d2 += (gh[a] - ge[a]) * (gh[a] - ge[a]);
                err2 += cell.weights[q] * d2;
            }
        }
    }
    return std::sqrt(err2);
}

}  // namespace fcs
