#include "fcs/studies.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "fcs/io.hpp"
#include "fcs/partition.hpp"

namespace fcs {

StudyKind study_from_name(const std::string& name) {
    if (name == "single_solve") return StudyKind::SingleSolve;
    if (name == "eta_sweep") return StudyKind::EtaSweep;
    if (name == "threshold_sweep") return StudyKind::ThresholdSweep;
    if (name == "refinement_sweep") return StudyKind::RefinementSweep;
    if (name == "partition_check") return StudyKind::PartitionCheck;
    if (name == "conditioning_sweep") return StudyKind::ConditioningSweep;
    throw std::runtime_error("unknown study '" + name + "'");
}

std::string study_name(StudyKind kind) {
    switch (kind) {
        case StudyKind::SingleSolve: return "single_solve";
        case StudyKind::EtaSweep: return "eta_sweep";
        case StudyKind::ThresholdSweep: return "threshold_sweep";
        case StudyKind::RefinementSweep: return "refinement_sweep";
        case StudyKind::PartitionCheck: return "partition_check";
        case StudyKind::ConditioningSweep: return "conditioning_sweep";
    }
    return "unknown";
}

SolveContext make_context(const RunConfig& config, const ImplicitDomain& domain,
                          int refine_depth) {
    SolveContext ctx;
    ctx.domain = domain;
    ctx.mesh = build_base_mesh(Box{config.lo, config.hi}, config.counts, config.dim);
    if (refine_depth > 0)
        ctx.mesh.refine_toward(parse_region(config.refine_expr, config.dim), refine_depth);
    ctx.mesh.classify(ctx.domain, config.quad.classify_depth);

    const ModelProblem model = config.model();
    ctx.dofs = enumerate_dofs(ctx.mesh, config.p, model.n_fields(config.dim),
                              config.remove_outside);
    ctx.supports = leaf_supports(ctx.mesh, ctx.dofs);
    ctx.system = assemble(ctx.mesh, ctx.dofs, ctx.supports, ctx.domain, model, config.quad);
    ctx.eta = eta_table(ctx.mesh, ctx.domain, config.quad.eta_depth);
    ctx.system.eta = ctx.eta;
    return ctx;
}

SolveContext make_context(const RunConfig& config) {
    return make_context(config, config.build_domain(), config.refine_depth);
}

Preconditioner make_preconditioner(const RunConfig& config, const SolveContext& ctx,
                                   PreconditionerKind kind, double eta_bar) {
    const double eps = config.effective_epsilon();
    if (kind == PreconditionerKind::None) {
        TripletBuffer t;
        for (int i = 0; i < ctx.dofs.size(); ++i) t.add(i, i, 1.0);
        Preconditioner p;
        p.s = t.build(ctx.dofs.size());
        p.stats.nnz = p.s.nnz();
        return p;
    }
    if (kind == PreconditionerKind::Jacobi) {
        BlockSet empty;
        empty.overlap.assign(ctx.dofs.size(), 0);
        for (int i = 0; i < ctx.dofs.size(); ++i) empty.uncovered.push_back(i);
        return build_preconditioner(ctx.system.a, empty, eps);
    }
    const BlockSet blocks = kind == PreconditionerKind::FullBlocks
                                ? full_blocks(ctx.mesh, ctx.dofs, ctx.supports)
                                : truncated_blocks(ctx.mesh, ctx.dofs, ctx.supports);
    const BlockSet filtered = filter_blocks(blocks, ctx.eta, eta_bar,
                                            static_cast<std::size_t>(ctx.dofs.size()),
                                            config.include_interior);
    return build_preconditioner(ctx.system.a, filtered, eps);
}

ImplicitDomain corner_cut_domain(const RunConfig& config, double eta) {
    ImplicitDomain domain = config.build_domain();
    Box cut;
    cut.lo = {-1e300, -1e300, -1e300};
    cut.hi = {1e300, 1e300, 1e300};
    const double frac = std::pow(eta, 1.0 / config.dim);
    for (int i = 0; i < config.dim; ++i) {
        const double h = (config.hi[i] - config.lo[i]) / static_cast<double>(config.counts[i]);
        cut.hi[i] = config.hi[i] - h + frac * h;
    }
    domain.shape = Shape::axis_box(cut);
    return domain;
}

namespace {

double min_eta(const std::vector<double>& eta) {
    double m = 1.0;
    for (double v : eta) m = std::min(m, v > 0.0 ? v : 1.0);
    return m;
}

StudyResult solve_scenario(const RunConfig& config, const SolveContext& ctx,
                           const Preconditioner& precond, const std::string& label) {
    StudyResult r;
    r.label = label;
    r.dofs = ctx.dofs.size();
    r.stats = precond.stats;
    r.eta_min = min_eta(ctx.eta);

    PcgOptions opt;
    opt.tol = config.tol;
    opt.max_iter = config.max_iter;
    std::vector<double> x_ref;
    if (config.reference && ctx.dofs.size() <= 20000) {
        x_ref = reference_solve(ctx.system.a, ctx.system.b);
        opt.x_ref = &x_ref;
    }
    auto [x, report] = pcg(ctx.system.a, ctx.system.b, precond.s, opt);
    r.report = std::move(report);
    r.iterations = r.report.iterations;
    return r;
}

std::string eta_label(double eta) {
    std::ostringstream s;
    s << "eta=" << eta;
    return s.str();
}

const std::vector<double> kEtaSweep{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

}  // namespace

std::vector<StudyResult> run_study(const RunConfig& config, StudyKind kind) {
    std::vector<StudyResult> results;

    switch (kind) {
        case StudyKind::SingleSolve: {
            SolveContext ctx = make_context(config);
            const Preconditioner p = make_preconditioner(config, ctx, config.precond,
                                                         config.eta_bar);
            results.push_back(solve_scenario(config, ctx, p, "single"));
            break;
        }

        case StudyKind::EtaSweep: {
            for (double eta : kEtaSweep) {
                SolveContext ctx = make_context(config, corner_cut_domain(config, eta), 0);
                const Preconditioner p = make_preconditioner(config, ctx, config.precond,
                                                             config.eta_bar);
                StudyResult r = solve_scenario(config, ctx, p, eta_label(eta));
                r.eta_value = eta;
                if (ctx.dofs.size() <= 400)
                    r.kappa =
                        preconditioned_spectrum(ctx.system.a.to_dense(), p.s.to_dense()).kappa;
                results.push_back(std::move(r));
            }
            break;
        }

        case StudyKind::ThresholdSweep: {
            SolveContext ctx = make_context(config);
            const PreconditionerKind block_kind =
                (config.precond == PreconditionerKind::FullBlocks ||
                 config.precond == PreconditionerKind::TruncatedBlocks)
                    ? config.precond
                    : PreconditionerKind::FullBlocks;
            for (double eta_bar : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
                const Preconditioner p = make_preconditioner(config, ctx, block_kind, eta_bar);
                std::ostringstream label;
                label << "eta_bar=" << eta_bar;
                StudyResult r = solve_scenario(config, ctx, p, label.str());
                r.eta_value = eta_bar;
                results.push_back(std::move(r));
            }
            break;
        }

        case StudyKind::RefinementSweep: {
            for (int k = 0; k <= config.refine_depth; ++k) {
                SolveContext ctx = make_context(config, config.build_domain(), k);
                for (const PreconditionerKind kind :
                     {PreconditionerKind::FullBlocks, PreconditionerKind::TruncatedBlocks}) {
                    const BlockSet blocks =
                        kind == PreconditionerKind::FullBlocks
                            ? full_blocks(ctx.mesh, ctx.dofs, ctx.supports)
                            : truncated_blocks(ctx.mesh, ctx.dofs, ctx.supports);
                    const BlockSet filtered =
                        filter_blocks(blocks, ctx.eta, config.eta_bar,
                                      static_cast<std::size_t>(ctx.dofs.size()),
                                      config.include_interior);
                    const Preconditioner p =
                        build_preconditioner(ctx.system.a, filtered, config.effective_epsilon());
                    std::ostringstream label;
                    label << (kind == PreconditionerKind::FullBlocks ? "full" : "truncated")
                          << ",k=" << k;
                    StudyResult r = solve_scenario(config, ctx, p, label.str());
                    r.eta_value = k;
                    int max_overlap = 0;
                    for (int o : filtered.overlap) max_overlap = std::max(max_overlap, o);
                    r.max_overlap = max_overlap;
                    results.push_back(std::move(r));
                }
            }
            break;
        }

        case StudyKind::PartitionCheck: {
            SolveContext ctx = make_context(config);
            const PreconditionerKind block_kind =
                (config.precond == PreconditionerKind::FullBlocks ||
                 config.precond == PreconditionerKind::TruncatedBlocks)
                    ? config.precond
                    : PreconditionerKind::TruncatedBlocks;
            const BlockSet blocks = block_kind == PreconditionerKind::FullBlocks
                                        ? full_blocks(ctx.mesh, ctx.dofs, ctx.supports)
                                        : truncated_blocks(ctx.mesh, ctx.dofs, ctx.supports);
            const BlockSet filtered =
                filter_blocks(blocks, ctx.eta, config.eta_bar,
                              static_cast<std::size_t>(ctx.dofs.size()),
                              config.include_interior);
            const double eps = config.effective_epsilon();
            const Preconditioner serial = build_preconditioner(ctx.system.a, filtered, eps);
            const ModelProblem model = config.model();

            for (int ranks : {1, 2, 4, 8}) {
                if (ranks > static_cast<int>(ctx.mesh.leaf_count())) break;
                const Partition part =
                    make_partition(ctx.mesh, ctx.dofs, ctx.supports, ranks, config.strategy);
                std::vector<SparseMatrix> rows;
                for (int r = 0; r < ranks; ++r) {
                    const LinearSystem local = local_system(part, r, ctx.mesh, ctx.dofs,
                                                            ctx.supports, ctx.domain, model,
                                                            config.quad);
                    rows.push_back(local_preconditioner_rows(part, r, local.a, filtered, eps));
                }
                const SparseMatrix stitched = stitch_rows(rows);

                double max_diff = 0.0;
                {
                    const auto rp = serial.s.row_ptr();
                    const auto cols = serial.s.cols();
                    const auto vals = serial.s.values();
                    for (std::size_t i = 0; i < serial.s.size(); ++i)
                        for (std::int64_t k2 = rp[i]; k2 < rp[i + 1]; ++k2)
                            max_diff = std::max(
                                max_diff, std::abs(vals[k2] - stitched.at(static_cast<int>(i),
                                                                          cols[k2])));
                    const auto rp2 = stitched.row_ptr();
                    const auto cols2 = stitched.cols();
                    const auto vals2 = stitched.values();
                    for (std::size_t i = 0; i < stitched.size(); ++i)
                        for (std::int64_t k2 = rp2[i]; k2 < rp2[i + 1]; ++k2)
                            max_diff = std::max(
                                max_diff, std::abs(vals2[k2] - serial.s.at(static_cast<int>(i),
                                                                           cols2[k2])));
                }

                Preconditioner stitched_p;
                stitched_p.s = stitched;
                stitched_p.stats = serial.stats;
                std::ostringstream label;
                label << "ranks=" << ranks;
                StudyResult r = solve_scenario(config, ctx, stitched_p, label.str());
                r.eta_value = ranks;
                r.max_s_diff = max_diff;
                results.push_back(std::move(r));
            }
            break;
        }

        case StudyKind::ConditioningSweep: {
            for (double eta : kEtaSweep) {
                SolveContext ctx = make_context(config, corner_cut_domain(config, eta), 0);
                StudyResult r;
                r.label = eta_label(eta);
                r.dofs = ctx.dofs.size();
                r.eta_value = eta;
                r.eta_min = min_eta(ctx.eta);
                if (ctx.dofs.size() > 2000)
                    throw std::runtime_error("conditioning_sweep: system too large for dense spectra");
                r.kappa = spectrum(ctx.system.a.to_dense()).kappa;
                results.push_back(std::move(r));
            }
            break;
        }
    }
    return results;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

void write_outputs(const RunConfig& config, StudyKind kind,
                   const std::vector<StudyResult>& results, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string study = study_name(kind);

    std::vector<ConvergenceRow> rows;
    for (const StudyResult& r : results) {
        for (std::size_t i = 0; i < r.report.residuals.size(); ++i) {
            ConvergenceRow row;
            row.study = study;
            row.scenario = r.label;
            row.iter = static_cast<int>(i + 1);
            row.residual = r.report.residuals[i];
            row.energy_error = i < r.report.energy_errors.size() ? r.report.energy_errors[i]
                                                                 : std::nan("");
            rows.push_back(std::move(row));
        }
    }
    write_convergence_csv(out_dir + "/convergence.csv", rows);

    std::ostringstream summary;
    summary << "study,scenario,dofs,iterations,reason,final_residual,s_nnz,blocks,"
               "discarded,eta_min,sweep_value,kappa,max_overlap,max_s_diff\n";
    for (const StudyResult& r : results) {
        const char* reason = "tolerance";
        if (r.report.reason == SolveReport::Reason::MaxIter) reason = "max_iter";
        if (r.report.reason == SolveReport::Reason::Breakdown) reason = "breakdown";
        summary << study << ',' << r.label << ',' << r.dofs << ',' << r.iterations << ','
                << reason << ',' << fmt(r.report.final_residual) << ',' << r.stats.nnz << ','
                << r.stats.blocks << ',' << r.stats.discarded << ',' << fmt(r.eta_min) << ','
                << fmt(r.eta_value) << ',' << fmt(r.kappa) << ',' << fmt(r.max_overlap) << ','
                << fmt(r.max_s_diff) << "\n";
    }
    write_text_file(out_dir + "/summary.csv", summary.str());

    // mesh summary for the configured discretization
    {
        MlhpMesh mesh = config.build_mesh();
        const DofMap dofs = enumerate_dofs(mesh, config.p,
                                           config.model().n_fields(config.dim),
                                           config.remove_outside);
        const auto per_level = dofs.scalar_dofs_per_level(mesh.max_level());
        std::vector<int> leaves_per_level(mesh.max_level() + 1, 0);
        for (int leaf = 0; leaf < static_cast<int>(mesh.leaf_count()); ++leaf)
            leaves_per_level[mesh.element(mesh.leaf_element(leaf)).level] += 1;
        std::ostringstream ms;
        ms << "level,leaves,scalar_dofs\n";
        for (int l = 0; l <= mesh.max_level(); ++l)
            ms << l << ',' << leaves_per_level[l] << ',' << per_level[l] << "\n";
        write_text_file(out_dir + "/mesh_summary.csv", ms.str());
    }

    if (kind == StudyKind::SingleSolve &&
        (config.write_matrix || config.write_vtk || config.write_blocks)) {
        SolveContext ctx = make_context(config);
        if (config.write_matrix) {
            write_matrix_market(out_dir + "/A.mtx", ctx.system.a);
            write_vector_market(out_dir + "/b.mtx", ctx.system.b);
            if (config.precond != PreconditionerKind::None) {
                const Preconditioner p =
                    make_preconditioner(config, ctx, config.precond, config.eta_bar);
                write_matrix_market(out_dir + "/S.mtx", p.s);
            }
        }
        if (config.write_blocks &&
            (config.precond == PreconditionerKind::FullBlocks ||
             config.precond == PreconditionerKind::TruncatedBlocks)) {
            const BlockSet blocks = config.precond == PreconditionerKind::FullBlocks
                                        ? full_blocks(ctx.mesh, ctx.dofs, ctx.supports)
                                        : truncated_blocks(ctx.mesh, ctx.dofs, ctx.supports);
            write_block_sidecar(out_dir + "/blocks.txt", blocks);
        }
        if (config.write_vtk) {
            const Preconditioner p =
                make_preconditioner(config, ctx, config.precond, config.eta_bar);
            PcgOptions opt;
            opt.tol = config.tol;
            opt.max_iter = config.max_iter;
            auto [x, report] = pcg(ctx.system.a, ctx.system.b, p.s, opt);
            write_vtk(out_dir + "/solution.vtk", ctx.mesh, ctx.dofs, ctx.supports, x, ctx.eta,
                      config.model());
        }
    }
}

}  // namespace fcs
