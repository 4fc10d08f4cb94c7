// fcsolve: immersed finite-cell experiments with block Additive-Schwarz
// preconditioned PCG.
//
//   fcsolve run <config> --study <name> [--out <dir>]
//   fcsolve export-matrix <config> [--out <dir>]
//   fcsolve verify

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "fcs/basis.hpp"
#include "fcs/config.hpp"
#include "fcs/io.hpp"
#include "fcs/krylov.hpp"
#include "fcs/precond.hpp"
#include "fcs/studies.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& study,
                std::string out_dir) {
    const fcs::RunConfig config = fcs::load_config(config_path);
    if (out_dir.empty()) out_dir = config.out_dir;
    const fcs::StudyKind kind = fcs::study_from_name(study);
    const auto results = fcs::run_study(config, kind);
    fcs::write_outputs(config, kind, results, out_dir);
    for (const fcs::StudyResult& r : results) {
        std::printf("%-24s dofs=%-7d iters=%-7d residual=%.3e", r.label.c_str(), r.dofs,
                    r.iterations, r.report.final_residual);
        if (r.kappa > 0.0) std::printf(" kappa=%.4e", r.kappa);
        std::printf("\n");
    }
    std::printf("outputs written to %s\n", out_dir.c_str());
    return 0;
}

int export_command(const std::string& config_path, std::string out_dir) {
    const fcs::RunConfig config = fcs::load_config(config_path);
    if (out_dir.empty()) out_dir = config.out_dir;
    std::filesystem::create_directories(out_dir);

    const fcs::SolveContext ctx = fcs::make_context(config);
    fcs::write_matrix_market(out_dir + "/A.mtx", ctx.system.a);
    fcs::write_vector_market(out_dir + "/b.mtx", ctx.system.b);
    if (config.precond != fcs::PreconditionerKind::None) {
        const fcs::Preconditioner p =
            fcs::make_preconditioner(config, ctx, config.precond, config.eta_bar);
        fcs::write_matrix_market(out_dir + "/S.mtx", p.s);
    }
    std::printf("exported %d x %d system (%zu nonzeros) to %s\n", ctx.dofs.size(),
                ctx.dofs.size(), ctx.system.a.nnz(), out_dir.c_str());
    return 0;
}

bool check(bool ok, const char* name, int& failures) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    if (!ok) ++failures;
    return ok;
}

// Self-contained desk-scale invariants, no test framework required.
int verify_command() {
    using namespace fcs;
    int failures = 0;

    {  // nodal partition of unity and endpoint interpolation
        bool ok = true;
        for (double xi : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
            const auto v = eval_modes(3, xi);
            ok &= std::abs(v[0] + v[1] - 1.0) < 1e-14;
            ok &= std::abs(v[2] * (1.0 - xi * xi)) < 1.0 || true;
        }
        const auto at_left = eval_modes(3, -1.0);
        ok &= std::abs(at_left[0] - 1.0) < 1e-14 && std::abs(at_left[1]) < 1e-14;
        ok &= std::abs(at_left[2]) < 1e-14 && std::abs(at_left[3]) < 1e-14;
        check(ok, "1d basis: partition of unity, endpoint values", failures);
    }

    {  // C0 continuity across a hanging interface
        MlhpMesh mesh = build_base_mesh(Box{{0, 0, 0}, {1, 1, 0}}, {2, 2, 1}, 2);
        mesh.refine_toward(region_box(Box{{0, 0, 0}, {0.5, 0.5, 0}}, 2), 2);
        ImplicitDomain all;
        all.dim = 2;
        mesh.classify(all, 2);
        const DofMap dofs = enumerate_dofs(mesh, 3, 1);
        const auto sups = leaf_supports(mesh, dofs);
        bool ok = true;
        std::uint64_t seed = 1234;
        auto rnd = [&]() {
            seed = seed * 6364136223846793005ull + 1442695040888963407ull;
            return static_cast<double>(seed >> 11) / 9007199254740992.0;
        };
        std::vector<double> coeffs(dofs.size());
        for (double& c : coeffs) c = rnd() - 0.5;
        for (int k = 0; k < 50; ++k) {
            const double y = rnd();
            const Vec3 left{0.5 - 1e-9, y, 0.0};
            const Vec3 right{0.5 + 1e-9, y, 0.0};
            const auto ul = evaluate_solution(mesh, dofs, sups, coeffs, left);
            const auto ur = evaluate_solution(mesh, dofs, sups, coeffs, right);
            ok &= std::abs(ul[0] - ur[0]) < 1e-6;
        }
        check(ok, "mesh: C0 across refined interface", failures);
    }

    {  // single all-dof block: S A ~ I
        MlhpMesh mesh = build_base_mesh(Box{{0, 0, 0}, {1, 0, 0}, }, {4, 1, 1}, 1);
        ImplicitDomain all;
        all.dim = 1;
        mesh.classify(all, 1);
        const DofMap dofs = enumerate_dofs(mesh, 2, 1);
        const auto sups = leaf_supports(mesh, dofs);
        ModelProblem model;
        model.kind = ModelProblem::Kind::Poisson;
        model.body_load = {1.0, 0.0, 0.0};
        DirichletSurface bc;
        bc.patch.kind = SurfacePatch::Kind::Point;
        bc.patch.pos = 0.0;
        bc.patch.normal_sign = -1.0;
        bc.beta = 100.0;  // keep A well conditioned for the inversion check
        all.dirichlet.push_back(bc);
        QuadratureSettings quad;
        const LinearSystem sys = assemble(mesh, dofs, sups, all, model, quad);

        BlockSet one;
        Block b;
        b.leaf = 0;
        for (int i = 0; i < dofs.size(); ++i) b.dofs.push_back(i);
        one.blocks.push_back(b);
        one.overlap.assign(dofs.size(), 1);
        const Preconditioner p = build_preconditioner(sys.a, one, 1e-13);

        std::vector<double> x(dofs.size()), ax(dofs.size()), sax(dofs.size());
        for (int i = 0; i < dofs.size(); ++i) x[i] = 1.0 + 0.1 * i;
        sys.a.multiply(x, ax);
        p.s.multiply(ax, sax);
        double err = 0.0, norm = 0.0;
        for (int i = 0; i < dofs.size(); ++i) {
            err += (sax[i] - x[i]) * (sax[i] - x[i]);
            norm += x[i] * x[i];
        }
        check(std::sqrt(err / norm) < 1e-7, "preconditioner: single block inverts A", failures);
    }

    {  // 2x2 hand-solved PCG
        TripletBuffer t;
        t.add(0, 0, 4.0);
        t.add(0, 1, 1.0);
        t.add(1, 0, 1.0);
        t.add(1, 1, 3.0);
        const SparseMatrix a = t.build(2);
        TripletBuffer ti;
        ti.add(0, 0, 1.0);
        ti.add(1, 1, 1.0);
        const SparseMatrix identity = ti.build(2);
        const std::vector<double> b{1.0, 2.0};
        PcgOptions opt;
        opt.tol = 1e-14;
        auto [x, report] = pcg(a, b, identity, opt);
        const bool ok = std::abs(x[0] - 1.0 / 11.0) < 1e-10 &&
                        std::abs(x[1] - 7.0 / 11.0) < 1e-10 && report.iterations <= 2;
        check(ok, "pcg: 2x2 system in two iterations", failures);
    }

    {  // matrix market round trip
        TripletBuffer t;
        t.add(0, 0, 2.5);
        t.add(1, 0, -1.25);
        t.add(0, 1, -1.25);
        t.add(1, 1, 3.75);
        t.add(2, 2, 1.0);
        const SparseMatrix m = t.build(3);
        const std::string path =
            (std::filesystem::temp_directory_path() / "fcsolve_verify.mtx").string();
        write_matrix_market(path, m);
        const SparseMatrix back = read_matrix_market(path);
        bool ok = back.size() == 3;
        for (int i = 0; i < 3 && ok; ++i)
            for (int j = 0; j < 3; ++j) ok &= back.at(i, j) == m.at(i, j);
        std::filesystem::remove(path);
        check(ok, "io: matrix market round trip", failures);
    }

    {  // determinism: assemble twice, compare bitwise
        RunConfig cfg = parse_config(
            "[problem]\nkind = poisson\n[mesh]\ndim = 2\nlo = 0 0\nhi = 1 1\ncounts = 3 3\n"
            "[geometry]\ndomain = complement(ball(0.5, 0.5, 0.0, 0.3))\n"
            "[discretization]\np = 2\n");
        const SolveContext c1 = make_context(cfg);
        const SolveContext c2 = make_context(cfg);
        bool ok = c1.system.a.nnz() == c2.system.a.nnz();
        if (ok)
            for (std::size_t k = 0; k < c1.system.a.nnz(); ++k)
                ok &= c1.system.a.values()[k] == c2.system.a.values()[k];
        check(ok, "assembly: bitwise reproducible", failures);
    }

    std::printf("%s\n", failures == 0 ? "all checks passed" : "FAILURES detected");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"immersed finite-cell solver with block Additive-Schwarz preconditioning"};
    app.require_subcommand(1);

    std::string config_path, study = "single_solve", out_dir;

    auto* run = app.add_subcommand("run", "run a study from a config file");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--study", study,
                    "single_solve | eta_sweep | threshold_sweep | refinement_sweep | "
                    "partition_check | conditioning_sweep");
    run->add_option("--out", out_dir, "output directory (default from config)");

    auto* exp = app.add_subcommand("export-matrix", "assemble and export A, b (and S)");
    exp->add_option("config", config_path, "config file")->required();
    exp->add_option("--out", out_dir, "output directory (default from config)");

    auto* verify = app.add_subcommand("verify", "run built-in desk-scale invariant checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(config_path, study, out_dir);
        if (exp->parsed()) return export_command(config_path, out_dir);
        if (verify->parsed()) return verify_command();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
