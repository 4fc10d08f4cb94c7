#pragma once

#include <string>
#include <vector>

#include "fcs/config.hpp"
#include "fcs/krylov.hpp"
#include "fcs/precond.hpp"

namespace fcs {

enum class StudyKind {
    SingleSolve,
    EtaSweep,         // corner-cut volume fractions 1e-2 .. 1e-6, solver robustness
    ThresholdSweep,   // eta_bar in {0, 0.2, ..., 1.0}
    RefinementSweep,  // k = 0 .. refine_depth, full vs truncated blocks
    PartitionCheck,   // stitched S against serial S for 1, 2, 4, 8 ranks
    ConditioningSweep // kappa(A) against the corner-cut volume fraction
};

StudyKind study_from_name(const std::string& name);
std::string study_name(StudyKind kind);

struct StudyResult {
    std::string label;
    int dofs = 0;
    int iterations = 0;
    SolveReport report;
    PreconditionerStats stats;
    double eta_min = 1.0;
    double eta_value = 0.0;    // sweep parameter where applicable
    double kappa = 0.0;        // spectral measurements
    double max_overlap = 0.0;  // refinement sweep
    double max_s_diff = 0.0;   // partition check
};

// Assembled state shared by the scenarios of one study.
struct SolveContext {
    MlhpMesh mesh;
    DofMap dofs;
    std::vector<LeafSupport> supports;
    ImplicitDomain domain;
    LinearSystem system;
    std::vector<double> eta;
};

SolveContext make_context(const RunConfig& config);
SolveContext make_context(const RunConfig& config, const ImplicitDomain& domain,
                          int refine_depth);

Preconditioner make_preconditioner(const RunConfig& config, const SolveContext& ctx,
                                   PreconditionerKind kind, double eta_bar);

// Corner cut realizing a shape-regular intersection of volume fraction eta
// on the element at the domain's max corner.
ImplicitDomain corner_cut_domain(const RunConfig& config, double eta);

std::vector<StudyResult> run_study(const RunConfig& config, StudyKind kind);

void write_outputs(const RunConfig& config, StudyKind kind,
                   const std::vector<StudyResult>& results, const std::string& out_dir);

}  // namespace fcs
