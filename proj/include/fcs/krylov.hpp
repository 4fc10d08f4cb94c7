#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fcs/dense.hpp"
#include "fcs/sparse.hpp"

namespace fcs {

struct SolveReport {
    enum class Reason { Tolerance, MaxIter, Breakdown };

    std::vector<double> residuals;      // ||S r_i|| / ||S b|| per iteration
    std::vector<double> energy_errors;  // ||x_ref - x_i||_A / ||x_ref||_A, if x_ref given
    int iterations = 0;
    Reason reason = Reason::MaxIter;
    double final_residual = 0.0;
    double breakdown_value = 0.0;  // p^T A p that triggered a breakdown
};

struct PcgOptions {
    double tol = 1e-10;
    int max_iter = 300000;
    const std::vector<double>* x_ref = nullptr;  // enables energy-error tracking
};

// Standard PCG with a fixed preconditioner matrix; stops on the relative
// preconditioned residual ||S r_i||/||S b||. The residual history is recorded
// every iteration and need not be monotone. p^T A p <= 0 reports Breakdown
// instead of aborting.
std::pair<std::vector<double>, SolveReport> pcg(const SparseMatrix& a,
                                                std::span<const double> b,
                                                const SparseMatrix& s, const PcgOptions& opt);

// Dense reference: Cholesky when SPD, symmetric eigen pseudo-inverse (minimum
// norm, solving in range(A)) when singular; throws for indefinite input.
std::vector<double> reference_solve(const SparseMatrix& a, std::span<const double> b);
std::vector<double> reference_solve(const DenseMatrix& a, std::span<const double> b);

struct SpectralReport {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
};

SpectralReport spectrum(const DenseMatrix& m);

// Spectrum of S^{1/2} A S^{1/2} restricted to the range of S: eigenvalues
// below null_tol * lambda_max count as the pseudo-inverse nullspace and are
// excluded from kappa.
SpectralReport preconditioned_spectrum(const DenseMatrix& a, const DenseMatrix& s,
                                       double null_tol = 1e-8);

double norm2(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace fcs
