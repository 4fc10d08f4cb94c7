#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fcs {

// Row-major dense matrix. Small-to-moderate sizes only; this project keeps
// all dense work at desk scale (block inverses, reference solves, spectra).
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    DenseMatrix transposed() const;
    double max_abs() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
std::vector<double> operator*(const DenseMatrix& a, std::span<const double> x);

// Stopping rule for the cyclic Jacobi eigensolver.
//   Frobenius: off-diagonal Frobenius norm <= 1e-14 * ||A||_F, max 30 sweeps.
//   Relative:  every |a_ij| <= 1e-14 * sqrt(a_ii * a_jj), max 50 sweeps.
// The relative rule resolves heavily graded spectra (tiny eigenvalues of
// badly cut elements) to roughly eps * kappa(scaled) relative accuracy.
enum class JacobiMode { Frobenius, Relative };

struct EigenDecomposition {
    std::vector<double> values;  // ascending
    DenseMatrix vectors;         // columns are eigenvectors, empty unless requested
    int sweeps = 0;
    bool converged = false;
};

EigenDecomposition jacobi_eigen(DenseMatrix a, bool want_vectors,
                                JacobiMode mode = JacobiMode::Frobenius);

// Cholesky LL^T solve; throws if a non-positive pivot shows up.
std::vector<double> cholesky_solve(DenseMatrix a, std::vector<double> b);
bool cholesky_factor(DenseMatrix& a);  // in place, lower triangle; false if not SPD

}  // namespace fcs
