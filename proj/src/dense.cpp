#include "fcs/dense.hpp"

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>

namespace fcs {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double DenseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("dense multiply: shape mismatch");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

std::vector<double> operator*(const DenseMatrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw std::invalid_argument("dense matvec: shape mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

namespace {

bool jacobi_converged(const DenseMatrix& a, JacobiMode mode) {
    const std::size_t n = a.rows();
    if (mode == JacobiMode::Frobenius) {
        double off = 0.0, full = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double v = a(i, j) * a(i, j);
                full += v;
                if (i != j) off += v;
            }
        }
        return std::sqrt(off) <= 1e-14 * std::sqrt(full);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double bound = 1e-14 * std::sqrt(std::abs(a(i, i)) * std::abs(a(j, j)));
            if (std::abs(a(i, j)) > std::max(bound, 1e-300)) return false;
        }
    }
    return true;
}

}  // namespace

EigenDecomposition jacobi_eigen(DenseMatrix a, bool want_vectors, JacobiMode mode) {
    const std::size_t n = a.rows();
    if (n != a.cols()) throw std::invalid_argument("jacobi_eigen: matrix not square");

    EigenDecomposition out;
    DenseMatrix v;
    if (want_vectors) v = DenseMatrix::identity(n);

    const int max_sweeps = (mode == JacobiMode::Frobenius) ? 30 : 50;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (jacobi_converged(a, mode)) {
            out.converged = true;
            break;
        }
        ++out.sweeps;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                if (mode == JacobiMode::Relative) {
                    const double bound =
                        1e-15 * std::sqrt(std::abs(a(p, p)) * std::abs(a(q, q)));
                    if (std::abs(apq) <= bound) continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp - s * (akq + tau * akp);
                    a(p, k) = a(k, p);
                    a(k, q) = akq + s * (akp - tau * akq);
                    a(q, k) = a(k, q);
                }
                if (want_vectors) {
                    for (std::size_t k = 0; k < n; ++k) {
                        const double vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = vkp - s * (vkq + tau * vkp);
                        v(k, q) = vkq + s * (vkp - tau * vkq);
                    }
                }
            }
        }
    }
    if (!out.converged) out.converged = jacobi_converged(a, mode);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = a(order[i], order[i]);
    if (want_vectors) {
        out.vectors = DenseMatrix(n, n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

bool cholesky_factor(DenseMatrix& a) {
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / ljj;
        }
    }
    return true;
}

std::vector<double> cholesky_solve(DenseMatrix a, std::vector<double> b) {
    const std::size_t n = a.rows();
    if (b.size() != n) throw std::invalid_argument("cholesky_solve: rhs size mismatch");
    if (!cholesky_factor(a)) throw std::runtime_error("cholesky_solve: matrix not SPD");
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b[k];
        b[i] = s / a(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a(k, ii) * b[k];
        b[ii] = s / a(ii, ii);
    }
    return b;
}

}  // namespace fcs
