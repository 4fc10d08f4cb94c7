#include "fcs/krylov.hpp"

#include <cmath>
#include <stdexcept>

namespace fcs {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::pair<std::vector<double>, SolveReport> pcg(const SparseMatrix& a,
                                                std::span<const double> b,
                                                const SparseMatrix& s, const PcgOptions& opt) {
    const std::size_t n = a.size();
    if (b.size() != n || s.size() != n)
        throw std::invalid_argument("pcg: dimension mismatch");

    SolveReport report;
    std::vector<double> x(n, 0.0);

    std::vector<double> sb(n), r(b.begin(), b.end()), z(n), p(n), q(n), w(n);
    s.multiply(b, sb);
    const double sb_norm = norm2(sb);
    if (sb_norm == 0.0) {
        report.reason = SolveReport::Reason::Tolerance;
        return {x, report};
    }

    // optional energy-error monitor
    double ref_energy = 0.0;
    std::vector<double> ar;
    if (opt.x_ref) {
        ar = a.multiply(*opt.x_ref);
        ref_energy = std::sqrt(std::max(0.0, dot(*opt.x_ref, ar)));
    }
    auto record_energy = [&]() {
        if (!opt.x_ref) return;
        for (std::size_t i = 0; i < n; ++i) w[i] = (*opt.x_ref)[i] - x[i];
        const double e = dot(w, a.multiply(w));
        report.energy_errors.push_back(std::sqrt(std::max(0.0, e)) / ref_energy);
    };

    s.multiply(r, z);
    double rho = dot(r, z);
    p = z;

    for (int it = 1; it <= opt.max_iter; ++it) {
        a.multiply(p, q);
        const double p_a_p = dot(p, q);
        if (p_a_p <= 0.0) {
            report.reason = SolveReport::Reason::Breakdown;
            report.breakdown_value = p_a_p;
            break;
        }
        const double alpha = rho / p_a_p;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        s.multiply(r, z);

        report.iterations = it;
        const double res = norm2(z) / sb_norm;
        report.residuals.push_back(res);
        report.final_residual = res;
        record_energy();

        if (res <= opt.tol) {
            report.reason = SolveReport::Reason::Tolerance;
            return {x, report};
        }

        const double rho_next = dot(r, z);
        const double beta = rho_next / rho;
        rho = rho_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (report.reason != SolveReport::Reason::Breakdown)
        report.reason = SolveReport::Reason::MaxIter;
    return {x, report};
}

std::vector<double> reference_solve(const DenseMatrix& a, std::span<const double> b) {
    const std::size_t n = a.rows();
    if (n > 20000) throw std::invalid_argument("reference_solve: system too large for dense work");
    if (b.size() != n) throw std::invalid_argument("reference_solve: rhs size mismatch");

    DenseMatrix chol = a;
    if (cholesky_factor(chol)) {
        std::vector<double> y(b.begin(), b.end());
        for (std::size_t i = 0; i < n; ++i) {
            double v = y[i];
            for (std::size_t k = 0; k < i; ++k) v -= chol(i, k) * y[k];
            y[i] = v / chol(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double v = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) v -= chol(k, ii) * y[k];
            y[ii] = v / chol(ii, ii);
        }
        return y;
    }

    // singular (or nearly) symmetric case: minimum-norm solve in range(A)
    EigenDecomposition eig = jacobi_eigen(a, true, JacobiMode::Relative);
    const double lambda_max = eig.values.empty() ? 0.0 : eig.values.back();
    if (!eig.values.empty() && eig.values.front() < -1e-10 * std::abs(lambda_max))
        throw std::runtime_error("reference_solve: matrix is indefinite");

    std::vector<double> x(n, 0.0);
    const double cut = 1e-12 * std::abs(lambda_max);
    for (std::size_t k = 0; k < n; ++k) {
        if (eig.values[k] <= cut) continue;
        double proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) proj += eig.vectors(i, k) * b[i];
        proj /= eig.values[k];
        for (std::size_t i = 0; i < n; ++i) x[i] += proj * eig.vectors(i, k);
    }
    return x;
}

std::vector<double> reference_solve(const SparseMatrix& a, std::span<const double> b) {
    return reference_solve(a.to_dense(), b);
}

SpectralReport spectrum(const DenseMatrix& m) {
    if (m.rows() > 2000) throw std::invalid_argument("spectrum: dense eigen limit exceeded");
    EigenDecomposition eig = jacobi_eigen(m, false, JacobiMode::Relative);
    SpectralReport r;
    r.lambda_min = eig.values.front();
    r.lambda_max = eig.values.back();
    r.kappa = r.lambda_max / r.lambda_min;
    return r;
}

SpectralReport preconditioned_spectrum(const DenseMatrix& a, const DenseMatrix& s,
                                       double null_tol) {
    const std::size_t n = a.rows();
    EigenDecomposition es = jacobi_eigen(s, true, JacobiMode::Relative);
    DenseMatrix root(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lambda = std::max(es.values[k], 0.0);
        const double sq = std::sqrt(lambda);
        if (sq == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const double vi = es.vectors(i, k) * sq;
            if (vi == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) root(i, j) += vi * es.vectors(j, k);
        }
    }
    const DenseMatrix m = root * a * root;
    EigenDecomposition em = jacobi_eigen(m, false, JacobiMode::Relative);

    SpectralReport r;
    r.lambda_max = em.values.back();
    r.lambda_min = em.values.back();
    const double cut = null_tol * std::abs(r.lambda_max);
    for (double lambda : em.values) {
        if (lambda > cut) {
            r.lambda_min = lambda;
            break;
        }
    }
    r.kappa = r.lambda_max / r.lambda_min;
    return r;
}

}  // namespace fcs
