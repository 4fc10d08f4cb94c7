#include "oracles.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace oracles {

using fcs::DenseMatrix;

DenseMatrix lu_invert(const DenseMatrix& a) {
    const std::size_t n = a.rows();
    DenseMatrix work = a;
    DenseMatrix inv = DenseMatrix::identity(n);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(work(r, col)) > std::abs(work(pivot, col))) pivot = r;
        if (work(pivot, col) == 0.0) throw std::runtime_error("lu_invert: singular matrix");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(work(pivot, c), work(col, c));
                std::swap(inv(pivot, c), inv(col, c));
            }
        }
        const double d = work(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            work(col, c) /= d;
            inv(col, c) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = work(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                work(r, c) -= f * work(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

DenseMatrix dense_schwarz(const DenseMatrix& a, const std::vector<std::vector<int>>& blocks) {
    const std::size_t n = a.rows();
    DenseMatrix s(n, n);
    for (const std::vector<int>& block : blocks) {
        const std::size_t m = block.size();
        DenseMatrix restriction(m, n);
        for (std::size_t i = 0; i < m; ++i) restriction(i, block[i]) = 1.0;
        const DenseMatrix ab = restriction * a * restriction.transposed();
        const DenseMatrix inv = lu_invert(ab);
        const DenseMatrix contribution = restriction.transposed() * inv * restriction;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) s(i, j) += contribution(i, j);
    }
    return s;
}

bool rayleigh_bound_check(const DenseMatrix& a, const std::vector<std::vector<int>>& blocks) {
    const std::size_t n = a.rows();
    std::vector<int> membership(n, 0);
    for (const auto& block : blocks)
        for (int k : block) membership[k] += 1;

    const DenseMatrix s = dense_schwarz(a, blocks);
    DenseMatrix s_inv;
    try {
        s_inv = lu_invert(s);
    } catch (const std::runtime_error&) {
        std::fprintf(stderr, "rayleigh_bound_check: singular S, check skipped\n");
        return true;
    }

    for (std::size_t k = 0; k < n; ++k) {
        if (membership[k] == 0) continue;
        const double bound = a(k, k) / membership[k] + 1e-10;
        if (s_inv(k, k) > bound) return false;
    }
    return true;
}

std::array<double, 3> fd_gradient(const std::function<double(const std::array<double, 3>&)>& f,
                                  const std::array<double, 3>& x, double h, int dim) {
    std::array<double, 3> g{0.0, 0.0, 0.0};
    for (int i = 0; i < dim; ++i) {
        std::array<double, 3> xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

double pixel_area(const std::function<bool(double, double)>& inside, double x0, double y0,
                  double x1, double y1, int resolution) {
    const double dx = (x1 - x0) / resolution;
    const double dy = (y1 - y0) / resolution;
    long long count = 0;
    for (int i = 0; i < resolution; ++i)
        for (int j = 0; j < resolution; ++j)
            if (inside(x0 + (i + 0.5) * dx, y0 + (j + 0.5) * dy)) ++count;
    return static_cast<double>(count) * dx * dy;
}

double legendre_poly(int n, double x) {
    // coefficient recurrence (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}
    std::vector<double> prev{1.0}, cur{0.0, 1.0};
    if (n == 0) return 1.0;
    for (int k = 1; k < n; ++k) {
        std::vector<double> next(k + 2, 0.0);
        for (std::size_t i = 0; i < cur.size(); ++i)
            next[i + 1] += (2.0 * k + 1.0) * cur[i] / (k + 1.0);
        for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= k * prev[i] / (k + 1.0);
        prev = std::move(cur);
        cur = std::move(next);
    }
    double value = 0.0;
    for (std::size_t i = cur.size(); i-- > 0;) value = value * x + cur[i];
    return value;
}

namespace {

double rayleigh_step(const DenseMatrix& a, std::vector<double>& v) {
    std::vector<double> av(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) av[i] += a(i, j) * v[j];
    double num = 0.0, den = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        num += v[i] * av[i];
        den += v[i] * v[i];
        norm += av[i] * av[i];
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = av[i] / norm;
    return num / den;
}

}  // namespace

double power_lambda_max(const DenseMatrix& a, int iterations) {
    Rng rng(0x9d2c5680u);
    std::vector<double> v(a.rows());
    for (double& x : v) x = rng.uniform() + 0.1;
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) lambda = rayleigh_step(a, v);
    return lambda;
}

double power_lambda_min(const DenseMatrix& a, int iterations) {
    const DenseMatrix inv = lu_invert(a);
    return 1.0 / power_lambda_max(inv, iterations);
}

std::uint64_t Rng::next_u64() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) / 9007199254740992.0; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

}  // namespace oracles
