#include "fcs/basis.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace fcs {

double legendre(int n, double xi) {
    if (n == 0) return 1.0;
    if (n == 1) return xi;
    double pm = 1.0, p = xi;
    for (int k = 2; k <= n; ++k) {
        const double pn = ((2.0 * k - 1.0) * xi * p - (k - 1.0) * pm) / k;
        pm = p;
        p = pn;
    }
    return p;
}

double legendre_derivative(int n, double xi) {
    if (n == 0) return 0.0;
    if (n == 1) return 1.0;
    // (1 - xi^2) P_n' = n (P_{n-1} - xi P_n); near the endpoints fall back to
    // the exact endpoint value n(n+1)/2 * (+-1)^{n+1}.
    const double denom = 1.0 - xi * xi;
    if (std::abs(denom) < 1e-12) {
        const double sign = (xi > 0.0) ? 1.0 : ((n % 2 == 0) ? -1.0 : 1.0);
        return sign * 0.5 * n * (n + 1.0);
    }
    return n * (legendre(n - 1, xi) - xi * legendre(n, xi)) / denom;
}

double shape_value(int mode, double xi) {
    if (mode == 1) return 0.5 * (1.0 - xi);
    if (mode == 2) return 0.5 * (1.0 + xi);
    const int j = mode;
    return (legendre(j - 1, xi) - legendre(j - 3, xi)) / std::sqrt(4.0 * (j - 1) - 2.0);
}

double shape_derivative(int mode, double xi) {
    if (mode == 1) return -0.5;
    if (mode == 2) return 0.5;
    // phi_j' = sqrt((2j-3)/2) P_{j-2}
    const int j = mode;
    return std::sqrt((2.0 * j - 3.0) / 2.0) * legendre(j - 2, xi);
}

std::vector<double> eval_modes(int p, double xi) {
    if (p < 1) throw std::invalid_argument("eval_modes: order must be >= 1");
    std::vector<double> v(p + 1);
    for (int m = 1; m <= p + 1; ++m) v[m - 1] = shape_value(m, xi);
    return v;
}

std::vector<double> eval_derivatives(int p, double xi) {
    if (p < 1) throw std::invalid_argument("eval_derivatives: order must be >= 1");
    std::vector<double> v(p + 1);
    for (int m = 1; m <= p + 1; ++m) v[m - 1] = shape_derivative(m, xi);
    return v;
}

const GaussRule& gauss_rule(int n) {
    if (n < 1) throw std::invalid_argument("gauss_rule: need at least one point");
    static std::map<int, GaussRule> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton iteration from the Chebyshev initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const double f = legendre(n, x);
            const double df = legendre_derivative(n, x);
            const double dx = f / df;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double df = legendre_derivative(n, x);
        rule.points[n - 1 - i] = x;
        rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * df * df);
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace fcs
