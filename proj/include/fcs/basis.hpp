#pragma once

#include <span>
#include <vector>

namespace fcs {

// Hierarchic 1D shape functions on [-1, 1]:
//   mode 1: N1 = (1 - xi)/2        (nodal)
//   mode 2: N2 = (1 + xi)/2        (nodal)
//   mode j >= 3, degree j-1: integrated Legendre
//       phi_j = (P_{j-1} - P_{j-3}) / sqrt(4(j-1) - 2)
// Internal modes vanish at both endpoints and have orthonormal derivatives.

double legendre(int n, double xi);
double legendre_derivative(int n, double xi);

double shape_value(int mode, double xi);       // mode is 1-based, 1..p+1
double shape_derivative(int mode, double xi);  // d/dxi

// All p+1 modes at once.
std::vector<double> eval_modes(int p, double xi);
std::vector<double> eval_derivatives(int p, double xi);

struct GaussRule {
    std::vector<double> points;   // on [-1, 1]
    std::vector<double> weights;  // sum to 2
};

// Gauss-Legendre rule with n points, exact through degree 2n-1. Cached.
const GaussRule& gauss_rule(int n);

}  // namespace fcs
