#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace powertail::quad {

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

GaussRule gauss_legendre(int n);

/// Values P_0(x) ... P_n(x).
std::vector<double> legendre_values(int n, double x);

/// Coefficient matrix turning samples on the rule's nodes into Legendre
/// coefficients of the interpolating polynomial: a = T * f.
Eigen::MatrixXd legendre_transform(const GaussRule& rule);

/// S(m, l) = integral from -1 to x_m of the l-th Lagrange basis polynomial.
/// Cumulative (indefinite) integration of an interpolant sampled on the rule.
Eigen::MatrixXd integration_matrix(const GaussRule& rule);

/// Composite Gauss-Legendre integral of f over [a, b] with equal panels.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels, int order);

}  // namespace powertail::quad
