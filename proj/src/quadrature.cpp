#include "powertail/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "powertail/errors.hpp"

namespace powertail::quad {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("gauss_legendre: order must be >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton on P_n from the Tricomi-type initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // Refresh the derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

std::vector<double> legendre_values(int n, double x) {
  std::vector<double> p(n + 1);
  p[0] = 1.0;
  if (n >= 1) p[1] = x;
  for (int k = 2; k <= n; ++k)
    p[k] = ((2.0 * k - 1.0) * x * p[k - 1] - (k - 1.0) * p[k - 2]) / k;
  return p;
}

Eigen::MatrixXd legendre_transform(const GaussRule& rule) {
  const int q = static_cast<int>(rule.size());
  Eigen::MatrixXd t(q, q);
  for (int l = 0; l < q; ++l) {
    const auto p = legendre_values(q - 1, rule.nodes[l]);
    for (int n = 0; n < q; ++n) t(n, l) = 0.5 * (2.0 * n + 1.0) * rule.weights[l] * p[n];
  }
  return t;
}

Eigen::MatrixXd integration_matrix(const GaussRule& rule) {
  const int q = static_cast<int>(rule.size());
  const Eigen::MatrixXd t = legendre_transform(rule);
  // antideriv(m, n) = integral_{-1}^{x_m} P_n
  Eigen::MatrixXd antideriv(q, q);
  for (int m = 0; m < q; ++m) {
    const double x = rule.nodes[m];
    const auto p = legendre_values(q, x);
    antideriv(m, 0) = x + 1.0;
    for (int n = 1; n < q; ++n) antideriv(m, n) = (p[n + 1] - p[n - 1]) / (2.0 * n + 1.0);
  }
  return antideriv * t;
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels,
                 int order) {
  const GaussRule rule = gauss_legendre(order);
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double part = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) part += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    total += 0.5 * h * part;
  }
  return total;
}

}  // namespace powertail::quad
