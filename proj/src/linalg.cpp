#include "powertail/linalg.hpp"

#include <cmath>

namespace powertail::linalg {

PowerIterationResult power_norm(const Eigen::MatrixXcd& q, int max_iterations, double tolerance) {
  PowerIterationResult r;
  const Eigen::Index n = q.cols();
  if (n == 0 || q.rows() == 0) {
    r.converged = true;
    return r;
  }
  // Non-symmetric start so no singular direction is missed by accident.
  Eigen::VectorXcd v(n);
  for (Eigen::Index j = 0; j < n; ++j)
    v[j] = std::complex<double>(1.0 + 0.1 * std::sin(1.0 + j), 0.05 * std::cos(2.0 + 3.0 * j));
  v.normalize();
  double prev = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXcd u = q * v;
    const double est = u.norm();
    r.norm = est;
    r.iterations = it;
    if (est == 0.0) {
      r.converged = true;
      return r;
    }
    Eigen::VectorXcd w = q.adjoint() * u;
    const double wn = w.norm();
    if (wn == 0.0) {
      r.converged = true;
      return r;
    }
    v = w / wn;
    if (it > 1 && std::abs(est - prev) <= tolerance * est) {
      r.converged = true;
      break;
    }
    prev = est;
  }
  // Rayleigh estimate from the final vector is at least as good as the last u.
  r.norm = std::max(r.norm, (q * v).norm());
  return r;
}

double op_norm(const Eigen::MatrixXcd& q) {
  if (q.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(q);
  return svd.singularValues()(0);
}

}  // namespace powertail::linalg
