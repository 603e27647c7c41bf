#pragma once

#include <Eigen/Dense>

namespace powertail::linalg {

struct PowerIterationResult {
  double norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Largest singular value of q by power iteration on q^dagger q, started
/// from a fixed deterministic vector.
PowerIterationResult power_norm(const Eigen::MatrixXcd& q, int max_iterations = 20,
                                double tolerance = 1e-8);

/// Largest singular value by full SVD. For tests and small diagnostics.
double op_norm(const Eigen::MatrixXcd& q);

}  // namespace powertail::linalg
