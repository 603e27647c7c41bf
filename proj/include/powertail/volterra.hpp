#pragma once

#include <Eigen/Dense>
#include <vector>

#include "powertail/model.hpp"
#include "powertail/propagate.hpp"

namespace powertail {

/// K_AD(t) = -i gdot(t) exp(i tau t H) A exp(-i tau t H), applied in O(N).
class InteractionKernel {
 public:
  InteractionKernel(const FriedrichsModel& model, double tau);

  /// out = K_AD(t) v (vectors of length 1 + N).
  void apply(double t, const Eigen::VectorXcd& v, Eigen::VectorXcd& out) const;
  Eigen::VectorXcd apply(double t, const Eigen::VectorXcd& v) const;
  Eigen::MatrixXcd dense(double t) const;
  /// sup_t ||K_AD(t)|| = max gdot (since ||A|| = 1).
  double sup_norm() const;

 private:
  const FriedrichsModel* model_;
  double tau_;
};

struct WaveOperatorSeries {
  std::vector<Eigen::MatrixXcd> terms;  // Omega_0 ... Omega_M at s_eval
  double tau = 0.0;
  int quad_order = 0;
  int n_panels = 0;
  double s_eval = 0.0;

  Eigen::MatrixXcd partial_sum(int up_to) const;
};

/// Volterra terms Omega_i(s_eval), i <= max_order, by nested cumulative
/// Gauss quadrature over the simplex.
WaveOperatorSeries omega_series(const FriedrichsModel& model, double tau, int max_order,
                                int quad_order = 64, double s_eval = 1.0);

struct Omega1Tail {
  Eigen::VectorXcd column;  // continuum part of Omega_1 e0 for s > 1
  double norm = 0.0;
};

/// Entries -i gdot_hat(tau k_j) c_j; gapless models only.
Omega1Tail omega1_tail(const FriedrichsModel& model, double tau);

/// Omega(s) = exp(i tau s H) X(s) at each s, from basis evolution.
std::vector<Eigen::MatrixXcd> wave_operator(const FriedrichsModel& model, double tau,
                                            const IntegratorConfig& config,
                                            const std::vector<double>& s_values);

/// 200 uniform points of [0, 1] plus 1.
std::vector<double> default_f_grid();

struct FOfTau {
  double value = 0.0;
  double argmax_s = 0.0;
  std::vector<double> q_norms;  // ||1 - Omega(s)|| per grid point
};

/// sup over s_grid of ||1 - Omega(s)||, power iteration on Q^dagger Q.
FOfTau f_of_tau(const FriedrichsModel& model, double tau, const std::vector<double>& s_grid,
                const IntegratorConfig& config = {});

}  // namespace powertail
