#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "powertail/model.hpp"

namespace powertail {

struct ContourSpec {
  cplx center{0.0, 0.0};
  double radius = 0.5;
  int n_points = 64;
};

/// Circle of radius gap/2 around the bound-state energy.
ContourSpec default_contour(const FriedrichsModel& model, int n_points = 64);

/// Throws SpectralSeparationError unless the eigenvalues of h inside the
/// circle (at most 3r/4 from the center) number rank(P) and every other
/// eigenvalue lies at least 5r/4 away.
void check_separation(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& p, const ContourSpec& contour);

/// X~ = -(1/2 pi i) \oint R(z) X R(z) dz, R(z) = (H - z)^-1, trapezoid rule.
Eigen::MatrixXcd tilde(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& p, const Eigen::MatrixXcd& x,
                       const ContourSpec& contour);

/// Same operation through the eigendecomposition of h:
/// X~_ab = X_ab / (lambda_out - lambda_in) across the split, 0 within.
Eigen::MatrixXcd tilde_eigenbasis(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& p,
                                  const Eigen::MatrixXcd& x, const ContourSpec& contour);

struct MatrixProfile {
  std::function<Eigen::MatrixXcd(double)> value;
  std::function<Eigen::MatrixXcd(double)> derivative;
};

/// X(s) = [Pdot, P](s) for the model, with its exact derivative.
MatrixProfile kato_commutator_profile(const FriedrichsModel& model);

/// sum_k M_k s^k with random complex coefficients (uniform in [-1, 1]).
MatrixProfile random_polynomial_profile(Eigen::Index dim, int degree, std::uint64_t seed);

struct IbpResult {
  double lhs_norm = 0.0;
  double rhs_norm = 0.0;
  double residual = 0.0;
  /// Global sign of the right side relative to +i/tau; the 2x2 oracle fixes it at -1.
  int sign = -1;
  std::uint64_t seed = 0;
};

/// Both sides of
///   P_perp \int_0^s U^dag X U P Y dt
///     = (i/tau) P_perp ( [U^dag X~ U P Y]_0^s - \int U^dag X~' U P Y - \int U^dag X~ U P Y' )
/// with U = U_AD = V(g(t)) exp(-i tau t H), by quad_order-point Gauss rules.
IbpResult verify_ibp(const FriedrichsModel& model, double tau, const MatrixProfile& x,
                     const MatrixProfile& y, double s, int quad_order, int contour_points = 64);

struct IbpSuite {
  std::vector<IbpResult> cases;  // default pair first, then one per seed
  double max_residual = 0.0;
};

IbpSuite ibp_suite(const FriedrichsModel& model, double tau, double s, int quad_order,
                   const std::vector<std::uint64_t>& seeds, int contour_points = 64);

struct IbpRefinement {
  std::vector<int> quad_orders;
  std::vector<double> residuals;
};

IbpRefinement ibp_refinement(const FriedrichsModel& model, double tau, const MatrixProfile& x,
                             const MatrixProfile& y, double s, const std::vector<int>& quad_orders);

/// leak(s_probe) per tau on a gapped model; requires gap * min(tau) >= 50.
std::vector<double> slaved_tail_probe(const FriedrichsModel& model, const std::vector<double>& taus,
                                      double s_probe);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
double unit_uniform(std::uint64_t bits);

}  // namespace powertail
