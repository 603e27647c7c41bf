#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

namespace powertail {

using cplx = std::complex<double>;

/// Geometric panel subdivision of [k_min, k_max]; edges[0] = k_max and
/// edges descend by a constant ratio down to edges.back() = k_min.
struct PanelLayout {
  std::vector<double> edges;
  int nodes_per_panel = 0;
  double ratio = 0.0;
  int n_panels() const { return static_cast<int>(edges.size()) - 1; }
};

/// Quadrature representation of L^2(R_+, dk) restricted to [k_min, k_max].
struct DiscretizedMeasure {
  Eigen::VectorXd nodes;    // strictly increasing
  Eigen::VectorXd weights;  // positive
  double k_min = 0.0;
  double k_max = 0.0;
  PanelLayout panel_layout;

  Eigen::Index size() const { return nodes.size(); }
  /// Weighted sum of f over the nodes.
  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (Eigen::Index j = 0; j < nodes.size(); ++j) s += weights[j] * f(nodes[j]);
    return s;
  }
};

DiscretizedMeasure build_grid(double k_max, int n_panels, int nodes_per_panel, double k_min);

/// Number of panels that gives grading ratio <= `ratio` between k_min and k_max.
int panels_for_ratio(double k_max, double k_min, double ratio);

/// Smooth step: 1 for x <= 0, 0 for x >= 1, C-infinity in between.
double smooth_step_down(double x);

/// phi_raw(k) = sqrt(2 beta) k^(beta - 1/2) c(k), c the smooth cutoff that
/// is 1 below `onset` and 0 at k_max.
double form_factor_raw(double k, double beta, double onset, double k_max);

struct FormFactor {
  double beta = 0.0;
  Eigen::VectorXd values;  // phi(k_j), normalized
  double cutoff_fraction = 0.5;
  double norm_constant = 1.0;  // phi = norm_constant * phi_raw
};

FormFactor build_form_factor(const DiscretizedMeasure& grid, double beta,
                             double cutoff_fraction = 0.5);

/// Driving angle g(s) with gdot = theta_total * b(s) / Z, where
/// b(s) = exp(-1 / (4 s (1 - s))) on (0, 1); b is the bump exp(-1/(1-x^2))
/// mapped from [-1, 1] onto [0, 1].
class SwitchingProfile {
 public:
  explicit SwitchingProfile(double theta_total);

  double gdot(double s) const;
  double gddot(double s) const;
  double g(double s) const;
  double theta_total() const { return theta_; }
  double gdot_max() const { return gdot(0.5); }
  static constexpr double support_begin = 0.0;
  static constexpr double support_end = 1.0;

  /// Unnormalized bump b(s).
  static double bump(double s);
  /// Z = integral of b over [0, 1].
  static double bump_integral();

 private:
  double theta_;
  double scale_;  // theta / Z
};

SwitchingProfile build_switching(double theta_total);

/// The discretized Friedrichs model. Basis index 0 is the bound state e0;
/// index 1 + j is the continuum node k_j.
class FriedrichsModel {
 public:
  /// Model with arbitrary continuum modes. Coupling must have unit norm.
  static FriedrichsModel from_modes(Eigen::VectorXd node_energies, Eigen::VectorXd coupling,
                                    SwitchingProfile switching, double gap_shift);

  Eigen::Index n_nodes() const { return coupling_.size(); }
  Eigen::Index dimension() const { return 1 + coupling_.size(); }
  const Eigen::VectorXd& coupling() const { return coupling_; }
  /// k_j + gap_shift; the bound state sits at energy 0.
  const Eigen::VectorXd& continuum_energies() const { return energies_; }
  double max_energy() const { return energies_.size() ? energies_.maxCoeff() : 0.0; }
  double gap_shift() const { return gap_; }
  const SwitchingProfile& switching() const { return switching_; }
  const std::optional<DiscretizedMeasure>& measure() const { return measure_; }
  const std::optional<FormFactor>& form_factor() const { return form_factor_; }

  /// Diagonal of H: (0, k_1 + gap, ..., k_N + gap).
  Eigen::VectorXd diag_energies() const;
  Eigen::MatrixXcd hamiltonian_dense() const;
  /// A e0 = c, A v = <c, v> e0.
  Eigen::MatrixXcd coupling_dense() const;
  Eigen::MatrixXcd projection_dense() const;

 private:
  friend FriedrichsModel assemble_model(const DiscretizedMeasure&, const FormFactor&,
                                        const SwitchingProfile&, double);
  FriedrichsModel(Eigen::VectorXd energies, Eigen::VectorXd coupling, SwitchingProfile sw,
                  double gap);

  Eigen::VectorXd energies_;
  Eigen::VectorXd coupling_;
  SwitchingProfile switching_;
  double gap_;
  std::optional<DiscretizedMeasure> measure_;
  std::optional<FormFactor> form_factor_;
};

FriedrichsModel assemble_model(const DiscretizedMeasure& grid, const FormFactor& form_factor,
                               const SwitchingProfile& switching, double gap_shift);

enum class Frame { lab, rotating, interaction };

const char* to_string(Frame f);

struct RotatingState {
  cplx bound_amp{1.0, 0.0};
  Eigen::VectorXcd continuum_amps;
  Frame frame = Frame::rotating;
  double time_s = 0.0;

  static RotatingState bound_state(Eigen::Index n_nodes, Frame frame = Frame::rotating);
  static RotatingState from_vector(const Eigen::VectorXcd& v, Frame frame, double s);
  Eigen::VectorXcd to_vector() const;
  double norm() const;
  double continuum_norm() const { return continuum_amps.norm(); }
};

/// V(theta) state with V(theta) = exp(i theta A)
///   = 1 + (cos theta - 1) Pi + i sin theta A,  Pi = A^2.
RotatingState apply_rotation(const FriedrichsModel& model, double theta, const RotatingState& state);

/// Dense V(theta), built column by column from apply_rotation.
Eigen::MatrixXcd rotation_dense(const FriedrichsModel& model, double theta);

/// P(s) = V(g(s)) P V(g(s))^dagger.
Eigen::MatrixXcd projection_at(const FriedrichsModel& model, double s);
/// dP/ds = i gdot(s) [A, P(s)].
Eigen::MatrixXcd projection_derivative(const FriedrichsModel& model, double s);

}  // namespace powertail
