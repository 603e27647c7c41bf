#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "powertail/kernels.hpp"
#include "powertail/model.hpp"

namespace powertail {

enum class Scheme { strang_split, interaction_magnus, automatic };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct IntegratorConfig {
  Scheme scheme = Scheme::automatic;
  /// Upper bound on the step; the effective step is also capped so that
  /// h * tau * E_max <= phase_per_step and h * max(gdot) <= max_kick.
  double max_step = 1e-3;
  double phase_per_step = 0.05;
  double max_kick = 0.05;
  double s_end = 1.5;
  std::vector<double> record_times{1.5};
  /// Uniform samples of [0, 1] used for the in-window sup of the leak.
  int window_samples = 200;
  /// Largest Strang cost (steps x nodes) before `automatic` switches to
  /// interaction_magnus.
  double step_budget = 1e10;
  kernels::Backend backend = kernels::Backend::serial;
  double drift_tolerance = 1e-9;

  void validate() const;
};

struct TrajectorySample {
  double s = 0.0;
  RotatingState state;  // rotating frame
  double leak = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;  // one per record time, ascending
  double tau = 0.0;
  double unitarity_drift = 0.0;
  std::vector<double> window_s;
  std::vector<double> window_leak;
  double sup_window_leak = 0.0;
  Scheme scheme_used = Scheme::strang_split;
  long long steps = 0;
};

/// Step size used by the Strang scheme for this model and tau.
double strang_step_size(const FriedrichsModel& model, double tau, const IntegratorConfig& config);
/// Scheme that `evolve_true` will run.
Scheme resolve_scheme(const FriedrichsModel& model, double tau, const IntegratorConfig& config);

/// Integrates i chi' = (tau H + gdot(s) A) chi in the co-rotating frame.
Trajectory evolve_true(const FriedrichsModel& model, double tau, const IntegratorConfig& config,
                       const RotatingState* initial = nullptr);

/// Rotating-frame propagator X(s) at each of `s_values` (ascending, >= 0),
/// obtained by Strang-evolving every basis column.
std::vector<Eigen::MatrixXcd> evolve_basis(const FriedrichsModel& model, double tau,
                                           const IntegratorConfig& config,
                                           const std::vector<double>& s_values);

/// Streaming form of evolve_basis: visit(index, s, X(s)) is called once
/// per entry of `s_values`, in order.
void evolve_basis_visit(const FriedrichsModel& model, double tau, const IntegratorConfig& config,
                        const std::vector<double>& s_values,
                        const std::function<void(std::size_t, double, const Eigen::MatrixXcd&)>& visit);

/// U_r(s) e0 = V(g(s)) e0, lab frame.
RotatingState adiabatic_state(const FriedrichsModel& model, double tau, double s);

/// U_r(s) = V(g(s)) exp(-i tau s H), dense.
Eigen::MatrixXcd adiabatic_propagator(const FriedrichsModel& model, double tau, double s);

/// ||(1 - P(s)) psi||. Lab-frame states are pulled back with V(g(s))^dagger.
double leak(const FriedrichsModel& model, const RotatingState& state);

struct GeneratorSample {
  double s = 0.0;
  double h_ad_minus_h_r = 0.0;
  double kato_block_pp = 0.0;  // ||P [Pdot, P] P||
  double kato_block_qq = 0.0;  // ||P_perp [Pdot, P] P_perp||
  double fd_error_h = 0.0;     // ||Pdot - central difference||, step h
  double fd_error_h2 = 0.0;    // same with step h/2
  double fd_ratio = 0.0;
};

struct GeneratorReport {
  std::vector<GeneratorSample> samples;
  double max_h_ad_minus_h_r = 0.0;
  double max_kato_diagonal = 0.0;
};

GeneratorReport verify_generators(const FriedrichsModel& model, double tau,
                                  const std::vector<double>& s_samples, double fd_step = 1e-3);

}  // namespace powertail
