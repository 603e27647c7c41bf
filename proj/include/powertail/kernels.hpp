#pragma once

// Hot loops of the propagators and the Filon transforms, in two builds:
// `serial` (reference) and `omp` (OpenMP). Both visit reductions in the
// same fixed-size blocks and combine block sums in block order, so the two
// backends return bit-identical results for any thread count.

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>

#include "powertail/oscint.hpp"

namespace powertail::kernels {

using cplx = std::complex<double>;

enum class Backend { serial, omp };

inline constexpr std::ptrdiff_t kReductionBlock = 256;

const char* to_string(Backend b);
Backend backend_from_string(const std::string& s);

namespace serial {

/// sum_j c_j * amps_j
cplx coupling_overlap(std::span<const double> c, std::span<const cplx> amps);

/// One co-rotating Strang step
///   amps <- phase .* amps;  (bound, amps) <- exp(-i angle A) (bound, amps);  amps <- phase .* amps
/// where phase holds exp(-i (h/2) tau E_j).
void strang_step(cplx& bound, std::span<cplx> amps, std::span<const cplx> half_phase,
                 std::span<const double> c, double angle);

/// strang_step applied to every column of `states` (row 0 = bound amplitude).
void strang_step_columns(Eigen::MatrixXcd& states, std::span<const cplx> half_phase,
                         std::span<const double> c, double angle);

/// out_j = integral of the tabulated function times exp(i omega_j t).
void filon_integrals(const oscint::FilonTable& table, std::span<const double> omegas,
                     std::span<cplx> out);

}  // namespace serial

namespace omp {

cplx coupling_overlap(std::span<const double> c, std::span<const cplx> amps);
void strang_step(cplx& bound, std::span<cplx> amps, std::span<const cplx> half_phase,
                 std::span<const double> c, double angle);
void strang_step_columns(Eigen::MatrixXcd& states, std::span<const cplx> half_phase,
                         std::span<const double> c, double angle);
void filon_integrals(const oscint::FilonTable& table, std::span<const double> omegas,
                     std::span<cplx> out);

}  // namespace omp

inline void strang_step(Backend b, cplx& bound, std::span<cplx> amps,
                        std::span<const cplx> half_phase, std::span<const double> c, double angle) {
  if (b == Backend::omp) omp::strang_step(bound, amps, half_phase, c, angle);
  else serial::strang_step(bound, amps, half_phase, c, angle);
}

inline void strang_step_columns(Backend b, Eigen::MatrixXcd& states, std::span<const cplx> half_phase,
                                std::span<const double> c, double angle) {
  if (b == Backend::omp) omp::strang_step_columns(states, half_phase, c, angle);
  else serial::strang_step_columns(states, half_phase, c, angle);
}

inline void filon_integrals(Backend b, const oscint::FilonTable& table,
                            std::span<const double> omegas, std::span<cplx> out) {
  if (b == Backend::omp) omp::filon_integrals(table, omegas, out);
  else serial::filon_integrals(table, omegas, out);
}

/// Coefficients of exp(-i angle A) restricted to span{e0, c}.
struct KickCoefficients {
  double cos_minus_one;
  double sin;
};

inline KickCoefficients kick_coefficients(double angle) {
  const double h = std::sin(0.5 * angle);
  return {-2.0 * h * h, std::sin(angle)};
}

}  // namespace powertail::kernels
