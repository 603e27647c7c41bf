#include <stdexcept>

#include "powertail/errors.hpp"
#include "powertail/kernels.hpp"

namespace powertail::kernels {

const char* to_string(Backend b) { return b == Backend::omp ? "omp" : "serial"; }

Backend backend_from_string(const std::string& s) {
  if (s == "serial") return Backend::serial;
  if (s == "omp") return Backend::omp;
  throw ConfigError("unknown backend '" + s + "' (expected serial or omp)");
}

namespace serial {

namespace {

cplx block_overlap(const double* c, const cplx* a, std::ptrdiff_t n) {
  double re = 0.0, im = 0.0;
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    re += c[j] * a[j].real();
    im += c[j] * a[j].imag();
  }
  return {re, im};
}

// Phase the amplitudes and return sum_j c_j amps_j, block by block.
cplx phase_and_overlap(std::span<cplx> amps, std::span<const cplx> phase, std::span<const double> c) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(amps.size());
  cplx total = 0.0;
  for (std::ptrdiff_t b0 = 0; b0 < n; b0 += kReductionBlock) {
    const std::ptrdiff_t len = std::min(kReductionBlock, n - b0);
    for (std::ptrdiff_t j = b0; j < b0 + len; ++j) amps[j] *= phase[j];
    total += block_overlap(c.data() + b0, amps.data() + b0, len);
  }
  return total;
}

}  // namespace

cplx coupling_overlap(std::span<const double> c, std::span<const cplx> amps) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(amps.size());
  cplx total = 0.0;
  for (std::ptrdiff_t b0 = 0; b0 < n; b0 += kReductionBlock)
    total += block_overlap(c.data() + b0, amps.data() + b0, std::min(kReductionBlock, n - b0));
  return total;
}

void strang_step(cplx& bound, std::span<cplx> amps, std::span<const cplx> half_phase,
                 std::span<const double> c, double angle) {
  const cplx ov = phase_and_overlap(amps, half_phase, c);
  const auto k = kick_coefficients(angle);
  const cplx mi_sin(0.0, -k.sin);
  const cplx x0 = bound;
  bound = (1.0 + k.cos_minus_one) * x0 + mi_sin * ov;
  const cplx f = k.cos_minus_one * ov + mi_sin * x0;
  const std::size_t n = amps.size();
  for (std::size_t j = 0; j < n; ++j) amps[j] = (amps[j] + c[j] * f) * half_phase[j];
}

void strang_step_columns(Eigen::MatrixXcd& states, std::span<const cplx> half_phase,
                         std::span<const double> c, double angle) {
  const Eigen::Index rows = states.rows();
  for (Eigen::Index col = 0; col < states.cols(); ++col) {
    cplx* p = states.col(col).data();
    strang_step(p[0], std::span<cplx>(p + 1, rows - 1), half_phase, c, angle);
  }
}

void filon_integrals(const oscint::FilonTable& table, std::span<const double> omegas,
                     std::span<cplx> out) {
  for (std::size_t j = 0; j < omegas.size(); ++j) out[j] = table.integral(omegas[j]);
}

}  // namespace serial
}  // namespace powertail::kernels
