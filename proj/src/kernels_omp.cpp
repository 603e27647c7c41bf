#include <omp.h>

#include <vector>

#include "powertail/kernels.hpp"

namespace powertail::kernels::omp {

namespace {

// Below this many amplitudes a parallel region costs more than it saves.
constexpr std::ptrdiff_t kParallelThreshold = 4 * kReductionBlock;

cplx block_overlap(const double* c, const cplx* a, std::ptrdiff_t n) {
  double re = 0.0, im = 0.0;
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    re += c[j] * a[j].real();
    im += c[j] * a[j].imag();
  }
  return {re, im};
}

std::ptrdiff_t n_blocks(std::ptrdiff_t n) { return (n + kReductionBlock - 1) / kReductionBlock; }

}  // namespace

cplx coupling_overlap(std::span<const double> c, std::span<const cplx> amps) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(amps.size());
  const std::ptrdiff_t nb = n_blocks(n);
  std::vector<cplx> partial(nb);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::ptrdiff_t b0 = b * kReductionBlock;
    partial[b] = block_overlap(c.data() + b0, amps.data() + b0, std::min(kReductionBlock, n - b0));
  }
  cplx total = 0.0;
  for (const cplx& p : partial) total += p;
  return total;
}

void strang_step(cplx& bound, std::span<cplx> amps, std::span<const cplx> half_phase,
                 std::span<const double> c, double angle) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(amps.size());
  const std::ptrdiff_t nb = n_blocks(n);
  std::vector<cplx> partial(nb);
  const auto k = kick_coefficients(angle);
  const cplx mi_sin(0.0, -k.sin);
  cplx f = 0.0;
#pragma omp parallel if (n >= kParallelThreshold)
  {
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < nb; ++b) {
      const std::ptrdiff_t b0 = b * kReductionBlock;
      const std::ptrdiff_t len = std::min(kReductionBlock, n - b0);
      for (std::ptrdiff_t j = b0; j < b0 + len; ++j) amps[j] *= half_phase[j];
      partial[b] = block_overlap(c.data() + b0, amps.data() + b0, len);
    }
#pragma omp single
    {
      cplx ov = 0.0;
      for (const cplx& p : partial) ov += p;
      const cplx x0 = bound;
      bound = (1.0 + k.cos_minus_one) * x0 + mi_sin * ov;
      f = k.cos_minus_one * ov + mi_sin * x0;
    }
#pragma omp for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j) amps[j] = (amps[j] + c[j] * f) * half_phase[j];
  }
}

void strang_step_columns(Eigen::MatrixXcd& states, std::span<const cplx> half_phase,
                         std::span<const double> c, double angle) {
  const Eigen::Index rows = states.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index col = 0; col < states.cols(); ++col) {
    cplx* p = states.col(col).data();
    serial::strang_step(p[0], std::span<cplx>(p + 1, rows - 1), half_phase, c, angle);
  }
}

void filon_integrals(const oscint::FilonTable& table, std::span<const double> omegas,
                     std::span<cplx> out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(omegas.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = table.integral(omegas[j]);
}

}  // namespace powertail::kernels::omp
