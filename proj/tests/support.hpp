#pragma once

// Shared helpers for the unit and acceptance tests: small model builders,
// a hand-rolled generator for property tests, and dense reference
// propagators that do not go through the library's integrators.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "powertail/model.hpp"

namespace testsupport {

using cplx = std::complex<double>;
using powertail::FriedrichsModel;

inline FriedrichsModel make_model(double beta, double gap, double theta, int n_panels, int npp,
                                  double k_min, double k_max = 1.0, double cutoff = 0.5) {
  const auto grid = powertail::build_grid(k_max, n_panels, npp, k_min);
  const auto ff = powertail::build_form_factor(grid, beta, cutoff);
  return powertail::assemble_model(grid, ff, powertail::build_switching(theta), gap);
}

/// splitmix64
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal() {
    const double u = 1.0 - uniform(), v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
  }
  cplx cnormal() { return {normal(), normal()}; }
  int integer(int lo, int hi) { return lo + int(next() % std::uint64_t(hi - lo + 1)); }

 private:
  std::uint64_t state_;
};

inline Eigen::VectorXcd random_unit_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.cnormal();
  return v / v.norm();
}

inline Eigen::MatrixXcd random_matrix(Rng& rng, Eigen::Index n) {
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rng.cnormal();
  return m;
}

inline Eigen::MatrixXcd random_hermitian(Rng& rng, Eigen::Index n) {
  const Eigen::MatrixXcd m = random_matrix(rng, n);
  return 0.5 * (m + m.adjoint());
}

/// A built directly from the coupling vector.
inline Eigen::MatrixXcd coupling_matrix(const Eigen::VectorXd& c) {
  const Eigen::Index n = c.size();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  for (Eigen::Index j = 0; j < n; ++j) a(0, j + 1) = a(j + 1, 0) = c[j];
  return a;
}

inline Eigen::MatrixXcd diag_h(const FriedrichsModel& m) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m.dimension(), m.dimension());
  for (Eigen::Index j = 0; j < m.n_nodes(); ++j) h(j + 1, j + 1) = m.continuum_energies()[j];
  return h;
}

/// exp(i theta A) by the matrix exponential.
inline Eigen::MatrixXcd rotation_expm(const FriedrichsModel& m, double theta) {
  const Eigen::MatrixXcd ia = cplx(0.0, theta) * coupling_matrix(m.coupling());
  return ia.exp();
}

/// Lab-frame Hamiltonian H(s) = V(g(s)) H V(g(s))^dagger.
inline Eigen::MatrixXcd lab_hamiltonian(const FriedrichsModel& m, double s) {
  const Eigen::MatrixXcd v = rotation_expm(m, m.switching().g(s));
  return v * diag_h(m) * v.adjoint();
}

/// Lab-frame propagator of i psi' = tau H(s) psi from 0 to each s in `s_out`
/// (ascending) by fourth-order Magnus steps of size at most h.
inline std::vector<Eigen::MatrixXcd> lab_propagator_magnus4(const FriedrichsModel& m, double tau,
                                                            const std::vector<double>& s_out, double h) {
  const Eigen::Index d = m.dimension();
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(d, d);
  std::vector<Eigen::MatrixXcd> out;
  double s = 0.0;
  const double c = std::sqrt(3.0) / 6.0;
  for (double target : s_out) {
    const int steps = std::max(1, int(std::ceil((target - s) / h - 1e-12)));
    const double dt = (target - s) / steps;
    for (int k = 0; k < steps && dt > 0.0; ++k) {
      const double a = s + k * dt;
      const Eigen::MatrixXcd a1 = cplx(0.0, -tau) * lab_hamiltonian(m, a + (0.5 - c) * dt);
      const Eigen::MatrixXcd a2 = cplx(0.0, -tau) * lab_hamiltonian(m, a + (0.5 + c) * dt);
      const Eigen::MatrixXcd om =
          0.5 * dt * (a1 + a2) + (std::sqrt(3.0) / 12.0) * dt * dt * (a2 * a1 - a1 * a2);
      u = om.exp() * u;
    }
    s = target;
    out.push_back(u);
  }
  return out;
}

inline double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace testsupport
