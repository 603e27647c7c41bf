#include "powertail/contour.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "powertail/errors.hpp"
#include "powertail/linalg.hpp"
#include "powertail/propagate.hpp"
#include "powertail/quadrature.hpp"

namespace powertail {

namespace {
constexpr cplx kI{0.0, 1.0};
// Global sign of the right-hand side, fixed by the 2x2 oracle in the tests.
constexpr int kIbpSign = -1;
}  // namespace

double unit_uniform(std::uint64_t bits) { return double(bits >> 11) * 0x1.0p-53; }

ContourSpec default_contour(const FriedrichsModel& model, int n_points) {
  if (!(model.gap_shift() > 0.0)) throw SpectralSeparationError("default_contour: no gap to enclose (gap_shift = 0)");
  return {cplx(0.0, 0.0), 0.5 * model.gap_shift(), n_points};
}

void check_separation(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& p, const ContourSpec& contour) {
  if (contour.n_points < 16) throw ConfigError("contour: n_points must be >= 16");
  if (!(contour.radius > 0.0)) throw ConfigError("contour: radius must be > 0");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  const int rank = int(std::lround(p.trace().real()));
  int inside = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double dist = std::abs(cplx(es.eigenvalues()[i], 0.0) - contour.center);
    if (dist <= 0.75 * contour.radius) {
      ++inside;
    } else if (dist < 1.25 * contour.radius) {
      throw SpectralSeparationError("contour: eigenvalue " + std::to_string(es.eigenvalues()[i]) +
                                    " lies within radius/4 of the circle");
    }
  }
  if (inside != rank)
    throw SpectralSeparationError("contour: encloses " + std::to_string(inside) + " eigenvalues, P has rank " +
                                  std::to_string(rank));
}

Eigen::MatrixXcd tilde(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& p, const Eigen::MatrixXcd& x,
                       const ContourSpec& contour) {
  check_separation(h, p, contour);
  const Eigen::Index d = h.rows();
  const int n = contour.n_points;
  std::vector<Eigen::MatrixXcd> parts(n);
#pragma omp parallel for schedule(static)
  for (int m = 0; m < n; ++m) {
    const cplx dir = std::polar(1.0, 2.0 * std::numbers::pi * (m + 0.5) / n);
    const cplx z = contour.center + contour.radius * dir;
    Eigen::MatrixXcd shifted = h;
    shifted.diagonal().array() -= z;
    const Eigen::MatrixXcd r = Eigen::PartialPivLU<Eigen::MatrixXcd>(shifted).inverse();
    parts[m] = r * x * r;
    parts[m] *= contour.radius * dir;
  }
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
  for (int m = 0; m < n; ++m) sum += parts[m];
  return -sum / double(n);
}

Eigen::MatrixXcd tilde_eigenbasis(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& p,
                                  const Eigen::MatrixXcd& x, const ContourSpec& contour) {
  check_separation(h, p, contour);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const auto& lam = es.eigenvalues();
  const Eigen::MatrixXcd& q = es.eigenvectors();
  const Eigen::Index d = h.rows();
  std::vector<bool> in(d);
  for (Eigen::Index i = 0; i < d; ++i) in[i] = std::abs(cplx(lam[i], 0.0) - contour.center) <= 0.75 * contour.radius;
  Eigen::MatrixXcd xe = q.adjoint() * x * q;
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      if (in[a] == in[b]) xe(a, b) = 0.0;
      else if (in[a]) xe(a, b) /= (lam[b] - lam[a]);
      else xe(a, b) /= (lam[a] - lam[b]);
    }
  }
  return q * xe * q.adjoint();
}

MatrixProfile kato_commutator_profile(const FriedrichsModel& model) {
  const FriedrichsModel* m = &model;
  MatrixProfile prof;
  prof.value = [m](double s) {
    const Eigen::MatrixXcd p = projection_at(*m, s);
    const Eigen::MatrixXcd pd = projection_derivative(*m, s);
    return Eigen::MatrixXcd(pd * p - p * pd);
  };
  prof.derivative = [m](double s) {
    // d/ds [Pdot, P] = [Pddot, P], Pddot = i gddot [A, P] + i gdot [A, Pdot].
    const Eigen::MatrixXcd a = m->coupling_dense();
    const Eigen::MatrixXcd p = projection_at(*m, s);
    const Eigen::MatrixXcd pd = projection_derivative(*m, s);
    const auto& sw = m->switching();
    const Eigen::MatrixXcd pdd = kI * sw.gddot(s) * (a * p - p * a) + kI * sw.gdot(s) * (a * pd - pd * a);
    return Eigen::MatrixXcd(pdd * p - p * pdd);
  };
  return prof;
}

MatrixProfile random_polynomial_profile(Eigen::Index dim, int degree, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Eigen::MatrixXcd> coeffs(degree + 1, Eigen::MatrixXcd(dim, dim));
  for (auto& mk : coeffs)
    for (Eigen::Index j = 0; j < dim; ++j)
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double re = 2.0 * unit_uniform(rng()) - 1.0;
        const double im = 2.0 * unit_uniform(rng()) - 1.0;
        mk(i, j) = cplx(re, im);
      }
  MatrixProfile prof;
  prof.value = [coeffs](double s) {
    Eigen::MatrixXcd v = coeffs.back();
    for (int k = int(coeffs.size()) - 2; k >= 0; --k) v = v * s + coeffs[k];
    return v;
  };
  prof.derivative = [coeffs](double s) {
    const Eigen::Index d = coeffs.front().rows();
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(d, d);
    for (int k = int(coeffs.size()) - 1; k >= 1; --k) v = v * s + double(k) * coeffs[k];
    return v;
  };
  return prof;
}

IbpResult verify_ibp(const FriedrichsModel& model, double tau, const MatrixProfile& x, const MatrixProfile& y,
                     double s, int quad_order, int contour_points) {
  if (!(model.gap_shift() > 0.0)) throw ConfigError("verify_ibp: requires gap_shift > 0");
  if (model.n_nodes() > 128) throw ResourceError("verify_ibp: N exceeds 128");
  if (!(tau > 0.0) || !(s > 0.0)) throw ConfigError("verify_ibp: need tau > 0 and s > 0");
  if (quad_order < 1) throw ConfigError("verify_ibp: quad_order must be >= 1");
  const Eigen::Index d = model.dimension();
  const ContourSpec contour = default_contour(model, contour_points);
  const Eigen::MatrixXcd h0 = model.hamiltonian_dense();
  const Eigen::MatrixXcd p0 = model.projection_dense();
  const Eigen::MatrixXcd a = model.coupling_dense();
  const Eigen::MatrixXcd q0 = Eigen::MatrixXcd::Identity(d, d) - p0;
  const auto& sw = model.switching();

  struct AtT {
    Eigen::MatrixXcd u, xt, xt_dot;
  };
  auto at = [&](double t) {
    AtT r;
    const Eigen::MatrixXcd v = rotation_dense(model, sw.g(t));
    r.u = adiabatic_propagator(model, tau, t);
    const Eigen::MatrixXcd xv = x.value(t);
    const Eigen::MatrixXcd xd = x.derivative(t);
    r.xt = tilde(v * h0 * v.adjoint(), v * p0 * v.adjoint(), xv, contour);
    // X~(t) = V tilde_H(V^dag X V) V^dag, differentiated with V' = i gdot A V.
    const double gd = sw.gdot(t);
    const Eigen::MatrixXcd inner = v.adjoint() * (xd + kI * gd * (xv * a - a * xv)) * v;
    r.xt_dot = kI * gd * (a * r.xt - r.xt * a) + v * tilde(h0, p0, inner, contour) * v.adjoint();
    return r;
  };

  const quad::GaussRule rule = quad::gauss_legendre(quad_order);
  Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Zero(d, d);
  Eigen::MatrixXcd rhs_int = Eigen::MatrixXcd::Zero(d, d);
  for (int l = 0; l < quad_order; ++l) {
    const double t = 0.5 * s * (1.0 + rule.nodes[l]);
    const double w = 0.5 * s * rule.weights[l];
    const AtT r = at(t);
    const Eigen::MatrixXcd ud = r.u.adjoint();
    lhs += w * (ud * x.value(t) * r.u * p0 * y.value(t));
    rhs_int += w * (ud * r.xt_dot * r.u * p0 * y.value(t) + ud * r.xt * r.u * p0 * y.derivative(t));
  }
  lhs = q0 * lhs;
  const AtT rs = at(s), r0 = at(0.0);
  const Eigen::MatrixXcd boundary = rs.u.adjoint() * rs.xt * rs.u * p0 * y.value(s) -
                                    r0.u.adjoint() * r0.xt * r0.u * p0 * y.value(0.0);
  const Eigen::MatrixXcd rhs = double(kIbpSign) * (kI / tau) * (q0 * (boundary - rhs_int));
  IbpResult res;
  res.lhs_norm = linalg::op_norm(lhs);
  res.rhs_norm = linalg::op_norm(rhs);
  res.residual = linalg::op_norm(lhs - rhs);
  res.sign = kIbpSign;
  return res;
}

IbpSuite ibp_suite(const FriedrichsModel& model, double tau, double s, int quad_order,
                   const std::vector<std::uint64_t>& seeds, int contour_points) {
  IbpSuite suite;
  const Eigen::Index d = model.dimension();
  // Default Y(s) = (1 + s) 1 + s^2 A.
  const Eigen::MatrixXcd a = model.coupling_dense();
  MatrixProfile ydef;
  ydef.value = [a, d](double t) {
    return Eigen::MatrixXcd((1.0 + t) * Eigen::MatrixXcd::Identity(d, d) + t * t * a);
  };
  ydef.derivative = [a, d](double t) {
    return Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(d, d) + 2.0 * t * a);
  };
  suite.cases.push_back(verify_ibp(model, tau, kato_commutator_profile(model), ydef, s, quad_order, contour_points));
  for (std::uint64_t seed : seeds) {
    const MatrixProfile xr = random_polynomial_profile(d, 2, seed);
    const MatrixProfile yr = random_polynomial_profile(d, 2, seed ^ 0x9e3779b97f4a7c15ULL);
    IbpResult r = verify_ibp(model, tau, xr, yr, s, quad_order, contour_points);
    r.seed = seed;
    suite.cases.push_back(r);
  }
  for (const auto& r : suite.cases) suite.max_residual = std::max(suite.max_residual, r.residual);
  return suite;
}

IbpRefinement ibp_refinement(const FriedrichsModel& model, double tau, const MatrixProfile& x,
                             const MatrixProfile& y, double s, const std::vector<int>& quad_orders) {
  IbpRefinement out;
  for (int q : quad_orders) {
    out.quad_orders.push_back(q);
    out.residuals.push_back(verify_ibp(model, tau, x, y, s, q).residual);
  }
  return out;
}

std::vector<double> slaved_tail_probe(const FriedrichsModel& model, const std::vector<double>& taus,
                                      double s_probe) {
  if (!(model.gap_shift() > 0.0)) throw ConfigError("slaved_tail_probe: requires gap_shift > 0");
  if (taus.empty()) throw ConfigError("slaved_tail_probe: empty tau list");
  if (!(s_probe > 1.0)) throw ConfigError("slaved_tail_probe: s_probe must exceed 1");
  double tmin = taus.front();
  for (double t : taus) tmin = std::min(tmin, t);
  if (model.gap_shift() * tmin < 50.0) throw ConfigError("slaved_tail_probe: need gap * min(tau) >= 50");
  std::vector<double> out;
  IntegratorConfig cfg;
  cfg.record_times = {s_probe};
  cfg.s_end = s_probe;
  for (double t : taus) out.push_back(evolve_true(model, t, cfg).samples.front().leak);
  return out;
}

}  // namespace powertail
