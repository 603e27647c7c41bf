#include "powertail/volterra.hpp"

#include <cmath>
#include <string>

#include "powertail/errors.hpp"
#include "powertail/linalg.hpp"
#include "powertail/oscint.hpp"
#include "powertail/quadrature.hpp"

namespace powertail {

namespace {
constexpr cplx kI{0.0, 1.0};
}

InteractionKernel::InteractionKernel(const FriedrichsModel& model, double tau)
    : model_(&model), tau_(tau) {}

void InteractionKernel::apply(double t, const Eigen::VectorXcd& v, Eigen::VectorXcd& out) const {
  const Eigen::Index n = model_->n_nodes();
  if (v.size() != n + 1) throw ContractViolation("InteractionKernel: vector dimension mismatch");
  out.setZero(n + 1);
  const double gd = model_->switching().gdot(t);
  if (gd == 0.0) return;
  const auto& c = model_->coupling();
  const auto& e = model_->continuum_energies();
  cplx acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const cplx ph = std::polar(1.0, tau_ * t * e[j]);
    out[1 + j] = -kI * gd * c[j] * ph * v[0];
    acc += c[j] * std::conj(ph) * v[1 + j];
  }
  out[0] = -kI * gd * acc;
}

Eigen::VectorXcd InteractionKernel::apply(double t, const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd out;
  apply(t, v, out);
  return out;
}

Eigen::MatrixXcd InteractionKernel::dense(double t) const {
  const Eigen::Index d = model_->dimension();
  Eigen::MatrixXcd k(d, d);
  Eigen::VectorXcd col;
  for (Eigen::Index m = 0; m < d; ++m) {
    apply(t, Eigen::VectorXcd::Unit(d, m), col);
    k.col(m) = col;
  }
  return k;
}

double InteractionKernel::sup_norm() const { return model_->switching().gdot_max(); }

Eigen::MatrixXcd WaveOperatorSeries::partial_sum(int up_to) const {
  Eigen::MatrixXcd sum = terms.at(0);
  for (int i = 1; i <= up_to && i < int(terms.size()); ++i) sum += terms[i];
  return sum;
}

WaveOperatorSeries omega_series(const FriedrichsModel& model, double tau, int max_order, int quad_order,
                                double s_eval) {
  const Eigen::Index n = model.n_nodes();
  const Eigen::Index d = n + 1;
  if (n > 512) throw ResourceError("omega_series: N = " + std::to_string(n) + " exceeds 512");
  if (max_order > 4) throw ResourceError("omega_series: orders beyond 4 are not supported");
  if (max_order < 0) throw ConfigError("omega_series: max_order must be >= 0");
  if (quad_order < 2) throw ConfigError("omega_series: quad_order must be >= 2");
  if (!(tau > 0.0) || !(s_eval >= 0.0)) throw ConfigError("omega_series: need tau > 0, s_eval >= 0");

  WaveOperatorSeries out;
  out.tau = tau;
  out.quad_order = quad_order;
  out.s_eval = s_eval;
  out.terms.assign(max_order + 1, Eigen::MatrixXcd::Zero(d, d));
  out.terms[0] = Eigen::MatrixXcd::Identity(d, d);
  const double len = std::min(s_eval, 1.0);
  if (max_order == 0 || len <= 0.0) return out;

  const int q = quad_order;
  const int panels = std::max(8, int(std::ceil(tau * model.max_energy() * len / (0.5 * q))));
  out.n_panels = panels;
  const Eigen::Index m_nodes = Eigen::Index(panels) * q;
  const quad::GaussRule rule = quad::gauss_legendre(q);
  const double half = 0.5 * len / panels;
  const Eigen::MatrixXd s_mat = half * quad::integration_matrix(rule);
  Eigen::RowVectorXd w_row(q);
  for (int l = 0; l < q; ++l) w_row[l] = half * rule.weights[l];

  const auto& c = model.coupling();
  const auto& e = model.continuum_energies();
  Eigen::VectorXd gd(m_nodes);
  // phase(m, j) = exp(i tau t_m E_j), split into real and imaginary parts.
  Eigen::MatrixXd ph_re(m_nodes, n), ph_im(m_nodes, n);
  for (int p = 0; p < panels; ++p) {
    const double mid = (2 * p + 1) * half;
    for (int l = 0; l < q; ++l) {
      const Eigen::Index m = Eigen::Index(p) * q + l;
      const double t = mid + half * rule.nodes[l];
      gd[m] = model.switching().gdot(t);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double arg = tau * t * e[j];
        ph_re(m, j) = std::cos(arg);
        ph_im(m, j) = std::sin(arg);
      }
    }
  }

  // Nodal values of the current order applied to one basis column, kept as
  // separate real/imaginary parts: bound component b, continuum block w.
  struct Nodal {
    Eigen::VectorXd b_re, b_im;
    Eigen::MatrixXd w_re, w_im;
    bool bound_zero = true, cont_zero = true;
  };

  // Cumulative panel integration of F (rows = nodes) from 0; also the total.
  auto cumulate = [&](const Eigen::MatrixXd& f, Eigen::MatrixXd& vals, Eigen::RowVectorXd& total) {
    const Eigen::Index cols = f.cols();
    vals.resize(m_nodes, cols);
    total = Eigen::RowVectorXd::Zero(cols);
    for (int p = 0; p < panels; ++p) {
      const auto fp = f.middleRows(Eigen::Index(p) * q, q);
      vals.middleRows(Eigen::Index(p) * q, q).noalias() = s_mat * fp;
      vals.middleRows(Eigen::Index(p) * q, q).rowwise() += total;
      total.noalias() += w_row * fp;
    }
  };
  auto integrate_total = [&](const Eigen::MatrixXd& f) {
    Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(f.cols());
    for (int p = 0; p < panels; ++p) total.noalias() += w_row * f.middleRows(Eigen::Index(p) * q, q);
    return total;
  };

  std::vector<Eigen::MatrixXcd>& terms = out.terms;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index col = 0; col < d; ++col) {
    Nodal cur;
    // Omega_0 e_col = e_col at every node.
    if (col == 0) {
      cur.b_re = Eigen::VectorXd::Ones(m_nodes);
      cur.b_im = Eigen::VectorXd::Zero(m_nodes);
      cur.bound_zero = false;
    } else {
      cur.w_re = Eigen::MatrixXd::Zero(m_nodes, n);
      cur.w_im = Eigen::MatrixXd::Zero(m_nodes, n);
      cur.w_re.col(col - 1).setOnes();
      cur.cont_zero = false;
    }
    for (int order = 1; order <= max_order; ++order) {
      const bool last = order == max_order;
      Nodal next;
      Eigen::VectorXcd value = Eigen::VectorXcd::Zero(d);
      if (!cur.cont_zero) {
        // K v bound part: -i gdot sum_j c_j conj(phase_j) w_j.
        Eigen::MatrixXd f(m_nodes, 2);
        for (Eigen::Index m = 0; m < m_nodes; ++m) {
          double re = 0.0, im = 0.0;
          for (Eigen::Index j = 0; j < n; ++j) {
            const double pr = ph_re(m, j), pi = -ph_im(m, j);
            const double wr = cur.w_re(m, j), wi = cur.w_im(m, j);
            re += c[j] * (pr * wr - pi * wi);
            im += c[j] * (pr * wi + pi * wr);
          }
          // -i * gd * (re + i im) = gd * (im - i re)
          f(m, 0) = gd[m] * im;
          f(m, 1) = -gd[m] * re;
        }
        Eigen::RowVectorXd total;
        if (last) {
          total = integrate_total(f);
        } else {
          Eigen::MatrixXd vals;
          cumulate(f, vals, total);
          next.b_re = vals.col(0);
          next.b_im = vals.col(1);
          next.bound_zero = false;
        }
        value[0] = cplx(total[0], total[1]);
      }
      if (!cur.bound_zero) {
        // K v continuum part: -i gdot c_j phase_j b.
        Eigen::MatrixXd f_re(m_nodes, n), f_im(m_nodes, n);
        for (Eigen::Index j = 0; j < n; ++j) {
          for (Eigen::Index m = 0; m < m_nodes; ++m) {
            const double pr = ph_re(m, j), pi = ph_im(m, j);
            const double br = cur.b_re[m], bi = cur.b_im[m];
            const double re = c[j] * (pr * br - pi * bi);
            const double im = c[j] * (pr * bi + pi * br);
            f_re(m, j) = gd[m] * im;
            f_im(m, j) = -gd[m] * re;
          }
        }
        Eigen::RowVectorXd tre, tim;
        if (last) {
          tre = integrate_total(f_re);
          tim = integrate_total(f_im);
        } else {
          cumulate(f_re, next.w_re, tre);
          cumulate(f_im, next.w_im, tim);
          next.cont_zero = false;
        }
        for (Eigen::Index j = 0; j < n; ++j) value[1 + j] = cplx(tre[j], tim[j]);
      }
      terms[order].col(col) = value;
      cur = std::move(next);
    }
  }
  return out;
}

Omega1Tail omega1_tail(const FriedrichsModel& model, double tau) {
  if (model.gap_shift() != 0.0) throw ConfigError("omega1_tail: requires a gapless model (gap_shift = 0)");
  Omega1Tail out;
  const Eigen::Index n = model.n_nodes();
  out.column.resize(n);
  const auto& c = model.coupling();
  const auto& e = model.continuum_energies();
  for (Eigen::Index j = 0; j < n; ++j)
    out.column[j] = -kI * oscint::gdot_hat(model.switching(), tau * e[j]) * c[j];
  out.norm = out.column.norm();
  return out;
}

std::vector<Eigen::MatrixXcd> wave_operator(const FriedrichsModel& model, double tau,
                                            const IntegratorConfig& config,
                                            const std::vector<double>& s_values) {
  std::vector<Eigen::MatrixXcd> out(s_values.size());
  const Eigen::VectorXd diag = model.diag_energies();
  evolve_basis_visit(model, tau, config, s_values, [&](std::size_t i, double s, const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd om = x;
    for (Eigen::Index r = 0; r < diag.size(); ++r) om.row(r) *= std::polar(1.0, tau * s * diag[r]);
    out[i] = std::move(om);
  });
  return out;
}

std::vector<double> default_f_grid() {
  std::vector<double> s;
  for (int m = 0; m <= 200; ++m) s.push_back(m / 200.0);
  // Q is frozen after s = 1; one point past the window confirms it.
  s.push_back(1.0 + 1.0 / 200.0);
  return s;
}

FOfTau f_of_tau(const FriedrichsModel& model, double tau, const std::vector<double>& s_grid,
                const IntegratorConfig& config) {
  if (model.n_nodes() > 512) throw ResourceError("f_of_tau: N exceeds 512");
  FOfTau out;
  out.q_norms.assign(s_grid.size(), 0.0);
  const Eigen::Index d = model.dimension();
  const Eigen::VectorXd diag = model.diag_energies();
  IntegratorConfig cfg = config;
  cfg.record_times.clear();
  cfg.s_end = std::max(1.0, s_grid.empty() ? 1.0 : s_grid.back());
  evolve_basis_visit(model, tau, cfg, s_grid, [&](std::size_t i, double s, const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd q = -x;
    for (Eigen::Index r = 0; r < d; ++r) q.row(r) *= std::polar(1.0, tau * s * diag[r]);
    q.diagonal().array() += 1.0;
    out.q_norms[i] = linalg::power_norm(q, 20, 1e-8).norm;
  });
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (out.q_norms[i] > out.value) {
      out.value = out.q_norms[i];
      out.argmax_s = s_grid[i];
    }
  }
  return out;
}

}  // namespace powertail
