#include "powertail/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "powertail/errors.hpp"
#include "powertail/linalg.hpp"
#include "powertail/oscint.hpp"

namespace powertail {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::strang_split: return "strang_split";
    case Scheme::interaction_magnus: return "interaction_magnus";
    case Scheme::automatic: return "automatic";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "strang_split") return Scheme::strang_split;
  if (s == "interaction_magnus") return Scheme::interaction_magnus;
  if (s == "automatic") return Scheme::automatic;
  throw ConfigError("unknown integrator scheme '" + s + "'");
}

void IntegratorConfig::validate() const {
  if (!(max_step > 0.0)) throw ConfigError("integrator: max_step must be > 0");
  if (!(phase_per_step > 0.0)) throw ConfigError("integrator: phase_per_step must be > 0");
  if (!(max_kick > 0.0)) throw ConfigError("integrator: max_kick must be > 0");
  if (!(s_end > 0.0)) throw ConfigError("integrator: s_end must be > 0");
  if (window_samples < 200) throw ConfigError("integrator: window_samples must be >= 200");
  if (!(drift_tolerance > 0.0)) throw ConfigError("integrator: drift_tolerance must be > 0");
  for (double t : record_times) {
    if (!(t >= 0.0)) throw ConfigError("integrator: record times must be >= 0");
    if (t > s_end) throw ConfigError("integrator: s_end must be >= every record time");
  }
  if (!std::is_sorted(record_times.begin(), record_times.end()))
    throw ConfigError("integrator: record_times must be ascending");
}

double strang_step_size(const FriedrichsModel& model, double tau, const IntegratorConfig& config) {
  double h = config.max_step;
  const double emax = model.max_energy();
  if (emax > 0.0) h = std::min(h, config.phase_per_step / (tau * emax));
  const double gmax = model.switching().gdot_max();
  if (gmax > 0.0) h = std::min(h, config.max_kick / gmax);
  return h;
}

Scheme resolve_scheme(const FriedrichsModel& model, double tau, const IntegratorConfig& config) {
  if (config.scheme != Scheme::automatic) return config.scheme;
  const double cost = double(model.n_nodes()) / strang_step_size(model, tau, config);
  return cost > config.step_budget ? Scheme::interaction_magnus : Scheme::strang_split;
}

namespace {

constexpr cplx kI{0.0, 1.0};

// Breakpoints in [0, min(s_end, 1)]: the window grid plus in-window extras.
std::vector<double> window_breakpoints(int window_samples, double s_stop,
                                       const std::vector<double>& extra) {
  std::vector<double> pts;
  for (int m = 0; m <= window_samples; ++m) {
    const double s = double(m) / window_samples;
    if (s <= s_stop) pts.push_back(s);
  }
  for (double s : extra)
    if (s <= s_stop) pts.push_back(s);
  if (pts.empty() || pts.back() < s_stop) pts.push_back(s_stop);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

int substeps(double length, double h) {
  return std::max(1, int(std::ceil(length / h - 1e-9)));
}

void half_phases(const Eigen::VectorXd& e, double tau, double h, std::vector<cplx>& out) {
  out.resize(e.size());
  for (Eigen::Index j = 0; j < e.size(); ++j) out[j] = std::polar(1.0, -0.5 * h * tau * e[j]);
}

void check_state(cplx bound, const Eigen::VectorXcd& amps, double s, double& drift, double tol) {
  const double n2 = std::norm(bound) + amps.squaredNorm();
  if (!std::isfinite(n2))
    throw NumericalOverflow("evolve_true: non-finite amplitudes at s = " + std::to_string(s));
  drift = std::max(drift, std::abs(1.0 - std::sqrt(n2)));
  if (drift > tol)
    throw IntegrationFailure("evolve_true: unitarity drift " + std::to_string(drift) +
                                 " exceeds tolerance at s = " + std::to_string(s),
                             drift);
}

// Rank-2 exponential exp(-i M) with M = |d><e0| + |e0><d| in the interaction frame.
void magnus_update(cplx& bound, Eigen::VectorXcd& w, const Eigen::VectorXcd& d) {
  const double delta = d.norm();
  if (delta == 0.0) return;
  const double sh = std::sin(0.5 * delta);
  const double cm1 = -2.0 * sh * sh;
  const double sinc = std::sin(delta) / delta;
  const cplx dw = d.dot(w);  // conjugates d
  const cplx a = bound;
  bound = (1.0 + cm1) * a - kI * sinc * dw;
  w += (cm1 / (delta * delta)) * dw * d - kI * sinc * a * d;
}

}  // namespace

Trajectory evolve_true(const FriedrichsModel& model, double tau, const IntegratorConfig& config,
                       const RotatingState* initial) {
  config.validate();
  if (!(tau > 0.0)) throw ConfigError("evolve_true: tau must be > 0");
  const Eigen::Index n = model.n_nodes();
  cplx bound = 1.0;
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(n);
  if (initial) {
    if (initial->continuum_amps.size() != n)
      throw ContractViolation("evolve_true: initial state dimension mismatch");
    if (std::abs(initial->norm() - 1.0) > 1e-6)
      throw ContractViolation("evolve_true: initial state is not normalized");
    if (initial->time_s != 0.0) throw ContractViolation("evolve_true: initial state must sit at s = 0");
    // At s = 0 every frame coincides (V(0) = 1).
    bound = initial->bound_amp;
    amps = initial->continuum_amps;
  }

  Trajectory traj;
  traj.tau = tau;
  traj.scheme_used = resolve_scheme(model, tau, config);
  const Eigen::VectorXd& e = model.continuum_energies();
  const Eigen::VectorXd& cvec = model.coupling();
  const std::span<const double> c(cvec.data(), n);
  const SwitchingProfile& sw = model.switching();
  const bool magnus = traj.scheme_used == Scheme::interaction_magnus;

  const double s_window = std::min(config.s_end, 1.0);
  const std::vector<double> pts = window_breakpoints(config.window_samples, s_window, config.record_times);
  const double h = magnus ? std::min(config.max_step, sw.gdot_max() > 0 ? config.max_kick / sw.gdot_max()
                                                                         : config.max_step)
                          : strang_step_size(model, tau, config);

  auto record = [&](double s) {
    // amps hold the rotating-frame state here.
    const double lk = amps.norm();
    if (s <= 1.0) {
      const double m = std::round(s * config.window_samples);
      if (s == m / config.window_samples) {
        traj.window_s.push_back(s);
        traj.window_leak.push_back(lk);
        traj.sup_window_leak = std::max(traj.sup_window_leak, lk);
      }
    }
    for (double t : config.record_times) {
      if (t == s) {
        TrajectorySample smp;
        smp.s = s;
        smp.state.bound_amp = bound;
        smp.state.continuum_amps = amps;
        smp.state.frame = Frame::rotating;
        smp.state.time_s = s;
        smp.leak = lk;
        traj.samples.push_back(std::move(smp));
      }
    }
  };

  check_state(bound, amps, 0.0, traj.unitarity_drift, config.drift_tolerance);
  record(pts.front());
  std::map<int, std::vector<cplx>> phase_cache;
  const kernels::Backend backend = config.backend;
  std::span<cplx> amp_span(amps.data(), n);

  for (std::size_t seg = 1; seg < pts.size(); ++seg) {
    const double a = pts[seg - 1], b = pts[seg];
    const int ns = substeps(b - a, h);
    const double hs = (b - a) / ns;
    if (!magnus) {
      // Segments of one length share a step, so cache phases by that length.
      const int key = int(std::llround((b - a) * 1e9));
      auto it = phase_cache.find(key);
      if (it == phase_cache.end()) {
        it = phase_cache.emplace(key, std::vector<cplx>()).first;
        half_phases(e, tau, hs, it->second);
      }
      const std::span<const cplx> ph(it->second);
      for (int i = 0; i < ns; ++i) {
        const double mid = a + (i + 0.5) * hs;
        kernels::strang_step(backend, bound, amp_span, ph, c, hs * sw.gdot(mid));
      }
    } else {
      // Interaction frame xi = exp(i tau s H) chi on this segment.
      for (Eigen::Index j = 0; j < n; ++j) amps[j] *= std::polar(1.0, tau * a * e[j]);
      Eigen::VectorXcd d(n);
      std::vector<double> omegas(n);
      for (Eigen::Index j = 0; j < n; ++j) omegas[j] = tau * e[j];
      std::vector<cplx> moments(n);
      for (int i = 0; i < ns; ++i) {
        const double t0 = a + i * hs, t1 = t0 + hs;
        const oscint::FilonTable tab([&](double t) { return sw.gdot(t); }, t0, t1, 1, 8);
        kernels::filon_integrals(backend, tab, omegas, moments);
        for (Eigen::Index j = 0; j < n; ++j) d[j] = c[j] * moments[j];
        magnus_update(bound, amps, d);
      }
      for (Eigen::Index j = 0; j < n; ++j) amps[j] *= std::polar(1.0, -tau * b * e[j]);
    }
    traj.steps += ns;
    check_state(bound, amps, b, traj.unitarity_drift, config.drift_tolerance);
    record(b);
  }

  // Free flight: gdot = 0 past s = 1, one exact diagonal phase per record time.
  if (config.s_end > 1.0) {
    const Eigen::VectorXcd at_one = amps;
    double last = 1.0;
    for (double t : config.record_times) {
      if (t <= last) continue;
      last = t;
      for (Eigen::Index j = 0; j < n; ++j) amps[j] = at_one[j] * std::polar(1.0, -tau * (t - 1.0) * e[j]);
      check_state(bound, amps, t, traj.unitarity_drift, config.drift_tolerance);
      record(t);
    }
  }
  return traj;
}

void evolve_basis_visit(const FriedrichsModel& model, double tau, const IntegratorConfig& config,
                        const std::vector<double>& s_values,
                        const std::function<void(std::size_t, double, const Eigen::MatrixXcd&)>& visit) {
  config.validate();
  if (!(tau > 0.0)) throw ConfigError("evolve_basis: tau must be > 0");
  if (!std::is_sorted(s_values.begin(), s_values.end()) || (!s_values.empty() && s_values.front() < 0.0))
    throw ConfigError("evolve_basis: s_values must be ascending and >= 0");
  const Eigen::Index n = model.n_nodes();
  const Eigen::Index d = model.dimension();
  if (d > 4097) throw ResourceError("evolve_basis: dimension too large for dense basis evolution");
  const Eigen::VectorXd& e = model.continuum_energies();
  const std::span<const double> c(model.coupling().data(), n);
  const SwitchingProfile& sw = model.switching();
  const double h = strang_step_size(model, tau, config);

  Eigen::MatrixXcd x = Eigen::MatrixXcd::Identity(d, d);
  std::vector<double> pts{0.0};
  for (double s : s_values) pts.push_back(std::min(s, 1.0));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::map<int, std::vector<cplx>> phase_cache;
  std::size_t next = 0;
  auto emit_at = [&](double reached) {
    while (next < s_values.size() && std::min(s_values[next], 1.0) == reached) {
      const std::size_t idx = next++;
      const double s = s_values[idx];
      if (s <= 1.0) {
        visit(idx, s, x);
        continue;
      }
      Eigen::MatrixXcd y = x;
      for (Eigen::Index j = 0; j < n; ++j) y.row(1 + j) *= std::polar(1.0, -tau * (s - 1.0) * e[j]);
      visit(idx, s, y);
    }
  };
  emit_at(0.0);
  for (std::size_t seg = 1; seg < pts.size(); ++seg) {
    const double a = pts[seg - 1], b = pts[seg];
    const int ns = substeps(b - a, h);
    const double hs = (b - a) / ns;
    const int key = int(std::llround((b - a) * 1e9));
    auto it = phase_cache.find(key);
    if (it == phase_cache.end()) {
      it = phase_cache.emplace(key, std::vector<cplx>()).first;
      half_phases(e, tau, hs, it->second);
    }
    const std::span<const cplx> ph(it->second);
    for (int i = 0; i < ns; ++i) {
      const double mid = a + (i + 0.5) * hs;
      kernels::strang_step_columns(config.backend, x, ph, c, hs * sw.gdot(mid));
    }
    if (!x.allFinite()) throw NumericalOverflow("evolve_basis: non-finite propagator entries");
    emit_at(b);
  }
  const double drift = (x.adjoint() * x - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
  if (drift > config.drift_tolerance)
    throw IntegrationFailure("evolve_basis: propagator lost unitarity", drift);
}

std::vector<Eigen::MatrixXcd> evolve_basis(const FriedrichsModel& model, double tau,
                                           const IntegratorConfig& config,
                                           const std::vector<double>& s_values) {
  std::vector<Eigen::MatrixXcd> out(s_values.size());
  evolve_basis_visit(model, tau, config, s_values,
                     [&](std::size_t i, double, const Eigen::MatrixXcd& x) { out[i] = x; });
  return out;
}

RotatingState adiabatic_state(const FriedrichsModel& model, double /*tau*/, double s) {
  if (!(s >= 0.0)) throw ContractViolation("adiabatic_state: s must be >= 0");
  // H e0 = 0, so there is no dynamical phase.
  RotatingState st = apply_rotation(model, model.switching().g(s),
                                    RotatingState::bound_state(model.n_nodes(), Frame::lab));
  st.time_s = s;
  st.frame = Frame::lab;
  return st;
}

Eigen::MatrixXcd adiabatic_propagator(const FriedrichsModel& model, double tau, double s) {
  const Eigen::VectorXd diag = model.diag_energies();
  Eigen::MatrixXcd ph = Eigen::MatrixXcd::Zero(diag.size(), diag.size());
  for (Eigen::Index j = 0; j < diag.size(); ++j) ph(j, j) = std::polar(1.0, -tau * s * diag[j]);
  return rotation_dense(model, model.switching().g(s)) * ph;
}

double leak(const FriedrichsModel& model, const RotatingState& state) {
  if (state.continuum_amps.size() != model.n_nodes())
    throw ContractViolation("leak: state dimension does not match model");
  if (std::abs(state.norm() - 1.0) > 1e-6)
    throw ContractViolation("leak: state is not normalized (norm " + std::to_string(state.norm()) + ")");
  if (state.frame == Frame::lab) {
    const RotatingState pulled = apply_rotation(model, -model.switching().g(state.time_s), state);
    return pulled.continuum_norm();
  }
  return state.continuum_norm();
}

GeneratorReport verify_generators(const FriedrichsModel& model, double tau,
                                  const std::vector<double>& s_samples, double fd_step) {
  GeneratorReport rep;
  const Eigen::Index d = model.dimension();
  const Eigen::MatrixXcd h0 = model.hamiltonian_dense();
  const Eigen::MatrixXcd a = model.coupling_dense();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  const SwitchingProfile& sw = model.switching();
  for (double s : s_samples) {
    GeneratorSample g;
    g.s = s;
    const Eigen::MatrixXcd v = rotation_dense(model, sw.g(s));
    const Eigen::MatrixXcd hs = v * h0 * v.adjoint();
    const Eigen::MatrixXcd p = projection_at(model, s);
    const Eigen::MatrixXcd pdot = projection_derivative(model, s);
    const Eigen::MatrixXcd comm = pdot * p - p * pdot;
    const Eigen::MatrixXcd h_ad = hs + (kI / tau) * comm;
    // V' V^dagger = i gdot A since V = exp(i g A).
    const Eigen::MatrixXcd vdot_vdag = kI * sw.gdot(s) * a;
    const Eigen::MatrixXcd h_r = hs + (kI / tau) * vdot_vdag;
    g.h_ad_minus_h_r = linalg::op_norm(h_ad - h_r);
    const Eigen::MatrixXcd kato = kI * comm;
    g.kato_block_pp = linalg::op_norm(p * kato * p);
    g.kato_block_qq = linalg::op_norm((id - p) * kato * (id - p));
    auto fd = [&](double hh) {
      const Eigen::MatrixXcd diff = (projection_at(model, s + hh) - projection_at(model, s - hh)) / (2.0 * hh);
      return linalg::op_norm(pdot - diff);
    };
    g.fd_error_h = fd(fd_step);
    g.fd_error_h2 = fd(0.5 * fd_step);
    g.fd_ratio = g.fd_error_h2 > 0.0 ? g.fd_error_h / g.fd_error_h2 : 0.0;
    rep.max_h_ad_minus_h_r = std::max(rep.max_h_ad_minus_h_r, g.h_ad_minus_h_r);
    rep.max_kato_diagonal = std::max({rep.max_kato_diagonal, g.kato_block_pp, g.kato_block_qq});
    rep.samples.push_back(g);
  }
  return rep;
}

}  // namespace powertail
