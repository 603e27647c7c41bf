#include "powertail/model.hpp"

#include <cmath>
#include <string>

#include "powertail/errors.hpp"
#include "powertail/quadrature.hpp"

namespace powertail {

DiscretizedMeasure build_grid(double k_max, int n_panels, int nodes_per_panel, double k_min) {
  if (!(k_min > 0.0) || !(k_max > k_min))
    throw ConfigError("build_grid: need k_max > k_min > 0 (got k_min=" + std::to_string(k_min) +
                      ", k_max=" + std::to_string(k_max) + ")");
  if (n_panels < 1) throw ConfigError("build_grid: n_panels must be >= 1");
  if (nodes_per_panel < 2) throw ConfigError("build_grid: nodes_per_panel must be >= 2");

  DiscretizedMeasure m;
  m.k_min = k_min;
  m.k_max = k_max;
  m.panel_layout.nodes_per_panel = nodes_per_panel;
  m.panel_layout.ratio = std::pow(k_max / k_min, 1.0 / n_panels);
  auto& edges = m.panel_layout.edges;
  edges.resize(n_panels + 1);
  edges[0] = k_max;
  for (int p = 1; p < n_panels; ++p) edges[p] = k_max * std::pow(k_min / k_max, double(p) / n_panels);
  edges[n_panels] = k_min;

  const quad::GaussRule rule = quad::gauss_legendre(nodes_per_panel);
  const Eigen::Index n = Eigen::Index(n_panels) * nodes_per_panel;
  m.nodes.resize(n);
  m.weights.resize(n);
  Eigen::Index j = 0;
  // Fill from the smallest panel upward so nodes ascend.
  for (int p = n_panels - 1; p >= 0; --p) {
    const double a = edges[p + 1], b = edges[p];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < nodes_per_panel; ++i, ++j) {
      m.nodes[j] = mid + half * rule.nodes[i];
      m.weights[j] = half * rule.weights[i];
    }
  }
  return m;
}

int panels_for_ratio(double k_max, double k_min, double ratio) {
  if (!(ratio > 1.0)) throw ConfigError("panel ratio must exceed 1");
  if (!(k_min > 0.0) || !(k_max > k_min)) throw ConfigError("need k_max > k_min > 0");
  return std::max(1, int(std::ceil(std::log(k_max / k_min) / std::log(ratio) - 1e-9)));
}

double smooth_step_down(double x) {
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return b / (a + b);
}

double form_factor_raw(double k, double beta, double onset, double k_max) {
  const double c = smooth_step_down((k - onset) / (k_max - onset));
  if (c == 0.0) return 0.0;
  return std::sqrt(2.0 * beta) * std::pow(k, beta - 0.5) * c;
}

FormFactor build_form_factor(const DiscretizedMeasure& grid, double beta, double cutoff_fraction) {
  if (!(beta > 0.0)) throw ConfigError("build_form_factor: beta must be > 0");
  if (!(cutoff_fraction > 0.0 && cutoff_fraction < 1.0))
    throw ConfigError("build_form_factor: cutoff_fraction must lie in (0, 1)");
  FormFactor ff;
  ff.beta = beta;
  ff.cutoff_fraction = cutoff_fraction;
  const double onset = cutoff_fraction * grid.k_max;
  ff.values.resize(grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j)
    ff.values[j] = form_factor_raw(grid.nodes[j], beta, onset, grid.k_max);
  const double sq = (grid.weights.array() * ff.values.array().square()).sum();
  if (!(sq > 0.0)) throw ConfigError("build_form_factor: form factor vanishes on the grid");
  ff.norm_constant = 1.0 / std::sqrt(sq);
  ff.values *= ff.norm_constant;
  return ff;
}

namespace {

const quad::GaussRule& profile_rule() {
  static const quad::GaussRule rule = quad::gauss_legendre(16);
  return rule;
}

// integral of the bump over [a, b] with 32 equal panels.
double bump_segment(double a, double b) {
  const auto& rule = profile_rule();
  constexpr int panels = 32;
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double part = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
      part += rule.weights[i] * SwitchingProfile::bump(mid + 0.5 * h * rule.nodes[i]);
    total += 0.5 * h * part;
  }
  return total;
}

}  // namespace

double SwitchingProfile::bump(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return std::exp(-1.0 / (4.0 * s * (1.0 - s)));
}

double SwitchingProfile::bump_integral() {
  static const double z = bump_segment(0.0, 0.5) + bump_segment(0.5, 1.0);
  return z;
}

SwitchingProfile::SwitchingProfile(double theta_total)
    : theta_(theta_total), scale_(theta_total / bump_integral()) {
  if (!(theta_total >= 0.0) || !std::isfinite(theta_total))
    throw ConfigError("switching profile: theta_total must be finite and >= 0");
}

double SwitchingProfile::gdot(double s) const { return scale_ * bump(s); }

double SwitchingProfile::gddot(double s) const {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double u = s * (1.0 - s);
  return scale_ * bump(s) * (1.0 - 2.0 * s) / (4.0 * u * u);
}

double SwitchingProfile::g(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return theta_;
  if (s <= 0.5) return scale_ * bump_segment(0.0, s);
  return theta_ - scale_ * bump_segment(s, 1.0);
}

SwitchingProfile build_switching(double theta_total) {
  if (!(theta_total > 0.0)) throw ConfigError("build_switching: theta_total must be > 0");
  return SwitchingProfile(theta_total);
}

FriedrichsModel::FriedrichsModel(Eigen::VectorXd energies, Eigen::VectorXd coupling,
                                 SwitchingProfile sw, double gap)
    : energies_(std::move(energies)), coupling_(std::move(coupling)), switching_(sw), gap_(gap) {}

FriedrichsModel FriedrichsModel::from_modes(Eigen::VectorXd node_energies, Eigen::VectorXd coupling,
                                            SwitchingProfile switching, double gap_shift) {
  if (node_energies.size() != coupling.size() || coupling.size() == 0)
    throw AssemblyError("from_modes: energies and coupling must be nonempty and of equal length");
  if (!(gap_shift >= 0.0)) throw ConfigError("gap_shift must be >= 0");
  if ((node_energies.array() <= 0.0).any()) throw AssemblyError("from_modes: node energies must be > 0");
  if (std::abs(coupling.norm() - 1.0) > 1e-12)
    throw AssemblyError("from_modes: coupling must have unit norm");
  node_energies.array() += gap_shift;
  return FriedrichsModel(std::move(node_energies), std::move(coupling), switching, gap_shift);
}

FriedrichsModel assemble_model(const DiscretizedMeasure& grid, const FormFactor& form_factor,
                               const SwitchingProfile& switching, double gap_shift) {
  if (grid.size() != form_factor.values.size())
    throw AssemblyError("assemble_model: grid has " + std::to_string(grid.size()) +
                        " nodes but form factor has " + std::to_string(form_factor.values.size()));
  if (!(gap_shift >= 0.0)) throw ConfigError("assemble_model: gap_shift must be >= 0");
  Eigen::VectorXd c = form_factor.values.array() * grid.weights.array().sqrt();
  Eigen::VectorXd e = grid.nodes.array() + gap_shift;
  FriedrichsModel m(std::move(e), std::move(c), switching, gap_shift);
  if (std::abs(m.coupling_.norm() - 1.0) > 1e-12)
    throw AssemblyError("assemble_model: coupling norm deviates from 1");
  m.measure_ = grid;
  m.form_factor_ = form_factor;
  return m;
}

Eigen::VectorXd FriedrichsModel::diag_energies() const {
  Eigen::VectorXd d(dimension());
  d[0] = 0.0;
  d.tail(n_nodes()) = energies_;
  return d;
}

Eigen::MatrixXcd FriedrichsModel::hamiltonian_dense() const {
  return diag_energies().cast<cplx>().asDiagonal();
}

Eigen::MatrixXcd FriedrichsModel::coupling_dense() const {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dimension(), dimension());
  a.block(1, 0, n_nodes(), 1) = coupling_.cast<cplx>();
  a.block(0, 1, 1, n_nodes()) = coupling_.transpose().cast<cplx>();
  return a;
}

Eigen::MatrixXcd FriedrichsModel::projection_dense() const {
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(dimension(), dimension());
  p(0, 0) = 1.0;
  return p;
}

const char* to_string(Frame f) {
  switch (f) {
    case Frame::lab: return "lab";
    case Frame::rotating: return "rotating";
    case Frame::interaction: return "interaction";
  }
  return "?";
}

RotatingState RotatingState::bound_state(Eigen::Index n_nodes, Frame frame) {
  RotatingState st;
  st.bound_amp = 1.0;
  st.continuum_amps = Eigen::VectorXcd::Zero(n_nodes);
  st.frame = frame;
  return st;
}

RotatingState RotatingState::from_vector(const Eigen::VectorXcd& v, Frame frame, double s) {
  RotatingState st;
  st.bound_amp = v[0];
  st.continuum_amps = v.tail(v.size() - 1);
  st.frame = frame;
  st.time_s = s;
  return st;
}

Eigen::VectorXcd RotatingState::to_vector() const {
  Eigen::VectorXcd v(1 + continuum_amps.size());
  v[0] = bound_amp;
  v.tail(continuum_amps.size()) = continuum_amps;
  return v;
}

double RotatingState::norm() const {
  return std::sqrt(std::norm(bound_amp) + continuum_amps.squaredNorm());
}

RotatingState apply_rotation(const FriedrichsModel& model, double theta, const RotatingState& state) {
  const auto& c = model.coupling();
  if (state.continuum_amps.size() != c.size())
    throw ContractViolation("apply_rotation: state dimension does not match model");
  const double sn = std::sin(theta);
  const double cm1 = -2.0 * std::sin(0.5 * theta) * std::sin(0.5 * theta);  // cos - 1
  const cplx ov = (c.cast<cplx>().array() * state.continuum_amps.array()).sum();
  const cplx i(0.0, 1.0);
  RotatingState out = state;
  out.bound_amp = (1.0 + cm1) * state.bound_amp + i * sn * ov;
  const cplx f = cm1 * ov + i * sn * state.bound_amp;
  out.continuum_amps += f * c.cast<cplx>();
  return out;
}

Eigen::MatrixXcd rotation_dense(const FriedrichsModel& model, double theta) {
  const Eigen::Index d = model.dimension();
  Eigen::MatrixXcd v(d, d);
  for (Eigen::Index col = 0; col < d; ++col) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(d);
    e[col] = 1.0;
    v.col(col) = apply_rotation(model, theta, RotatingState::from_vector(e, Frame::lab, 0.0)).to_vector();
  }
  return v;
}

Eigen::MatrixXcd projection_at(const FriedrichsModel& model, double s) {
  const Eigen::VectorXcd v0 =
      apply_rotation(model, model.switching().g(s), RotatingState::bound_state(model.n_nodes(), Frame::lab))
          .to_vector();
  return v0 * v0.adjoint();
}

Eigen::MatrixXcd projection_derivative(const FriedrichsModel& model, double s) {
  const Eigen::MatrixXcd p = projection_at(model, s);
  const Eigen::MatrixXcd a = model.coupling_dense();
  return cplx(0.0, model.switching().gdot(s)) * (a * p - p * a);
}

}  // namespace powertail
