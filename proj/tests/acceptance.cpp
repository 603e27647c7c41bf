// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>

#include "powertail/contour.hpp"
#include "powertail/linalg.hpp"
#include "powertail/oscint.hpp"
#include "powertail/propagate.hpp"
#include "powertail/sweep.hpp"
#include "powertail/volterra.hpp"
#include "support.hpp"

using namespace powertail;
namespace fs = std::filesystem;
using testsupport::make_model;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

SweepConfig load(const std::string& name) {
  return parse_config_file(fs::path(POWERTAIL_SOURCE_DIR) / "configs" / (name + ".ini"));
}

struct Sweep {
  SweepResult result;
  SweepFits fits;
};

std::map<std::string, Sweep> sweeps;

const Sweep& sweep(const std::string& name) {
  auto it = sweeps.find(name);
  if (it != sweeps.end()) return it->second;
  const auto t0 = std::chrono::steady_clock::now();
  Sweep s;
  s.result = run_sweep(load(name));
  s.fits = compute_fits(s.result);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("  [%s: N = %ld, %zu tau values, %.1f s]\n", name.c_str(), long(s.result.n_nodes),
              s.result.records.size(), dt);
  return sweeps.emplace(name, std::move(s)).first->second;
}

bool all_ok(const Sweep& s) {
  for (const auto& r : s.result.records)
    if (!r.ok()) return false;
  return s.fits.have_probe && s.fits.have_window;
}

std::vector<std::pair<double, double>> probe_points(const SweepResult& r, double tau_max = 1e300) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& rec : r.records)
    if (rec.tau <= tau_max * (1 + 1e-12)) pts.push_back({rec.tau, rec.leak_probe});
  return pts;
}

void criterion_1() {
  bool ok = true;
  std::string detail;
  for (auto [name, beta] : std::vector<std::pair<std::string, double>>{
           {"gapless_beta125", 1.25}, {"gapless_beta15", 1.5}, {"gapless_beta175", 1.75}}) {
    const Sweep& s = sweep(name);
    const double m = s.fits.leak_probe.slope;
    ok = ok && all_ok(s) && s.result.n_nodes <= 4096 && std::abs(m + beta) <= 0.12;
    detail += "beta " + fmt("%.2f", beta) + " slope " + fmt("%.4f", m) + "; ";
  }
  verdict(1, ok, detail + "target -beta +- 0.12");
}

void criterion_2() {
  const Sweep& s = sweep("gapless_beta15");
  const double m = s.fits.sup_leak_window.slope;
  verdict(2, all_ok(s) && std::abs(m + 1.0) <= 0.15, "in-window sup slope " + fmt("%.4f", m) + ", target -1 +- 0.15");
}

void criterion_3() {
  const Sweep& s = sweep("gapless_beta05");
  const double m = s.fits.leak_probe.slope;
  // f(tau) by dense basis evolution on a coarser grid (N = 80).
  const auto model = make_model(0.5, 0.0, std::numbers::pi / 4, 10, 8, 1e-6);
  IntegratorConfig cfg;
  cfg.scheme = Scheme::strang_split;
  std::vector<double> taus, fs_;
  for (int i = 0; i <= 4; ++i) {
    const double tau = std::pow(10.0, 2.0 + 0.5 * i);
    taus.push_back(tau);
    fs_.push_back(f_of_tau(model, tau, default_f_grid(), cfg).value);
  }
  const double mf = testsupport::log_slope(taus, fs_);
  const bool ok = all_ok(s) && std::abs(m + 0.5) <= 0.10 && std::abs(mf + 0.5) <= 0.15 && model.n_nodes() <= 512;
  verdict(3, ok, "long-time slope " + fmt("%.4f", m) + " (target -0.5 +- 0.10); f(tau) slope " + fmt("%.4f", mf) +
                     " at N " + std::to_string(model.n_nodes()) + " (target -0.5 +- 0.15)");
}

void criterion_4() {
  const Sweep& s = sweep("gapless_beta10");
  const double m = s.fits.leak_probe.slope;
  verdict(4, all_ok(s) && m > -1.15 && m < -0.85, "slope " + fmt("%.4f", m) + ", target in (-1.15, -0.85)");
}

void criterion_5() {
  const Sweep& s = sweep("gapped");
  const auto pts = probe_points(s.result, 1e3);
  const FitResult f = fit_powerlaw(pts);
  bool steepening = true;
  std::string locals;
  double prev = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double l = std::log(pts[i].second / pts[i - 1].second) / std::log(pts[i].first / pts[i - 1].first);
    if (i > 1 && !(l < prev)) steepening = false;
    locals += fmt(" %.2f", l);
    prev = l;
  }
  const double mw = s.fits.sup_leak_window.slope;
  const bool ok = all_ok(s) && f.slope <= -2.5 && steepening && std::abs(mw + 1.0) <= 0.15;
  verdict(5, ok, "long-time slope " + fmt("%.3f", f.slope) + " (<= -2.5), local slopes" + locals +
                     (steepening ? " (steepening)" : " (NOT steepening)") + ", in-window slope " + fmt("%.4f", mw));
}

void criterion_6() {
  const auto form = oscint::AsymptoticForm::canonical();
  bool ok = true;
  std::string detail;
  int used = 0;
  for (double p : {100.0, 200.0, 400.0}) {
    const double c = std::abs(std::cos(form.phase(p)));
    if (c <= 0.3) {
      detail += "p " + fmt("%g", p) + " excluded; ";
      continue;
    }
    ++used;
    const double rel = std::abs(oscint::bump_hat(p) / oscint::bump_hat_asymptotic(p) - 1.0);
    ok = ok && rel <= 2.0 / std::sqrt(p);
    detail += "p " + fmt("%g", p) + " rel " + fmt("%.3e", rel) + " (<= " + fmt("%.3e", 2.0 / std::sqrt(p)) + "); ";
  }
  boost::math::quadrature::tanh_sinh<double> ts;
  const double oracle = ts.integrate([](double s) { return std::exp(-1.0 / (1.0 - s * s)); }, -1.0, 1.0);
  const double g0 = oscint::bump_hat(0.0);
  ok = ok && used > 0 && std::abs(g0 - 0.4439938) <= 1e-6 && std::abs(g0 - oracle) <= 1e-6;
  verdict(6, ok, detail + "bump_hat(0) " + fmt("%.10f", g0) + " vs oracle " + fmt("%.10f", oracle));
}

void criterion_7_8() {
  const double tau = 100.0;
  const auto model = make_model(1.5, 0.0, std::numbers::pi / 4, 8, 16, 0.01 / tau);
  const auto ser = omega_series(model, tau, 4, 64);
  const Eigen::Index n = model.n_nodes();
  double worst = 0.0;
  for (int i = 1; i <= 4; ++i) {
    const Eigen::MatrixXcd& om = ser.terms[i];
    double wrong;
    if (i % 2 == 1) wrong = std::max(std::abs(om(0, 0)), linalg::op_norm(om.bottomRightCorner(n, n)));
    else wrong = std::max(om.col(0).tail(n).norm(), om.row(0).tail(n).norm());
    worst = std::max(worst, wrong / linalg::op_norm(om));
  }
  verdict(7, n == 128 && worst <= 1e-9, "max wrong-parity block relative to ||Omega_i||, i = 1..4: " + fmt("%.3e", worst));

  const auto tail = omega1_tail(model, tau);
  const double rel = (ser.terms[1].col(0).tail(n) - tail.column).norm() / tail.norm;
  const auto fine = make_model(1.5, 0.0, std::numbers::pi / 4, 20, 16, 1e-6);
  bool ratios_ok = true;
  std::string ratios;
  for (double t : {1e3, 2e3, 4e3}) {
    const double r = omega1_tail(fine, t).norm / omega1_tail(fine, 2 * t).norm;
    ratios_ok = ratios_ok && r >= 0.9 * std::pow(2.0, 1.5) && r <= 1.1 * std::pow(2.0, 1.5);
    ratios += fmt(" %.4f", r);
  }
  verdict(8, rel <= 1e-8 && ratios_ok,
          "tail vs order-1 quadrature " + fmt("%.3e", rel) + "; norm ratios" + ratios + " vs 2^1.5 = " +
              fmt("%.4f", std::pow(2.0, 1.5)));
}

void criterion_9() {
  double drift = 0.0;
  for (const auto& [name, s] : sweeps)
    for (const auto& r : s.result.records) drift = std::max(drift, r.unitarity_drift);

  // Projection distance against the off-diagonal wave-operator blocks, N = 64.
  const auto m = make_model(1.5, 0.0, std::numbers::pi / 4, 8, 8, 1e-3);
  const double tau = 100.0;
  IntegratorConfig cfg;
  cfg.scheme = Scheme::strang_split;
  const std::vector<double> ss{0.25, 0.5, 0.75, 1.0, 1.5};
  const auto om = wave_operator(m, tau, cfg, ss);
  const Eigen::Index d = m.dimension();
  const Eigen::MatrixXcd p = m.projection_dense();
  const Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(d, d) - p;
  double offdiag = 0.0;
  for (std::size_t i = 0; i < ss.size(); ++i) {
    const Eigen::MatrixXcd u = adiabatic_propagator(m, tau, ss[i]) * om[i];
    const double lhs = linalg::op_norm(u * p * u.adjoint() - projection_at(m, ss[i]));
    const double rhs = std::max(linalg::op_norm(q * om[i] * p), linalg::op_norm(p * om[i] * q));
    offdiag = std::max(offdiag, std::abs(lhs - rhs));
  }

  const auto rep = verify_generators(m, tau, {0.1, 0.3, 0.5, 0.7, 0.9});

  // U_r Omega against a lab-frame fourth-order Magnus propagator.
  const auto ms = make_model(1.5, 0.0, std::numbers::pi / 4, 3, 4, 1e-2);
  const double tau_s = 50.0;
  IntegratorConfig fine = cfg;
  fine.max_step = 1e-4;
  const std::vector<double> sv{0.5, 1.0, 1.5};
  const auto oms = wave_operator(ms, tau_s, fine, sv);
  const auto lab = testsupport::lab_propagator_magnus4(ms, tau_s, sv, 5e-4);
  double consistency = 0.0;
  for (std::size_t i = 0; i < sv.size(); ++i) {
    Eigen::VectorXcd ph(ms.dimension());
    for (Eigen::Index r = 0; r < ms.dimension(); ++r) ph[r] = std::polar(1.0, -tau_s * sv[i] * ms.diag_energies()[r]);
    const Eigen::MatrixXcd ur = testsupport::rotation_expm(ms, ms.switching().g(sv[i])) * ph.asDiagonal();
    consistency = std::max(consistency, (ur * oms[i] - lab[i]).cwiseAbs().maxCoeff());
  }
  const bool ok = !sweeps.empty() && drift <= 1e-9 && offdiag <= 1e-10 && rep.max_h_ad_minus_h_r <= 1e-12 &&
                  consistency <= 1e-6;
  verdict(9, ok, "max drift " + fmt("%.2e", drift) + "; offdiag identity " + fmt("%.2e", offdiag) + " (N " +
                     std::to_string(m.n_nodes()) + "); ||H_AD - H_r|| " + fmt("%.2e", rep.max_h_ad_minus_h_r) +
                     "; |U_r Omega - U_tau| " + fmt("%.2e", consistency));
}

void criterion_10() {
  testsupport::Rng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(testsupport::random_matrix(rng, 8));
    const Eigen::MatrixXcd qm = qr.householderQ() * Eigen::MatrixXcd::Identity(8, 8);
    Eigen::VectorXd lam(8);
    lam[0] = rng.uniform(-0.1, 0.1);
    for (int i = 1; i < 8; ++i) lam[i] = rng.uniform(1.0, 3.0);
    const Eigen::MatrixXcd h = qm * lam.cast<cplx>().asDiagonal() * qm.adjoint();
    const Eigen::MatrixXcd p = qm.col(0) * qm.col(0).adjoint();
    const Eigen::MatrixXcd x = testsupport::random_matrix(rng, 8);
    Eigen::MatrixXcd xe = qm.adjoint() * x * qm;
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b) {
        if ((a == 0) == (b == 0)) xe(a, b) = 0.0;
        else xe(a, b) /= a == 0 ? lam[b] - lam[a] : lam[a] - lam[b];
      }
    const Eigen::MatrixXcd want = qm * xe * qm.adjoint();
    worst = std::max(worst, linalg::op_norm(tilde(h, p, x, ContourSpec{0.0, 0.5, 64}) - want) / linalg::op_norm(x));
  }

  const auto m = make_model(1.5, 1.0, std::numbers::pi / 4, 4, 8, 0.01);
  const double tau = 50.0;
  const auto suite = ibp_suite(m, tau, 1.0, 64, {11, 23, 37});
  const auto ref = ibp_refinement(m, tau, kato_commutator_profile(m), random_polynomial_profile(m.dimension(), 2, 11),
                                  1.0, {16, 32, 64, 128});
  bool refine_ok = true;
  std::string refine;
  for (std::size_t k = 0; k < ref.residuals.size(); ++k) {
    refine += fmt(" %.2e", ref.residuals[k]);
    if (k > 0 && !(ref.residuals[k] <= 0.25 * ref.residuals[k - 1] || ref.residuals[k] <= 1e-11)) refine_ok = false;
  }
  const bool ok = worst <= 1e-10 && suite.max_residual <= 1e-6 && refine_ok;
  verdict(10, ok, "tilde vs eigenbasis rule " + fmt("%.2e", worst) + "; IBP max residual at quad 64 " +
                      fmt("%.2e", suite.max_residual) + " (N 32, tau 50, gap 1, sign " + std::to_string(suite.cases[0].sign) +
                      "); refinement q=16..128:" + refine);
}

void criterion_11() {
  double worst = 0.0;
  std::string where;
  for (const std::string name :
       {"gapless_beta05", "gapless_beta10", "gapless_beta125", "gapless_beta15", "gapless_beta175", "gapped"}) {
    const Sweep& base = sweep(name);
    SweepConfig c = base.result.config;
    c.nodes_per_panel *= 2;
    const SweepResult fine = run_sweep(c);
    for (std::size_t i = 0; i < fine.records.size(); ++i) {
      const auto& a = base.result.records[i];
      const auto& b = fine.records[i];
      for (auto [x, y] : {std::pair{a.leak_probe, b.leak_probe}, std::pair{a.sup_leak_window, b.sup_leak_window}}) {
        const double rel = std::abs(y - x) / std::abs(x);
        if (!(rel <= worst)) {
          worst = rel;
          where = name + " tau " + fmt("%.4g", a.tau);
        }
      }
    }
  }
  SweepConfig c = load("gapless_beta15");
  const std::string ref = format_csv(sweep("gapless_beta15").result);
  bool same = format_csv(run_sweep(c)) == ref;
  c.jobs = 4;
  same = same && format_csv(run_sweep(c)) == ref;
  c.integrator.backend = kernels::Backend::omp;
  same = same && format_csv(run_sweep(c)) == ref;
  verdict(11, worst < 0.01 && same,
          "max relative change under nodes_per_panel doubling " + fmt("%.3e", worst) + " (" + where + "); CSV " +
              (same ? "byte-identical" : "DIFFERS") + " across reruns, jobs 1/4 and serial/omp");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<void (*)()> steps{criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
                                      criterion_7_8, criterion_9, criterion_10, criterion_11};
  int id = 0;
  for (auto step : steps) {
    ++id;
    try {
      step();
    } catch (const std::exception& e) {
      std::printf("FAIL criterion step %d: exception: %s\n", id, e.what());
      ++failures;
    }
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d criteria failed; total %.1f s\n", failures, dt);
  return failures == 0 ? 0 : 1;
}
