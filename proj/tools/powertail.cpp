// powertail: command line front end for the adiabatic leak experiments.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <random>

#include "powertail/contour.hpp"
#include "powertail/errors.hpp"
#include "powertail/linalg.hpp"
#include "powertail/oscint.hpp"
#include "powertail/propagate.hpp"
#include "powertail/sweep.hpp"
#include "powertail/volterra.hpp"

using namespace powertail;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCheck = 4;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string formats;
  std::string manifest;
  std::vector<double> tau;
  double beta = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  int jobs = 0;
  bool check = false;
  int quad_order = 64;
};

SweepConfig load_config(const Options& o, bool tau_list = true) {
  SweepConfig c = o.config_path.empty() ? SweepConfig{} : parse_config_file(o.config_path);
  if (tau_list && !o.tau.empty()) {
    c.tau_values = o.tau;
    if (c.k_min > 0.0 && c.k_min > 0.01 / c.tau_values.back()) c.k_min = 0.0;
  }
  if (!std::isnan(o.beta)) c.beta = o.beta;
  if (!std::isnan(o.gap)) c.gap_shift = o.gap;
  if (o.jobs > 0) c.jobs = o.jobs;
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  if (!o.formats.empty()) {
    c.formats.clear();
    std::string item;
    for (char ch : o.formats + ",") {
      if (ch == ',') {
        if (!item.empty()) c.formats.push_back(item);
        item.clear();
      } else if (ch != ' ') {
        item += ch;
      }
    }
  }
  c.validate();
  return c;
}

FriedrichsModel small_model(double beta, double gap, double theta, int panels, int npp, double k_min) {
  const DiscretizedMeasure grid = build_grid(1.0, panels, npp, k_min);
  return assemble_model(grid, build_form_factor(grid, beta), build_switching(theta), gap);
}

int cmd_simulate(const Options& o) {
  SweepConfig c = load_config(o, false);
  const double tau = o.tau.empty() ? c.tau_values.front() : o.tau.front();
  const FriedrichsModel model = build_model(c);
  IntegratorConfig ic = c.trajectory_config();
  ic.record_times.clear();
  for (int m = 1; m <= 10; ++m) ic.record_times.push_back(m / 10.0);
  ic.record_times.push_back(c.s_probe);
  const Trajectory tr = evolve_true(model, tau, ic);
  std::printf("# tau %s  beta %s  gap %s  nodes %ld  scheme %s  steps %lld\n", format_double(tau).c_str(),
              format_double(c.beta).c_str(), format_double(c.gap_shift).c_str(), long(model.n_nodes()),
              to_string(tr.scheme_used), tr.steps);
  std::printf("s,leak\n");
  for (const auto& smp : tr.samples) std::printf("%s,%s\n", format_double(smp.s).c_str(), format_double(smp.leak).c_str());
  std::printf("# sup_leak_window %s  unitarity_drift %s\n", format_double(tr.sup_window_leak).c_str(),
              format_double(tr.unitarity_drift).c_str());
  return 0;
}

int cmd_sweep(const Options& o) {
  const SweepConfig c = load_config(o);
  const SweepResult r = run_sweep(c);
  const auto files = emit_report(r, c.formats, c.out_dir);
  const SweepFits fits = compute_fits(r);
  std::printf("config_hash %s\n", r.config_hash.c_str());
  for (const auto& rec : r.records) {
    if (rec.ok())
      std::printf("tau %-12.6g leak_probe %.6e  sup_window %.6e  drift %.2e\n", rec.tau, rec.leak_probe,
                  rec.sup_leak_window, rec.unitarity_drift);
    else
      std::printf("tau %-12.6g FAILED: %s\n", rec.tau, rec.error.c_str());
  }
  if (fits.have_probe)
    std::printf("fit leak_probe       slope %.4f +- %.4f\n", fits.leak_probe.slope, fits.leak_probe.slope_stderr);
  if (fits.have_window)
    std::printf("fit sup_leak_window  slope %.4f +- %.4f\n", fits.sup_leak_window.slope,
                fits.sup_leak_window.slope_stderr);
  bool all = true;
  for (const auto& chk : evaluate_checks(r, fits)) {
    std::printf("%s %s: %s\n", chk.passed ? "PASS" : "FAIL", chk.name.c_str(), chk.detail.c_str());
    all = all && chk.passed;
  }
  for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
  return (o.check && !all) ? kExitCheck : 0;
}

int cmd_fourier(const Options& o) {
  const auto form = oscint::AsymptoticForm::canonical();
  bool ok = true;
  const double g0 = oscint::bump_hat(0.0);
  std::printf("bump_hat(0) = %.16e\n", g0);
  ok = ok && std::abs(g0 - 0.4439938) <= 1e-6;
  std::printf("p,bump_hat,asymptotic,abs_cos_phase,rel_err,bound\n");
  for (double p : {50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0}) {
    const double num = oscint::bump_hat(p);
    const double asy = oscint::bump_hat_asymptotic(p);
    const double cph = std::abs(std::cos(form.phase(p)));
    const double rel = std::abs(num / asy - 1.0);
    const double bound = 2.0 / std::sqrt(p);
    std::printf("%g,%.10e,%.10e,%.4f,%.4e,%.4e%s\n", p, num, asy, cph, rel, bound,
                cph > 0.3 ? (rel <= bound ? "" : "  FAIL") : "  (near zero)");
    if (cph > 0.3) ok = ok && rel <= bound;
  }
  return (o.check && !ok) ? kExitCheck : 0;
}

int cmd_volterra(const Options& o) {
  const double beta = std::isnan(o.beta) ? 1.5 : o.beta;
  const double tau = o.tau.empty() ? 100.0 : o.tau.front();
  const FriedrichsModel model = small_model(beta, 0.0, std::numbers::pi / 4, 8, 16, 0.01 / tau);
  const WaveOperatorSeries ser = omega_series(model, tau, 4, o.quad_order, 1.5);
  const Eigen::Index d = model.dimension();
  const Eigen::MatrixXcd p = model.projection_dense();
  const Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(d, d) - p;
  bool ok = true;
  std::printf("# beta %g  tau %g  N %ld  quad_order %d  panels %d\n", beta, tau, long(model.n_nodes()), o.quad_order,
              ser.n_panels);
  std::printf("order,norm,wrong_block_1,wrong_block_2,relative\n");
  for (int i = 1; i <= 4; ++i) {
    const Eigen::MatrixXcd& om = ser.terms[i];
    const double nrm = linalg::op_norm(om);
    double w1, w2;
    if (i % 2 == 1) {
      w1 = linalg::op_norm(p * om * p);
      w2 = linalg::op_norm(q * om * q);
    } else {
      w1 = linalg::op_norm(p * om * q);
      w2 = linalg::op_norm(q * om * p);
    }
    const double rel = std::max(w1, w2) / nrm;
    std::printf("%d,%.6e,%.3e,%.3e,%.3e\n", i, nrm, w1, w2, rel);
    ok = ok && rel <= 1e-9;
  }
  const Omega1Tail tail = omega1_tail(model, tau);
  const Eigen::VectorXcd col = ser.terms[1].col(0).tail(model.n_nodes());
  const double rel = (col - tail.column).norm() / tail.norm;
  std::printf("omega1_tail norm %.10e  vs order-1 quadrature: relative difference %.3e\n", tail.norm, rel);
  ok = ok && rel <= 1e-8;
  return (o.check && !ok) ? kExitCheck : 0;
}

int cmd_tilde(const Options& o) {
  SweepConfig c = o.config_path.empty() ? SweepConfig{} : parse_config_file(o.config_path);
  const std::uint64_t seed = c.contour_seeds.empty() ? 11 : c.contour_seeds.front();
  bool ok = true;
  // Random gapped 8x8: two eigenvalues near 0, six in [1, 2].
  std::mt19937_64 rng(seed);
  auto u = [&]() { return 2.0 * unit_uniform(rng()) - 1.0; };
  Eigen::MatrixXcd g(8, 8);
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) g(i, j) = cplx(u(), u());
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  const Eigen::MatrixXcd qm = qr.householderQ();
  Eigen::VectorXd lam(8);
  lam << 0.1 * u(), 0.1 * u(), 1.0 + 0.5 * (1 + u()), 1.0 + 0.5 * (1 + u()), 1.0 + 0.5 * (1 + u()),
      1.0 + 0.5 * (1 + u()), 1.0 + 0.5 * (1 + u()), 1.0 + 0.5 * (1 + u());
  const Eigen::MatrixXcd h = qm * lam.cast<cplx>().asDiagonal() * qm.adjoint();
  const Eigen::MatrixXcd p = qm.leftCols(2) * qm.leftCols(2).adjoint();
  Eigen::MatrixXcd x(8, 8);
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) x(i, j) = cplx(u(), u());
  const ContourSpec cs{0.0, 0.5, 64};
  const double res = linalg::op_norm(tilde(h, p, x, cs) - tilde_eigenbasis(h, p, x, cs));
  std::printf("tilde vs eigenbasis rule (8x8, seed %llu): residual %.3e\n", (unsigned long long)seed, res);
  ok = ok && res <= 1e-10;

  const double gap = std::isnan(o.gap) ? 1.0 : o.gap;
  const double tau = o.tau.empty() ? 50.0 : o.tau.front();
  const FriedrichsModel model = small_model(1.5, gap, std::numbers::pi / 4, 4, 8, 0.01);
  const IbpSuite suite = ibp_suite(model, tau, 1.0, o.quad_order, c.contour_seeds);
  std::printf("IBP identity (N %ld, tau %g, gap %g, quad_order %d, sign %+d)\n", long(model.n_nodes()), tau, gap,
              o.quad_order, suite.cases.front().sign);
  for (std::size_t i = 0; i < suite.cases.size(); ++i) {
    const auto& r = suite.cases[i];
    std::printf("  %-14s lhs %.4e  rhs %.4e  residual %.3e\n",
                i == 0 ? "default" : ("seed " + std::to_string(r.seed)).c_str(), r.lhs_norm, r.rhs_norm, r.residual);
  }
  ok = ok && suite.max_residual <= 1e-6;
  return (o.check && !ok) ? kExitCheck : 0;
}

int cmd_report(const Options& o) {
  if (o.manifest.empty()) throw ConfigError("report: --manifest is required");
  SweepResult r = read_manifest(o.manifest);
  std::vector<std::string> formats = r.config.formats;
  if (!o.formats.empty()) {
    formats.clear();
    std::string item;
    for (char ch : o.formats + ",") {
      if (ch == ',') {
        if (!item.empty()) formats.push_back(item);
        item.clear();
      } else if (ch != ' ') {
        item += ch;
      }
    }
  }
  const std::string dir = o.out_dir.empty() ? r.config.out_dir : o.out_dir;
  for (const auto& f : emit_report(r, formats, dir)) std::printf("wrote %s\n", f.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adiabatic leak experiments on the threshold Friedrichs model"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "INI configuration file");
    sub->add_option("--tau", o.tau, "tau value(s), comma separated")->delimiter(',');
    sub->add_option("--beta", o.beta, "form factor exponent");
    sub->add_option("--gap", o.gap, "gap shift");
    sub->add_flag("--check", o.check, "exit with status 4 when a check fails");
  };
  auto* sim = app.add_subcommand("simulate", "one trajectory, sampled leaks");
  add_common(sim);
  auto* sw = app.add_subcommand("sweep", "tau sweep with power-law fits and reports");
  add_common(sw);
  sw->add_option("--out", o.out_dir, "output directory");
  sw->add_option("--format", o.formats, "csv,json,svg");
  sw->add_option("--jobs", o.jobs, "parallel tau points");
  auto* fc = app.add_subcommand("fourier-check", "bump transform vs its saddle-point form");
  add_common(fc);
  auto* vc = app.add_subcommand("volterra-check", "parity of the Volterra terms and the first-order tail");
  add_common(vc);
  vc->add_option("--quad-order", o.quad_order, "Gauss points per panel");
  auto* tc = app.add_subcommand("tilde-check", "contour tilde operation and integration by parts");
  add_common(tc);
  tc->add_option("--quad-order", o.quad_order, "Gauss points");
  auto* rp = app.add_subcommand("report", "re-emit outputs from a stored manifest");
  rp->add_option("--manifest", o.manifest, "sweep.json written by a previous sweep")->required();
  rp->add_option("--out", o.out_dir, "output directory");
  rp->add_option("--format", o.formats, "csv,json,svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  try {
    if (sim->parsed()) return cmd_simulate(o);
    if (sw->parsed()) return cmd_sweep(o);
    if (fc->parsed()) return cmd_fourier(o);
    if (vc->parsed()) return cmd_volterra(o);
    if (tc->parsed()) return cmd_tilde(o);
    if (rp->parsed()) return cmd_report(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
