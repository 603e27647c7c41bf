#include "powertail/sweep.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>

#include "powertail/errors.hpp"

namespace powertail {

SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  SweepResult out;
  out.config = config;
  out.config_hash = config_hash(config);
  out.code_version = POWERTAIL_VERSION;
  const FriedrichsModel model = build_model(config);
  out.n_nodes = model.n_nodes();
  const IntegratorConfig ic = config.trajectory_config();
  const int n = int(config.tau_values.size());
  out.records.resize(n);
  // Largest tau first so the expensive points start early; slots keep order.
#pragma omp parallel for schedule(dynamic, 1) num_threads(config.jobs)
  for (int i = n - 1; i >= 0; --i) {
    SweepRecord& rec = out.records[i];
    rec.tau = config.tau_values[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Trajectory tr = evolve_true(model, rec.tau, ic);
      rec.leak_probe = tr.samples.back().leak;
      rec.sup_leak_window = tr.sup_window_leak;
      rec.unitarity_drift = tr.unitarity_drift;
      rec.steps = tr.steps;
      rec.scheme = to_string(tr.scheme_used);
    } catch (const IntegrationFailure& e) {
      rec.error = std::string("integration_failure: ") + e.what();
      rec.unitarity_drift = e.drift();
    } catch (const NumericalError& e) {
      rec.error = std::string("numerical_error: ") + e.what();
    }
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return out;
}

FitResult fit_powerlaw(const std::vector<std::pair<double, double>>& points) {
  std::vector<double> bad;
  for (const auto& [t, v] : points)
    if (!(v > 0.0) || !(t > 0.0)) bad.push_back(t);
  if (!bad.empty()) {
    std::string msg = "fit_powerlaw: non-positive values at tau =";
    char buf[32];
    for (double t : bad) {
      std::snprintf(buf, sizeof buf, " %.6g", t);
      msg += buf;
    }
    throw FitDomainError(msg, bad);
  }
  if (points.size() < 4) throw FitDomainError("fit_powerlaw: need at least 4 points", {});
  const int n = int(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [t, v] : points) {
    mx += std::log(t);
    my += std::log(v);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [t, v] : points) {
    const double dx = std::log(t) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(v) - my);
  }
  if (!(sxx > 0.0)) throw FitDomainError("fit_powerlaw: all tau values coincide", {});
  FitResult f;
  f.n_points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (const auto& [t, v] : points) {
    const double r = std::log(v) - (f.intercept + f.slope * std::log(t));
    ssr += r * r;
    f.max_abs_residual = std::max(f.max_abs_residual, std::abs(r));
  }
  f.slope_stderr = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
  return f;
}

SweepFits compute_fits(const SweepResult& result) {
  SweepFits fits;
  std::vector<std::pair<double, double>> probe, window;
  for (const auto& r : result.records) {
    if (!r.ok()) continue;
    probe.emplace_back(r.tau, r.leak_probe);
    window.emplace_back(r.tau, r.sup_leak_window);
  }
  try {
    fits.leak_probe = fit_powerlaw(probe);
    fits.have_probe = true;
  } catch (const FitDomainError&) {
  }
  try {
    fits.sup_leak_window = fit_powerlaw(window);
    fits.have_window = true;
  } catch (const FitDomainError&) {
  }
  for (std::size_t i = 1; i < probe.size(); ++i) {
    const auto& [t0, v0] = probe[i - 1];
    const auto& [t1, v1] = probe[i];
    if (v0 > 0.0 && v1 > 0.0) fits.local_probe_slopes.push_back(std::log(v1 / v0) / std::log(t1 / t0));
  }
  return fits;
}

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

}  // namespace

std::vector<CheckOutcome> evaluate_checks(const SweepResult& result, const SweepFits& fits) {
  std::vector<CheckOutcome> out;
  const SweepConfig& c = result.config;
  bool complete = true;
  double max_drift = 0.0;
  for (const auto& r : result.records) {
    complete = complete && r.ok();
    max_drift = std::max(max_drift, r.unitarity_drift);
  }
  out.push_back({"records_complete", complete, complete ? "all tau points integrated" : "some tau points failed"});
  out.push_back({"unitarity_drift", max_drift <= 1e-9, fmt("max drift %.3e (limit 1e-9)", max_drift)});

  const double m = fits.leak_probe.slope;
  const double w = fits.sup_leak_window.slope;
  if (c.gap_shift == 0.0) {
    if (c.beta > 1.0 && c.beta < 2.0) {
      out.push_back({"long_time_slope", fits.have_probe && std::abs(m + c.beta) <= 0.12,
                     fmt("slope %.4f, expected -beta +- 0.12 (beta %.3g)", m, c.beta)});
      out.push_back({"in_window_slope", fits.have_window && std::abs(w + 1.0) <= 0.15,
                     fmt("slope %.4f, expected -1 +- 0.15", w)});
    } else if (c.beta == 1.0) {
      out.push_back({"long_time_slope", fits.have_probe && m > -1.15 && m < -0.85,
                     fmt("slope %.4f, expected in (-1.15, -0.85)", m)});
    } else if (c.beta < 1.0) {
      out.push_back({"long_time_slope", fits.have_probe && std::abs(m + c.beta) <= 0.10,
                     fmt("slope %.4f, expected -beta +- 0.10 (beta %.3g)", m, c.beta)});
    }
  } else {
    out.push_back({"long_time_slope", fits.have_probe && m <= -2.5, fmt("slope %.4f, expected <= -2.5", m)});
    bool steepening = fits.local_probe_slopes.size() >= 2;
    for (std::size_t i = 1; i < fits.local_probe_slopes.size(); ++i)
      steepening = steepening && fits.local_probe_slopes[i] < fits.local_probe_slopes[i - 1];
    out.push_back({"monotone_steepening", steepening, "local slopes between consecutive tau strictly decrease"});
    out.push_back({"in_window_slope", fits.have_window && std::abs(w + 1.0) <= 0.15,
                   fmt("slope %.4f, expected -1 +- 0.15", w)});
  }
  return out;
}

}  // namespace powertail
