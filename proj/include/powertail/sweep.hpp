#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "powertail/model.hpp"
#include "powertail/propagate.hpp"

namespace powertail {

struct SweepConfig {
  // [model]
  double beta = 1.5;
  double theta_total = 0.78539816339744831;  // pi / 4
  double gap_shift = 0.0;
  double cutoff_fraction = 0.5;
  // [grid]
  double k_max = 1.0;
  double k_min = 0.0;  // 0: use 0.01 / max(tau_values)
  double panel_ratio = 2.0;
  int n_panels = 0;  // 0: derived from panel_ratio
  int nodes_per_panel = 16;
  // [integrator]; record_times and s_end are set from s_probe.
  IntegratorConfig integrator;
  // [sweep]
  std::vector<double> tau_values{100.0, 316.22776601683796, 1000.0, 3162.2776601683795, 10000.0};
  double s_probe = 1.5;
  int jobs = 1;
  std::vector<std::uint64_t> contour_seeds{11, 23, 37};
  // [output]
  std::string out_dir = "results";
  std::vector<std::string> formats{"csv", "json"};
  bool timings = false;

  void validate() const;
  double effective_k_min() const;
  int effective_panels() const;
  /// Integrator settings with record_times = {s_probe}, s_end = s_probe.
  IntegratorConfig trajectory_config() const;
};

SweepConfig parse_config_file(const std::filesystem::path& path);
SweepConfig parse_config_string(const std::string& text);

/// Full config as INI text in a fixed key order. With `numerics_only`, the
/// [output] section and run-time knobs (jobs, backend) are left out.
std::string canonical_config(const SweepConfig& config, bool numerics_only = false);

/// SHA-256 (hex) of canonical_config(config, true).
std::string config_hash(const SweepConfig& config);

/// Grid, form factor, switching profile and model for the config.
FriedrichsModel build_model(const SweepConfig& config);

struct SweepRecord {
  double tau = 0.0;
  double leak_probe = 0.0;
  double sup_leak_window = 0.0;
  double unitarity_drift = 0.0;
  double wall_time_s = 0.0;
  long long steps = 0;
  std::string scheme;
  std::string error;  // empty on success
  bool ok() const { return error.empty(); }
};

struct SweepResult {
  SweepConfig config;
  std::string config_hash;
  std::string code_version;
  Eigen::Index n_nodes = 0;
  std::vector<SweepRecord> records;  // ascending tau
};

SweepResult run_sweep(const SweepConfig& config);

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double max_abs_residual = 0.0;
  int n_points = 0;
};

/// Least-squares line through (log tau, log value).
FitResult fit_powerlaw(const std::vector<std::pair<double, double>>& points);

struct SweepFits {
  bool have_probe = false, have_window = false;
  FitResult leak_probe, sup_leak_window;
  std::vector<double> local_probe_slopes;  // between consecutive taus
};

SweepFits compute_fits(const SweepResult& result);

struct CheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Pass/fail flags for the claims that apply to this configuration.
std::vector<CheckOutcome> evaluate_checks(const SweepResult& result, const SweepFits& fits);

/// Writes sweep.csv / sweep.json / sweep.svg into out_dir; returns the paths.
std::vector<std::filesystem::path> emit_report(const SweepResult& result, const std::vector<std::string>& formats,
                                               const std::filesystem::path& out_dir);

std::string format_csv(const SweepResult& result);
std::string format_json(const SweepResult& result);
std::string format_svg(const SweepResult& result);

/// Reads a manifest written by emit_report back into a SweepResult.
SweepResult read_manifest(const std::filesystem::path& path);

/// "%.16e": 17 significant digits, round-trips every double.
std::string format_double(double v);

}  // namespace powertail
