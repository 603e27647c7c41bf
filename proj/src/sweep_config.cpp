#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "powertail/errors.hpp"
#include "powertail/sweep.hpp"

namespace powertail {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(x))
    throw ConfigError("config: '" + key + "' expects a finite number, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const long long x = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size())
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError("config: '" + key + "' expects true or false, got '" + v + "'");
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void apply(SweepConfig& c, const std::string& section, const std::string& key, const std::string& v) {
  const std::string full = section + "." + key;
  auto& ic = c.integrator;
  if (section == "model") {
    if (key == "beta") c.beta = to_double(full, v);
    else if (key == "theta_total") c.theta_total = to_double(full, v);
    else if (key == "gap_shift") c.gap_shift = to_double(full, v);
    else if (key == "cutoff_fraction") c.cutoff_fraction = to_double(full, v);
    else throw ConfigError("config: unknown key '" + full + "'");
  } else if (section == "grid") {
    if (key == "k_max") c.k_max = to_double(full, v);
    else if (key == "k_min") c.k_min = to_double(full, v);
    else if (key == "panel_ratio") c.panel_ratio = to_double(full, v);
    else if (key == "n_panels") c.n_panels = int(to_integer(full, v));
    else if (key == "nodes_per_panel") c.nodes_per_panel = int(to_integer(full, v));
    else throw ConfigError("config: unknown key '" + full + "'");
  } else if (section == "integrator") {
    if (key == "scheme") ic.scheme = scheme_from_string(trim(v));
    else if (key == "max_step") ic.max_step = to_double(full, v);
    else if (key == "phase_per_step") ic.phase_per_step = to_double(full, v);
    else if (key == "max_kick") ic.max_kick = to_double(full, v);
    else if (key == "window_samples") ic.window_samples = int(to_integer(full, v));
    else if (key == "step_budget") ic.step_budget = to_double(full, v);
    else if (key == "backend") ic.backend = kernels::backend_from_string(trim(v));
    else if (key == "drift_tolerance") ic.drift_tolerance = to_double(full, v);
    else throw ConfigError("config: unknown key '" + full + "'");
  } else if (section == "sweep") {
    if (key == "tau_values") {
      c.tau_values.clear();
      for (const auto& item : split_list(v)) c.tau_values.push_back(to_double(full, item));
    } else if (key == "tau_log10") {
      const auto parts = split_list(v);
      if (parts.size() != 3) throw ConfigError("config: sweep.tau_log10 expects 'start, stop, count'");
      const double a = to_double(full, parts[0]), b = to_double(full, parts[1]);
      const long long n = to_integer(full, parts[2]);
      if (n < 2) throw ConfigError("config: sweep.tau_log10 count must be >= 2");
      c.tau_values.clear();
      for (long long i = 0; i < n; ++i) c.tau_values.push_back(std::pow(10.0, a + (b - a) * double(i) / double(n - 1)));
    } else if (key == "s_probe") {
      c.s_probe = to_double(full, v);
    } else if (key == "jobs") {
      c.jobs = int(to_integer(full, v));
    } else if (key == "contour_seeds") {
      c.contour_seeds.clear();
      for (const auto& item : split_list(v)) {
        const long long s = to_integer(full, item);
        if (s < 0) throw ConfigError("config: contour seeds must be >= 0");
        c.contour_seeds.push_back(std::uint64_t(s));
      }
    } else {
      throw ConfigError("config: unknown key '" + full + "'");
    }
  } else if (section == "output") {
    if (key == "dir") c.out_dir = trim(v);
    else if (key == "formats") c.formats = split_list(v);
    else if (key == "timings") c.timings = to_bool(full, v);
    else throw ConfigError("config: unknown key '" + full + "'");
  } else {
    throw ConfigError("config: unknown section '[" + section + "]'");
  }
}

SweepConfig from_ptree(const pt::ptree& tree) {
  SweepConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("config: key '" + section + "' must sit inside a [section]");
    for (const auto& [key, value] : body) apply(c, section, key, value.data());
  }
  c.validate();
  return c;
}

}  // namespace

double SweepConfig::effective_k_min() const {
  if (k_min > 0.0) return k_min;
  if (tau_values.empty()) throw ConfigError("config: k_min rule needs tau_values");
  return 0.01 / *std::max_element(tau_values.begin(), tau_values.end());
}

int SweepConfig::effective_panels() const {
  if (n_panels > 0) return n_panels;
  return panels_for_ratio(k_max, effective_k_min(), panel_ratio);
}

IntegratorConfig SweepConfig::trajectory_config() const {
  IntegratorConfig ic = integrator;
  ic.record_times = {s_probe};
  ic.s_end = s_probe;
  return ic;
}

void SweepConfig::validate() const {
  if (!(beta > 0.0)) throw ConfigError("config: model.beta must be > 0 (beta = 0 is degenerate)");
  if (!(theta_total > 0.0)) throw ConfigError("config: model.theta_total must be > 0");
  if (!(gap_shift >= 0.0)) throw ConfigError("config: model.gap_shift must be >= 0");
  if (!(cutoff_fraction > 0.0 && cutoff_fraction < 1.0))
    throw ConfigError("config: model.cutoff_fraction must lie in (0, 1)");
  if (!(k_max > 0.0)) throw ConfigError("config: grid.k_max must be > 0");
  if (k_min < 0.0) throw ConfigError("config: grid.k_min must be >= 0 (0 selects the automatic rule)");
  if (!(panel_ratio > 1.0)) throw ConfigError("config: grid.panel_ratio must exceed 1");
  if (n_panels < 0) throw ConfigError("config: grid.n_panels must be >= 0");
  if (nodes_per_panel < 2) throw ConfigError("config: grid.nodes_per_panel must be >= 2");
  if (tau_values.size() < 4) throw ConfigError("config: sweep needs at least 4 tau values");
  for (std::size_t i = 0; i < tau_values.size(); ++i) {
    if (!(tau_values[i] > 0.0)) throw ConfigError("config: tau values must be > 0");
    if (i > 0 && !(tau_values[i] > tau_values[i - 1])) throw ConfigError("config: tau values must ascend strictly");
  }
  // Gapped leaks reach the roundoff floor about one decade past tau = 100.
  const double min_span = gap_shift > 0.0 ? 1.0 : 1.5;
  if (std::log10(tau_values.back() / tau_values.front()) < min_span - 1e-9)
    throw ConfigError("config: tau values must span at least " + num(min_span) + " decades");
  const double kmin = effective_k_min();
  if (!(kmin < k_max)) throw ConfigError("config: need k_min < k_max");
  if (kmin > 0.01 / tau_values.back() * (1.0 + 1e-12))
    throw ConfigError("config: k_min must not exceed 0.01 / max(tau)");
  if (!(s_probe > 1.0)) throw ConfigError("config: sweep.s_probe must exceed 1");
  if (jobs < 1) throw ConfigError("config: sweep.jobs must be >= 1");
  for (const auto& f : formats)
    if (f != "csv" && f != "json" && f != "svg") throw ConfigError("config: unknown output format '" + f + "'");
  trajectory_config().validate();
}

SweepConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return from_ptree(tree);
}

SweepConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

std::string canonical_config(const SweepConfig& c, bool numerics_only) {
  std::ostringstream o;
  const auto& ic = c.integrator;
  o << "[model]\n"
    << "beta = " << num(c.beta) << "\n"
    << "theta_total = " << num(c.theta_total) << "\n"
    << "gap_shift = " << num(c.gap_shift) << "\n"
    << "cutoff_fraction = " << num(c.cutoff_fraction) << "\n"
    << "[grid]\n"
    << "k_max = " << num(c.k_max) << "\n"
    << "k_min = " << num(c.effective_k_min()) << "\n"
    << "panel_ratio = " << num(c.panel_ratio) << "\n"
    << "n_panels = " << c.effective_panels() << "\n"
    << "nodes_per_panel = " << c.nodes_per_panel << "\n"
    << "[integrator]\n"
    << "scheme = " << to_string(ic.scheme) << "\n"
    << "max_step = " << num(ic.max_step) << "\n"
    << "phase_per_step = " << num(ic.phase_per_step) << "\n"
    << "max_kick = " << num(ic.max_kick) << "\n"
    << "window_samples = " << ic.window_samples << "\n"
    << "step_budget = " << num(ic.step_budget) << "\n";
  if (!numerics_only) o << "backend = " << kernels::to_string(ic.backend) << "\n";
  o << "drift_tolerance = " << num(ic.drift_tolerance) << "\n"
    << "[sweep]\n"
    << "tau_values = ";
  for (std::size_t i = 0; i < c.tau_values.size(); ++i) o << (i ? ", " : "") << num(c.tau_values[i]);
  o << "\n"
    << "s_probe = " << num(c.s_probe) << "\n";
  if (!numerics_only) o << "jobs = " << c.jobs << "\n";
  o << "contour_seeds = ";
  for (std::size_t i = 0; i < c.contour_seeds.size(); ++i) o << (i ? ", " : "") << c.contour_seeds[i];
  o << "\n";
  if (!numerics_only) {
    o << "[output]\n"
      << "dir = " << c.out_dir << "\n"
      << "formats = ";
    for (std::size_t i = 0; i < c.formats.size(); ++i) o << (i ? ", " : "") << c.formats[i];
    o << "\n"
      << "timings = " << (c.timings ? "true" : "false") << "\n";
  }
  return o.str();
}

std::string config_hash(const SweepConfig& config) {
  const std::string text = canonical_config(config, true);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("config_hash: SHA-256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

FriedrichsModel build_model(const SweepConfig& c) {
  const DiscretizedMeasure grid = build_grid(c.k_max, c.effective_panels(), c.nodes_per_panel, c.effective_k_min());
  const FormFactor ff = build_form_factor(grid, c.beta, c.cutoff_fraction);
  return assemble_model(grid, ff, build_switching(c.theta_total), c.gap_shift);
}

}  // namespace powertail
