#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include "json.hpp"
#include <sstream>

#include "powertail/errors.hpp"
#include "powertail/sweep.hpp"

namespace powertail {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string format_csv(const SweepResult& r) {
  std::ostringstream o;
  o << "tau,s_probe,leak_probe,sup_leak_window,beta,gap_shift,n_nodes,theta_total,unitarity_drift,wall_time_s\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& rec : r.records) {
    // Wall time breaks byte-identical output, so it is opt-in.
    const double wall = r.config.timings ? rec.wall_time_s : 0.0;
    o << format_double(rec.tau) << ',' << format_double(r.config.s_probe) << ','
      << format_double(rec.ok() ? rec.leak_probe : nan) << ','
      << format_double(rec.ok() ? rec.sup_leak_window : nan) << ',' << format_double(r.config.beta) << ','
      << format_double(r.config.gap_shift) << ',' << r.n_nodes << ',' << format_double(r.config.theta_total) << ','
      << format_double(rec.unitarity_drift) << ',' << format_double(wall) << '\n';
  }
  return o.str();
}

namespace {

json fit_json(const FitResult& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"slope_stderr", f.slope_stderr},
          {"max_abs_residual", f.max_abs_residual},
          {"n_points", f.n_points}};
}

}  // namespace

std::string format_json(const SweepResult& r) {
  const SweepFits fits = compute_fits(r);
  json j;
  j["code_version"] = r.code_version;
  j["config_hash"] = r.config_hash;
  j["config_ini"] = canonical_config(r.config, false);
  j["n_nodes"] = r.n_nodes;
  json recs = json::array();
  for (const auto& rec : r.records) {
    json x;
    x["tau"] = rec.tau;
    x["leak_probe"] = rec.ok() ? json(rec.leak_probe) : json(nullptr);
    x["sup_leak_window"] = rec.ok() ? json(rec.sup_leak_window) : json(nullptr);
    x["unitarity_drift"] = rec.unitarity_drift;
    x["wall_time_s"] = rec.wall_time_s;
    x["steps"] = rec.steps;
    x["scheme"] = rec.scheme;
    x["error"] = rec.error;
    recs.push_back(x);
  }
  j["records"] = recs;
  json jf = json::object();
  if (fits.have_probe) jf["leak_probe"] = fit_json(fits.leak_probe);
  if (fits.have_window) jf["sup_leak_window"] = fit_json(fits.sup_leak_window);
  jf["local_probe_slopes"] = fits.local_probe_slopes;
  j["fits"] = jf;
  json checks = json::object(), details = json::object();
  for (const auto& c : evaluate_checks(r, fits)) {
    checks[c.name] = c.passed;
    details[c.name] = c.detail;
  }
  j["checks"] = checks;
  j["check_details"] = details;
  return j.dump(2) + "\n";
}

std::string format_svg(const SweepResult& r) {
  const SweepFits fits = compute_fits(r);
  struct Series {
    const char* name;
    const char* colour;
    std::vector<std::pair<double, double>> pts;
    const FitResult* fit;
  };
  std::vector<Series> series{{"leak_probe", "#1f77b4", {}, fits.have_probe ? &fits.leak_probe : nullptr},
                             {"sup_leak_window", "#d62728", {}, fits.have_window ? &fits.sup_leak_window : nullptr}};
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& rec : r.records) {
    if (!rec.ok()) continue;
    const double vals[2] = {rec.leak_probe, rec.sup_leak_window};
    for (int k = 0; k < 2; ++k) {
      if (!(vals[k] > 0.0)) continue;
      const double x = std::log10(rec.tau), y = std::log10(vals[k]);
      series[k].pts.emplace_back(x, y);
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmin > xmax) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
  const double w = 640, h = 420, ml = 70, mr = 20, mt = 30, mb = 50;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };
  char buf[256];
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"420\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"black\"/>\n", ml, mt,
                w - ml - mr, h - mt - mb);
  o << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" text-anchor=\"middle\">log10 tau [%.2f, %.2f]</text>\n",
                0.5 * (ml + w - mr), h - 15.0, xmin, xmax);
  o << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"15\" y=\"%.1f\" font-size=\"13\" transform=\"rotate(-90 15 %.1f)\" "
                "text-anchor=\"middle\">log10 leak [%.2f, %.2f]</text>\n",
                0.5 * (mt + h - mb), 0.5 * (mt + h - mb), ymin, ymax);
  o << buf;
  int row = 0;
  for (const auto& s : series) {
    o << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.pts.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", px(s.pts[i].first), py(s.pts[i].second));
      o << buf;
    }
    o << "\"/>\n";
    for (const auto& [x, y] : s.pts) {
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", px(x), py(y), s.colour);
      o << buf;
    }
    if (s.fit) {
      const double l10 = std::log(10.0);
      auto fy = [&](double x) { return (s.fit->intercept + s.fit->slope * x * l10) / l10; };
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" stroke-dasharray=\"4 3\"/>\n",
                    px(xmin), py(fy(xmin)), px(xmax), py(fy(xmax)), s.colour);
      o << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" fill=\"%s\">%s slope %.3f</text>\n",
                  ml + 10.0, mt + 18.0 + 16.0 * row, s.colour, s.name, s.fit ? s.fit->slope : 0.0);
    o << buf;
    ++row;
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<std::filesystem::path> emit_report(const SweepResult& result, const std::vector<std::string>& formats,
                                               const std::filesystem::path& out_dir) {
  if (result.records.empty()) throw ContractViolation("emit_report: no records");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("emit_report: cannot create '" + out_dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& f : formats) {
    std::string body;
    if (f == "csv") body = format_csv(result);
    else if (f == "json") body = format_json(result);
    else if (f == "svg") body = format_svg(result);
    else throw ConfigError("emit_report: unknown format '" + f + "'");
    const auto path = out_dir / ("sweep." + f);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("emit_report: cannot write '" + path.string() + "'");
    out << body;
    out.close();
    if (!out) throw IoError("emit_report: write failed for '" + path.string() + "'");
    written.push_back(path);
  }
  return written;
}

SweepResult read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_manifest: cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("read_manifest: malformed JSON: " + std::string(e.what()));
  }
  SweepResult r;
  try {
    r.config = parse_config_string(j.at("config_ini").get<std::string>());
    r.config_hash = j.at("config_hash").get<std::string>();
    r.code_version = j.at("code_version").get<std::string>();
    r.n_nodes = j.at("n_nodes").get<Eigen::Index>();
    for (const auto& x : j.at("records")) {
      SweepRecord rec;
      rec.tau = x.at("tau").get<double>();
      rec.error = x.at("error").get<std::string>();
      if (!x.at("leak_probe").is_null()) rec.leak_probe = x.at("leak_probe").get<double>();
      if (!x.at("sup_leak_window").is_null()) rec.sup_leak_window = x.at("sup_leak_window").get<double>();
      rec.unitarity_drift = x.at("unitarity_drift").get<double>();
      rec.wall_time_s = x.at("wall_time_s").get<double>();
      rec.steps = x.at("steps").get<long long>();
      rec.scheme = x.at("scheme").get<std::string>();
      r.records.push_back(rec);
    }
  } catch (const json::exception& e) {
    throw IoError("read_manifest: missing field: " + std::string(e.what()));
  }
  return r;
}

}  // namespace powertail
