#pragma once

// CSV rows, JSON results, SVG and gnuplot emission.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lppl/cli/config.hpp"
#include "lppl/experiments.hpp"

namespace lppl::cli {

using nlohmann::json;

/// Raised for unreadable or unwritable files and corrupt result files.
class IoError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kCsvHeader =
    "scenario_id,N,s,p_scale,branch,dist_YX,dist_Y_defect,abs_Y,discrepancy_obs,discrepancy_tracenorm,gap_H,gap_HP,"
    "resid,seed";

inline std::string format_distance(Distance d) { return is_infinite(d) ? "inf" : format_int(d); }

inline std::string csv_row(const LpplRecord& r) {
  std::string row;
  row.reserve(200);
  auto put = [&](const std::string& f) {
    if (!row.empty()) row += ',';
    row += f;
  };
  row = r.scenario_id;
  put(format_int(r.n_sites));
  put(format_double(r.s));
  put(format_double(r.p_scale));
  put(format_int(r.branch));
  put(format_distance(r.dist_yx));
  put(format_distance(r.dist_y_defect));
  put(format_int(r.abs_y));
  put(format_double(r.discrepancy_obs));
  put(format_double(r.discrepancy_tracenorm));
  put(format_double(r.gap_h));
  put(format_double(r.gap_hp));
  put(format_double(r.resid));
  put(format_int(r.seed));
  return row;
}

// JSON has no NaN or infinity; both become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
inline json distance(Distance d) { return is_infinite(d) ? json(nullptr) : json(d); }

inline json to_json(const SolveDiagnostics& d) {
  return json{{"matvecs", d.matvecs},           {"restarts", d.restarts},   {"wall_seconds", number(d.wall_seconds)},
              {"max_residual", number(d.max_residual)}, {"converged", d.converged}, {"degeneracy", d.degeneracy}};
}

inline json to_json(const LpplRecord& r) {
  return json{{"scenario_id", r.scenario_id},
              {"N", r.n_sites},
              {"s", r.s},
              {"p_scale", r.p_scale},
              {"branch", r.branch},
              {"observable", r.observable},
              {"label", r.label},
              {"dist_YX", distance(r.dist_yx)},
              {"dist_Y_defect", distance(r.dist_y_defect)},
              {"dist_Y_edge", distance(r.dist_y_edge)},
              {"abs_Y", r.abs_y},
              {"norm_A", number(r.norm_a)},
              {"discrepancy_obs", number(r.discrepancy_obs)},
              {"discrepancy_tracenorm", number(r.discrepancy_tracenorm)},
              {"obs_perturbed_reference", number(r.obs_perturbed_reference)},
              {"obs_reference", number(r.obs_reference)},
              {"tn_perturbed_reference", number(r.tn_perturbed_reference)},
              {"tn_reference", number(r.tn_reference)},
              {"gap_H", number(r.gap_h)},
              {"gap_HP", number(r.gap_hp)},
              {"resid", number(r.resid)},
              {"converged", r.converged},
              {"oracle_energy_error", number(r.oracle_energy_error)},
              {"seed", r.seed},
              {"solve_H", to_json(r.solve_h)},
              {"solve_HP", to_json(r.solve_hp)}};
}

inline json to_json(const std::vector<DecayPoint>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(json{{"distance", p.distance}, {"abs_Y", p.abs_y}, {"value", number(p.value)}});
  return a;
}

inline json to_json(const DecayFit& f, const FitOptions& opt) {
  return json{{"status", to_string(f.status)},
              {"c2_hat", number(f.c2_hat)},
              {"c1_hat", number(f.c1_hat)},
              {"intercept", number(f.intercept)},
              {"r_squared", number(f.r_squared)},
              {"abs_y_fitted", f.abs_y_fitted},
              {"min_distance", distance(opt.min_distance)},
              {"max_distance", distance(opt.max_distance)},
              {"noise_floor", opt.noise_floor},
              {"points", to_json(f.points)},
              {"envelope", to_json(f.envelope)}};
}

/// One sweep cell as stored in the results file.
struct CellResult {
  std::string scenario_id;
  std::size_t n = 0;
  double s = 0.0;
  double p_scale = 0.0;
  std::uint64_t seed = 0;
  std::vector<LpplRecord> records;
  DecayFit fit;
};

inline json to_json(const CellResult& c, const FitOptions& opt) {
  json recs = json::array();
  for (const auto& r : c.records) recs.push_back(to_json(r));
  return json{{"scenario_id", c.scenario_id}, {"N", c.n},       {"s", c.s},
              {"p_scale", c.p_scale},         {"seed", c.seed}, {"fit", to_json(c.fit, opt)},
              {"records", recs}};
}

// ---------------------------------------------------------------------------
// Reading results back for plotting.

struct PlotSeries {
  std::string scenario_id;
  std::size_t n = 0;
  double s = 0.0;
  std::vector<DecayPoint> envelope;
  DecayFit fit;
};

inline double json_number(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

/// Refits every cell from its stored envelope, so the plotted line is exactly what the points imply.
inline std::vector<PlotSeries> read_plot_series(const json& results) {
  std::vector<PlotSeries> out;
  try {
    for (const auto& cell : results.at("cells")) {
      PlotSeries s;
      s.scenario_id = cell.at("scenario_id").get<std::string>();
      s.n = cell.at("N").get<std::size_t>();
      s.s = cell.at("s").get<double>();
      const json& fit = cell.at("fit");
      FitOptions opt;
      opt.noise_floor = fit.at("noise_floor").get<double>();
      std::vector<LpplRecord> pseudo;
      for (const auto& p : fit.at("envelope")) {
        DecayPoint d{p.at("distance").get<Distance>(), p.at("abs_Y").get<std::size_t>(), json_number(p.at("value"))};
        s.envelope.push_back(d);
        LpplRecord r;
        r.dist_yx = d.distance;
        r.abs_y = d.abs_y;
        r.norm_a = 1.0;
        r.discrepancy_obs = d.value;
        pseudo.push_back(r);
      }
      opt.fit_abs_y = fit.at("abs_y_fitted").get<bool>();
      s.fit = fit_decay(pseudo, opt);
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("corrupt results file: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG.

inline std::string svg_escape(const std::string& s) {
  std::string o;
  for (char ch : s) {
    switch (ch) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += ch;
    }
  }
  return o;
}

/// log10(discrepancy) against distance, one polyline of markers and fitted line per series.
inline std::string render_svg(const std::string& title, const std::vector<PlotSeries>& series) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (const auto& p : s.envelope) {
      if (!(p.value > 0.0)) continue;
      xmin = std::min(xmin, double(p.distance));
      xmax = std::max(xmax, double(p.distance));
      ymin = std::min(ymin, std::log10(p.value));
      ymax = std::max(ymax, std::log10(p.value));
    }
  const bool empty = xmin > xmax;
  if (empty) { xmin = 0; xmax = 1; ymin = -1; ymax = 0; }
  if (xmax == xmin) { xmin -= 1; xmax += 1; }
  ymin = std::floor(ymin);
  ymax = std::ceil(ymax);
  if (ymax == ymin) ymax += 1;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << svg_escape(title) << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int y = int(ymin); y <= int(ymax); ++y)
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">1e" << y << "</text>\n";
  const int xstep = std::max(1, int((xmax - xmin) / 10));
  for (int x = int(std::ceil(xmin)); x <= int(xmax); x += xstep)
    o << "<text x=\"" << px(x) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << x << "</text>\n";
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">distance</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
    << ")\" text-anchor=\"middle\">discrepancy</text>\n";

  bool all_below = !series.empty();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* col = colors[i % 6];
    all_below &= s.fit.status == FitStatus::below_measurable_range;
    for (const auto& p : s.envelope) {
      if (!(p.value > 0.0)) continue;
      o << "<circle cx=\"" << px(double(p.distance)) << "\" cy=\"" << py(std::log10(p.value)) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    }
    std::string note = s.scenario_id + "  " + to_string(s.fit.status);
    if (s.fit.status == FitStatus::ok || s.fit.status == FitStatus::non_decaying) {
      double a = 1e300, b = -1e300;
      for (const auto& p : s.fit.points) {
        a = std::min(a, double(p.distance));
        b = std::max(b, double(p.distance));
      }
      const double ya = (s.fit.intercept - s.fit.c2_hat * a) / std::log(10.0);
      const double yb = (s.fit.intercept - s.fit.c2_hat * b) / std::log(10.0);
      if (!s.fit.abs_y_fitted)
        o << "<line x1=\"" << px(a) << "\" y1=\"" << py(ya) << "\" x2=\"" << px(b) << "\" y2=\"" << py(yb)
          << "\" stroke=\"" << col << "\" stroke-dasharray=\"6 3\"/>\n";
      std::ostringstream n;
      n.precision(4);
      n << s.scenario_id << "  c2_hat = " << s.fit.c2_hat << "  r^2 = " << s.fit.r_squared;
      note = n.str();
    }
    o << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (i + 1) << "\" text-anchor=\"end\" fill=\"" << col << "\">"
      << svg_escape(note) << "</text>\n";
  }
  if (all_below || empty)
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << (T + H - B) / 2
      << "\" text-anchor=\"middle\" font-size=\"18\" fill=\"#888\">below measurable range</text>\n";
  o << "</svg>\n";
  return o.str();
}

/// Plain-text gnuplot script reading the .dat files written next to it.
inline std::string render_gnuplot(const std::vector<std::pair<std::string, std::vector<std::string>>>& plots) {
  std::ostringstream o;
  o << "set logscale y\nset xlabel 'distance'\nset ylabel 'discrepancy'\nset terminal svg size 640,420\n";
  for (const auto& [svg, dats] : plots) {
    o << "set output '" << svg << ".gp.svg'\nplot ";
    for (std::size_t i = 0; i < dats.size(); ++i)
      o << (i ? ", " : "") << "'" << dats[i] << "' using 1:2 with points title '" << dats[i] << "', '" << dats[i]
        << "' using 1:3 with lines notitle";
    o << "\n";
  }
  return o.str();
}

} // namespace lppl::cli
