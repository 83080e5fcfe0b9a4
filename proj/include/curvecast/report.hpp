#ifndef CURVECAST_REPORT_HPP
#define CURVECAST_REPORT_HPP

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvecast/harness.hpp"
#include "curvecast/svg.hpp"

namespace curvecast {

struct TaskReport {
  LearningCurve curve;
  std::optional<FitResult> fit;  // on the full curve
  std::string fit_error;
  std::optional<Forecast> forecast;  // fit on the first prefix_k points
  std::string forecast_error;
};

struct ReportBundle {
  std::vector<TaskReport> tasks;
  std::optional<CorrelationMatrix> correlation;
  int prefix_k = 0;
  double horizon_days = 0;
  bool partial = false;  // at least one curve could not be fitted
};

inline ReportBundle build_report(const std::vector<LearningCurve>& curves, const RunConfig& cfg) {
  ReportBundle bundle;
  bundle.prefix_k = cfg.prefix_k;
  bundle.horizon_days = cfg.horizon_days;
  for (const auto& curve : curves) {
    TaskReport tr;
    tr.curve = curve;
    try {
      tr.fit = fit_gompertz(curve);
    } catch (const std::exception& e) {
      tr.fit_error = e.what();
      bundle.partial = true;
    }
    const auto n = curve.times.size();
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg.prefix_k, 1)),
                                         n);
    if (k >= 4) {
      const double horizon =
          curve.unit == TimeUnit::weeks ? cfg.horizon_days / 7.0 : cfg.horizon_days;
      try {
        tr.forecast = forecast_from_prefix(curve, k, horizon, cfg.targets);
      } catch (const std::exception& e) {
        tr.forecast_error = e.what();
        bundle.partial = true;
      }
    } else {
      tr.forecast_error = "needs at least 4 points, curve has " + std::to_string(n);
      bundle.partial = true;
    }
    bundle.tasks.push_back(std::move(tr));
  }

  std::vector<LearningCurve> usable;
  for (const auto& tr : bundle.tasks)
    if (!tr.curve.times.empty()) usable.push_back(tr.curve);
  if (usable.size() >= 2) bundle.correlation = correlation_matrix(usable);
  return bundle;
}

inline ReportBundle run_pipeline(const EventLog& log, const RunConfig& cfg) {
  return build_report(run_incremental(log, cfg), cfg);
}

namespace detail {

inline std::string json_num(double v) { return nlohmann::json(v).dump(); }

inline nlohmann::json fit_to_json(const FitResult& fit) {
  nlohmann::json j;
  j["a"] = fit.params.a;
  j["b"] = fit.params.b;
  j["c"] = fit.params.c;
  j["rse"] = fit.rse;
  j["converged"] = fit.converged;
  if (std::isfinite(fit.tolerance_achieved)) j["tolerance"] = fit.tolerance_achieved;
  j["iterations"] = fit.iterations;
  j["n_points"] = fit.n_points;
  return j;
}

}  // namespace detail

// Reads a curves CSV back into per-task curves, preserving first-appearance
// task order.
inline std::vector<LearningCurve> parse_curves_csv(const std::string& text) {
  std::vector<LearningCurve> curves;
  std::map<std::string, std::size_t> index;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "task,t,unit,metric,value")
        throw ParseError("curves", 1, "expected header task,t,unit,metric,value");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t pos = line.find(','); ; pos = line.find(',', start)) {
      cells.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (cells.size() != 5) throw ParseError("curves", line_no, "expected 5 columns");
    auto it = index.find(cells[0]);
    if (it == index.end()) {
      it = index.emplace(cells[0], curves.size()).first;
      LearningCurve c;
      c.task = cells[0];
      if (cells[2] == "days") c.unit = TimeUnit::days;
      else if (cells[2] == "weeks") c.unit = TimeUnit::weeks;
      else throw ParseError("curves", line_no, "unknown unit " + cells[2]);
      if (cells[3] == "auc") c.metric = Metric::auc;
      else if (cells[3] == "accuracy") c.metric = Metric::accuracy;
      else throw ParseError("curves", line_no, "unknown metric " + cells[3]);
      curves.push_back(std::move(c));
    }
    try {
      curves[it->second].times.push_back(std::stod(cells[1]));
      curves[it->second].values.push_back(std::stod(cells[4]));
    } catch (const std::exception&) {
      throw ParseError("curves", line_no, "bad number");
    }
  }
  for (const auto& c : curves) validate_curve(c);
  return curves;
}

inline std::string render_curves_csv(const ReportBundle& bundle) {
  std::string out = "task,t,unit,metric,value\n";
  for (const auto& tr : bundle.tasks)
    for (std::size_t i = 0; i < tr.curve.times.size(); ++i)
      out += tr.curve.task + "," + detail::json_num(tr.curve.times[i]) + "," +
             std::string(unit_name(tr.curve.unit)) + "," +
             std::string(metric_name(tr.curve.metric)) + "," +
             detail::json_num(tr.curve.values[i]) + "\n";
  return out;
}

inline std::string render_fits_json(const ReportBundle& bundle) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& tr : bundle.tasks) {
    nlohmann::json j;
    j["task"] = tr.curve.task;
    j["points"] = tr.curve.times.size();
    if (tr.fit) {
      j["status"] = "ok";
      j["fit"] = detail::fit_to_json(*tr.fit);
    } else {
      j["status"] = "unfittable";
      j["error"] = tr.fit_error;
    }
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

inline std::string render_forecasts_json(const ReportBundle& bundle) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& tr : bundle.tasks) {
    nlohmann::json j;
    j["task"] = tr.curve.task;
    if (tr.forecast) {
      const auto& fc = *tr.forecast;
      j["status"] = "ok";
      j["fitted_on"] = fc.fitted_on;
      j["fit"] = detail::fit_to_json(fc.fit);
      j["asymptote"] = fc.asymptote;
      if (tr.fit) j["full_fit_asymptote"] = tr.fit->params.a;
      nlohmann::json targets = nlohmann::json::object();
      for (const auto& [target, t] : fc.t_for) {
        if (t) targets[detail::json_num(target)] = *t;
        else targets[detail::json_num(target)] = nullptr;
      }
      j["time_to_target"] = targets;
      nlohmann::json ext;
      ext["t"] = fc.extrapolated.times;
      ext["value"] = fc.extrapolated.values;
      j["extrapolation"] = ext;
    } else {
      j["status"] = "unavailable";
      j["error"] = tr.forecast_error;
    }
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

inline std::string render_correlation_csv(const ReportBundle& bundle) {
  if (!bundle.correlation) return "task\n";
  const auto& m = *bundle.correlation;
  std::string out = "task";
  for (const auto& t : m.tasks) out += "," + t;
  out += "\n";
  for (std::size_t i = 0; i < m.tasks.size(); ++i) {
    out += m.tasks[i];
    for (std::size_t j = 0; j < m.tasks.size(); ++j)
      out += "," + (m.r[i][j] ? detail::json_num(*m.r[i][j]) : std::string());
    out += "\n";
  }
  return out;
}

// Writes the whole bundle under dir: curves.csv, fits.json, forecasts.json,
// correlation.csv, and per-task SVG plots (linear and log-log) under plots/.
inline void write_report(const ReportBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "plots");
  auto put = [](const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
  };
  put(dir / "curves.csv", render_curves_csv(bundle));
  put(dir / "fits.json", render_fits_json(bundle));
  put(dir / "forecasts.json", render_forecasts_json(bundle));
  put(dir / "correlation.csv", render_correlation_csv(bundle));
  for (const auto& tr : bundle.tasks) {
    if (tr.curve.times.empty()) continue;
    const FitResult* fit = tr.fit ? &*tr.fit : nullptr;
    const Forecast* fc = tr.forecast ? &*tr.forecast : nullptr;
    put(dir / "plots" / (tr.curve.task + ".svg"), render_curve_svg(tr.curve, fit, fc, false));
    put(dir / "plots" / (tr.curve.task + "_loglog.svg"),
        render_curve_svg(tr.curve, fit, fc, true));
  }
}

}  // namespace curvecast

#endif  // CURVECAST_REPORT_HPP
