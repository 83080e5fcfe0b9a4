#ifndef CURVECAST_SVG_HPP
#define CURVECAST_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "curvecast/gompertz.hpp"

namespace curvecast {

// Self-contained SVG line plots of a learning curve with an optional fitted
// overlay and forecast extrapolation. Output is deterministic: fixed geometry,
// fixed formatting, nothing environment-dependent.

namespace svg_detail {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 62, kRight = 624, kTop = 40, kBottom = 354;

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

// Maps data space to pixel space, optionally through log10 on each axis.
struct Frame {
  double x0, x1, y0, y1;
  bool logx = false, logy = false;

  double tx(double x) const {
    if (logx) x = std::log10(x);
    return kLeft + (x - x0) / (x1 - x0) * (kRight - kLeft);
  }
  double ty(double y) const {
    if (logy) y = std::log10(y);
    return kBottom - (y - y0) / (y1 - y0) * (kBottom - kTop);
  }
  bool holds(double x, double y) const {
    if (logx) {
      if (!(x > 0)) return false;
      x = std::log10(x);
    }
    if (logy) {
      if (!(y > 0)) return false;
      y = std::log10(y);
    }
    return x >= x0 - 1e-9 && x <= x1 + 1e-9 && y >= y0 - 1e-9 && y <= y1 + 1e-9;
  }
};

inline std::string polyline(const Frame& f, const std::vector<std::pair<double, double>>& pts,
                            const std::string& style) {
  std::string d;
  bool pen_down = false;
  for (const auto& [x, y] : pts) {
    if (!f.holds(x, y)) {
      pen_down = false;
      continue;
    }
    d += pen_down ? " L " : " M ";
    d += num(f.tx(x)) + " " + num(f.ty(y));
    pen_down = true;
  }
  if (d.empty()) return "";
  return "  <path d=\"" + d.substr(1) + "\" fill=\"none\" " + style + "/>\n";
}

inline std::vector<double> ticks_linear(double lo, double hi) {
  const double span = hi - lo;
  double step = std::pow(10.0, std::floor(std::log10(span)));
  if (span / step < 2) step /= 5;
  else if (span / step < 5) step /= 2;
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) out.push_back(v);
  return out;
}

inline std::vector<double> ticks_log(double lo_exp, double hi_exp) {
  std::vector<double> out;
  for (int e = static_cast<int>(std::ceil(lo_exp - 1e-9)); e <= std::floor(hi_exp + 1e-9); ++e)
    for (double m : {1.0, 2.0, 5.0}) {
      double v = m * std::pow(10.0, e);
      double lv = std::log10(v);
      if (lv >= lo_exp - 1e-9 && lv <= hi_exp + 1e-9) out.push_back(v);
    }
  return out;
}

}  // namespace svg_detail

// One panel: observed points, fitted curve over the fitted range, dashed
// extrapolation to the forecast horizon, dashed asymptote. The log-log variant
// mirrors the same content on log10 axes.
inline std::string render_curve_svg(const LearningCurve& curve, const FitResult* fit,
                                    const Forecast* forecast, bool loglog) {
  using namespace svg_detail;
  validate_curve(curve);

  double t_max = curve.times.back();
  if (forecast && !forecast->extrapolated.times.empty())
    t_max = std::max(t_max, forecast->extrapolated.times.back());
  double y_min_pos = 1.0;
  for (double v : curve.values)
    if (v > 0) y_min_pos = std::min(y_min_pos, v);

  Frame f;
  if (loglog) {
    f.logx = f.logy = true;
    f.x0 = 0.0;  // t >= 1
    f.x1 = std::max(std::log10(t_max), 0.3);
    f.y0 = std::max(-3.0, std::floor(std::log10(y_min_pos) * 2.0) / 2.0);
    f.y1 = 0.0;  // values <= 1
  } else {
    f.x0 = 0.0;
    f.x1 = t_max * 1.02;
    f.y0 = 0.0;
    f.y1 = 1.0;
  }

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "  <rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

  const std::string axis_style = "stroke=\"#333333\" stroke-width=\"1\"";
  const std::string grid_style = "stroke=\"#dddddd\" stroke-width=\"1\"";

  const auto xticks = loglog ? ticks_log(f.x0, f.x1) : ticks_linear(f.x0, f.x1);
  const auto yticks = loglog ? ticks_log(f.y0, f.y1) : ticks_linear(f.y0, f.y1);
  for (double v : xticks) {
    double px = f.tx(loglog ? v : v);
    os << "  <line x1=\"" << num(px) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px)
       << "\" y2=\"" << num(kBottom) << "\" " << grid_style << "/>\n";
    os << "  <text x=\"" << num(px) << "\" y=\"" << num(kBottom + 18)
       << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\">" << label(v) << "</text>\n";
  }
  for (double v : yticks) {
    double py = f.ty(loglog ? v : v);
    os << "  <line x1=\"" << num(kLeft) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kRight)
       << "\" y2=\"" << num(py) << "\" " << grid_style << "/>\n";
    os << "  <text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py + 4)
       << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#333333\">" << label(v) << "</text>\n";
  }
  os << "  <line x1=\"" << num(kLeft) << "\" y1=\"" << num(kBottom) << "\" x2=\"" << num(kRight)
     << "\" y2=\"" << num(kBottom) << "\" " << axis_style << "/>\n";
  os << "  <line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
     << "\" y2=\"" << num(kBottom) << "\" " << axis_style << "/>\n";

  // solid overlay for the full-data fit, dashed for the prefix forecast
  const double lo = loglog ? 1.0 : std::max(curve.times.front() * 0.5, f.x0 + 1e-6);
  auto sampled = [&](const GompertzParams& p, double from, double to) {
    std::vector<std::pair<double, double>> line;
    for (int i = 0; i <= 240; ++i) {
      double t = from + (to - from) * i / 240.0;
      line.push_back({t, gompertz(p, t)});
    }
    return line;
  };
  if (fit) {
    os << polyline(f, sampled(fit->params, lo, curve.times.back()),
                   "stroke=\"#d95f02\" stroke-width=\"2\"");
  } else if (forecast) {
    os << polyline(f, sampled(forecast->fit.params, lo, forecast->fitted_on),
                   "stroke=\"#d95f02\" stroke-width=\"2\"");
  }
  if (forecast && t_max > forecast->fitted_on) {
    os << polyline(f, sampled(forecast->fit.params, forecast->fitted_on, t_max),
                   "stroke=\"#7b3294\" stroke-width=\"2\" stroke-dasharray=\"6 4\"");
  }
  const GompertzParams* params = forecast ? &forecast->fit.params : (fit ? &fit->params : nullptr);
  if (params) {
    const double a = params->a;
    if (f.holds(loglog ? 1.0 : f.x0 + 1e-6, a)) {
      double py = f.ty(a);
      os << "  <line x1=\"" << num(kLeft) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kRight)
         << "\" y2=\"" << num(py)
         << "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"2 4\"/>\n";
      os << "  <text x=\"" << num(kRight - 4) << "\" y=\"" << num(py - 5)
         << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#888888\">a = " << label(a)
         << "</text>\n";
    }
  }

  for (std::size_t i = 0; i < curve.times.size(); ++i)
    if (f.holds(curve.times[i], curve.values[i]))
      os << "  <circle cx=\"" << num(f.tx(curve.times[i])) << "\" cy=\""
         << num(f.ty(curve.values[i])) << "\" r=\"3\" fill=\"#1f6fb4\"/>\n";

  os << "  <text x=\"" << num((kLeft + kRight) / 2) << "\" y=\"22\" font-size=\"15\""
     << " text-anchor=\"middle\" fill=\"#111111\">" << escape(curve.task) << " ("
     << metric_name(curve.metric) << (loglog ? ", log-log" : "") << ")</text>\n";
  os << "  <text x=\"" << num((kLeft + kRight) / 2) << "\" y=\"" << num(kHeight - 8)
     << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#333333\">" << unit_name(curve.unit)
     << "</text>\n";
  os << "  <text transform=\"translate(16 " << num((kTop + kBottom) / 2)
     << ") rotate(-90)\" font-size=\"13\" text-anchor=\"middle\" fill=\"#333333\">"
     << metric_name(curve.metric) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace curvecast

#endif  // CURVECAST_SVG_HPP
