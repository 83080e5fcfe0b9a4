#ifndef CURVECAST_GOMPERTZ_HPP
#define CURVECAST_GOMPERTZ_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvecast {

enum class Metric { auc, accuracy };
enum class TimeUnit { days, weeks };

inline std::string_view metric_name(Metric m) { return m == Metric::auc ? "auc" : "accuracy"; }
inline std::string_view unit_name(TimeUnit u) { return u == TimeUnit::days ? "days" : "weeks"; }

struct LearningCurve {
  std::string task;
  std::vector<double> times;   // strictly increasing
  std::vector<double> values;  // within [0,1]
  Metric metric = Metric::auc;
  TimeUnit unit = TimeUnit::days;
};

inline void validate_curve(const LearningCurve& c) {
  if (c.times.size() != c.values.size() || c.times.empty())
    throw std::invalid_argument("curve '" + c.task + "': times/values must align and be non-empty");
  for (std::size_t i = 1; i < c.times.size(); ++i)
    if (!(c.times[i - 1] < c.times[i]))
      throw std::invalid_argument("curve '" + c.task + "': times must increase strictly");
  for (double v : c.values)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("curve '" + c.task + "': values must lie in [0,1]");
}

// Growth curve f(t) = a exp(b exp(c t)) with a > 0 and b, c < 0, so f rises
// from a e^b at t = 0 toward the asymptote a.
struct GompertzParams {
  double a = 1.0;
  double b = -1.0;
  double c = -1.0;
};

inline bool valid_params(const GompertzParams& p) {
  return std::isfinite(p.a) && std::isfinite(p.b) && std::isfinite(p.c) && p.a > 0.0 &&
         p.b < 0.0 && p.c < 0.0;
}

inline double gompertz(const GompertzParams& p, double t) {
  const double u = p.b * std::exp(p.c * t);  // inner exponent, always <= 0 for t >= 0
  if (u < -700.0) return 0.0;                // exp would underflow anyway
  return p.a * std::exp(u);
}

// Partials with respect to (a, b, c), sharing the inner terms.
inline std::array<double, 3> gompertz_jacobian(const GompertzParams& p, double t) {
  const double e_ct = std::exp(p.c * t);
  const double u = p.b * e_ct;
  const double g = u < -700.0 ? 0.0 : std::exp(u);
  return {g, p.a * e_ct * g, p.a * p.b * t * e_ct * g};
}

struct FitResult {
  GompertzParams params;
  double rse = 0.0;                  // sqrt(SS / (n - 3))
  bool converged = false;
  double tolerance_achieved = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int n_points = 0;
};

struct FitOptions {
  double tolerance = 1e-8;  // relative SS reduction
  int max_iter = 200;
  std::optional<GompertzParams> init;
};

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateCurveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline bool solve3(double A[3][3], const double b[3], double out[3]) {
  double m[3][4];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i][j] = A[i][j];
    m[i][3] = b[i];
  }
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    if (std::abs(m[pivot][col]) < 1e-300) return false;
    if (pivot != col)
      for (int j = col; j < 4; ++j) std::swap(m[col][j], m[pivot][j]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double factor = m[r][col] / m[col][col];
      for (int j = col; j < 4; ++j) m[r][j] -= factor * m[col][j];
    }
  }
  for (int i = 0; i < 3; ++i) out[i] = m[i][3] / m[i][i];
  return true;
}

// Unconstrained coordinates: theta = (ln a, ln(-b), ln(-c)).
inline GompertzParams from_theta(const std::array<double, 3>& th) {
  return {std::exp(th[0]), -std::exp(th[1]), -std::exp(th[2])};
}

inline std::array<double, 3> to_theta(const GompertzParams& p) {
  return {std::log(p.a), std::log(-p.b), std::log(-p.c)};
}

inline double sum_squares(const GompertzParams& p, const std::vector<double>& t,
                          const std::vector<double>& y) {
  double ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - gompertz(p, t[i]);
    ss += r * r;
  }
  return ss;
}

// Exact linearization at a trial asymptote: ln(ln(a0/y)) = ln(-b) + c t, so an
// ordinary least-squares line through (t, z) seeds b and c.
inline GompertzParams linearized_init(const std::vector<double>& t, std::vector<double> y) {
  for (double& v : y) v = std::clamp(v, 1e-9, 1.0 - 1e-9);
  const double a0 = std::min(1.02 * *std::max_element(y.begin(), y.end()), 1.0);
  const std::size_t n = t.size();
  double st = 0, sz = 0, stt = 0, stz = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = std::log(std::log(a0 / y[i]));
    st += t[i];
    sz += z;
    stt += t[i] * t[i];
    stz += t[i] * z;
  }
  const double denom = n * stt - st * st;
  double slope = denom != 0.0 ? (n * stz - st * sz) / denom : 0.0;
  double intercept;
  if (slope >= 0.0) {
    slope = -0.1;  // decay made explicit when the line points the wrong way
    intercept = (sz - slope * st) / n;
  } else {
    intercept = (sz - slope * st) / n;
  }
  return {a0, -std::exp(intercept), slope};
}

}  // namespace detail

// Levenberg-Marquardt on the log-reparameterized model, which keeps the sign
// constraints satisfied for free. Damping: lambda starts at 1e-3, halves on an
// accepted step, quadruples on a rejected one.
inline FitResult fit_gompertz(const LearningCurve& curve, const FitOptions& opts = {}) {
  validate_curve(curve);
  const std::vector<double>& t = curve.times;
  const std::vector<double>& y = curve.values;
  const int n = static_cast<int>(t.size());
  if (n < 4) throw InsufficientDataError("fit needs at least 4 points, got " + std::to_string(n));
  if (*std::max_element(y.begin(), y.end()) == *std::min_element(y.begin(), y.end()))
    throw DegenerateCurveError("curve '" + curve.task + "' has constant values");

  GompertzParams start;
  if (opts.init) {
    if (!valid_params(*opts.init)) throw std::invalid_argument("init violates sign constraints");
    start = *opts.init;
  } else {
    start = detail::linearized_init(t, y);
  }

  std::array<double, 3> theta = detail::to_theta(start);
  double ss = detail::sum_squares(detail::from_theta(theta), t, y);
  double lambda = 1e-3;

  FitResult result;
  result.n_points = n;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    result.iterations = iter;
    const GompertzParams p = detail::from_theta(theta);
    double jtj[3][3] = {};
    double jtr[3] = {};
    for (int i = 0; i < n; ++i) {
      const std::array<double, 3> jp = gompertz_jacobian(p, t[i]);
      // chain rule through the reparameterization: d/d(ln a) = a d/da, etc.
      const double j[3] = {jp[0] * p.a, jp[1] * p.b, jp[2] * p.c};
      const double r = y[i] - gompertz(p, t[i]);
      for (int u = 0; u < 3; ++u) {
        jtr[u] += j[u] * r;
        for (int v = 0; v < 3; ++v) jtj[u][v] += j[u] * j[v];
      }
    }
    double damped[3][3];
    for (int u = 0; u < 3; ++u)
      for (int v = 0; v < 3; ++v)
        damped[u][v] = jtj[u][v] + (u == v ? lambda * std::max(jtj[u][u], 1e-12) : 0.0);
    double delta[3];
    if (!detail::solve3(damped, jtr, delta)) {
      lambda *= 4.0;
      if (lambda > 1e12) break;
      continue;
    }
    const std::array<double, 3> trial = {theta[0] + delta[0], theta[1] + delta[1],
                                         theta[2] + delta[2]};
    const double trial_ss = detail::sum_squares(detail::from_theta(trial), t, y);
    if (trial_ss < ss) {
      const double rel = (ss - trial_ss) / std::max(ss, 1e-300);
      theta = trial;
      ss = trial_ss;
      lambda *= 0.5;
      result.tolerance_achieved = rel;
      if (ss < 1e-28) {  // interpolating fit, nothing left to reduce
        result.tolerance_achieved = 0.0;
        result.converged = true;
        break;
      }
      const double step = std::max({std::abs(delta[0]), std::abs(delta[1]), std::abs(delta[2])});
      if (rel < opts.tolerance || step < 1e-10) {
        result.converged = rel <= opts.tolerance;
        break;
      }
    } else {
      lambda *= 4.0;
      if (lambda > 1e12) break;  // stuck against the damping ceiling
    }
  }

  result.params = detail::from_theta(theta);
  result.rse = std::sqrt(ss / (n - 3));
  return result;
}

// Closed-form inverse t = ln(ln(y/a)/b)/c, defined only between the fitted
// value at t_first and the asymptote.
inline std::optional<double> time_to_accuracy(const GompertzParams& p, double target,
                                              double t_first) {
  if (!(target > gompertz(p, t_first) && target < p.a)) return std::nullopt;
  return std::log(std::log(target / p.a) / p.b) / p.c;
}

struct Forecast {
  std::string task;
  FitResult fit;          // parameters fitted on the prefix
  double asymptote = 0.0; // = fit.params.a
  std::map<double, std::optional<double>> t_for;  // target -> time, empty optional: unattainable
  LearningCurve extrapolated;
  int fitted_on = 0;
};

inline Forecast forecast_from_prefix(const LearningCurve& curve, int k, double horizon,
                                     const std::vector<double>& targets,
                                     const FitOptions& opts = {}) {
  validate_curve(curve);
  if (k < 4 || k > static_cast<int>(curve.times.size()))
    throw std::invalid_argument("prefix length must be in [4, n]");
  LearningCurve prefix = curve;
  prefix.times.assign(curve.times.begin(), curve.times.begin() + k);
  prefix.values.assign(curve.values.begin(), curve.values.begin() + k);

  Forecast f;
  f.task = curve.task;
  f.fitted_on = k;
  f.fit = fit_gompertz(prefix, opts);
  f.asymptote = f.fit.params.a;
  for (double target : targets)
    f.t_for[target] = time_to_accuracy(f.fit.params, target, curve.times.front());

  const double step = curve.times.size() > 1 ? curve.times[1] - curve.times[0] : 1.0;
  f.extrapolated.task = curve.task;
  f.extrapolated.metric = curve.metric;
  f.extrapolated.unit = curve.unit;
  for (double t = curve.times.front(); t <= horizon + step * 1e-9; t += step) {
    f.extrapolated.times.push_back(t);
    f.extrapolated.values.push_back(gompertz(f.fit.params, t));
  }
  return f;
}

struct UndefinedCorrelationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sample Pearson correlation.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson requires two aligned series of length >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UndefinedCorrelationError("constant series has no correlation");
  return sxy / std::sqrt(sxx * syy);
}

struct CorrelationMatrix {
  std::vector<std::string> tasks;
  std::vector<std::vector<std::optional<double>>> r;  // empty optional: undefined entry
};

// Pairwise correlation over the intersection of time grids. Weekly curves are
// aligned with daily ones by converting week indices to days.
inline CorrelationMatrix correlation_matrix(const std::vector<LearningCurve>& curves) {
  if (curves.size() < 2) throw std::invalid_argument("need at least two curves");
  const std::size_t n = curves.size();
  std::vector<std::map<double, double>> by_day(n);
  for (std::size_t i = 0; i < n; ++i) {
    validate_curve(curves[i]);
    const double scale = curves[i].unit == TimeUnit::weeks ? 7.0 : 1.0;
    for (std::size_t k = 0; k < curves[i].times.size(); ++k)
      by_day[i][curves[i].times[k] * scale] = curves[i].values[k];
  }
  CorrelationMatrix m;
  for (const auto& c : curves) m.tasks.push_back(c.task);
  m.r.assign(n, std::vector<std::optional<double>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    m.r[i][i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      std::vector<double> xi, xj;
      for (const auto& [day, v] : by_day[i]) {
        auto it = by_day[j].find(day);
        if (it != by_day[j].end()) {
          xi.push_back(v);
          xj.push_back(it->second);
        }
      }
      if (xi.size() >= 2) {
        try {
          m.r[i][j] = m.r[j][i] = pearson(xi, xj);
        } catch (const UndefinedCorrelationError&) {
          // leave the pair undefined
        }
      }
    }
  }
  return m;
}

}  // namespace curvecast

#endif  // CURVECAST_GOMPERTZ_HPP
