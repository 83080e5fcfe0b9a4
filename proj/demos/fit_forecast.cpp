#include <cstdio>

#include "curvecast/gompertz.hpp"
#include "curvecast/rng.hpp"

// Fits a growth curve to noisy observations of a saturating metric, then
// forecasts the asymptote from just the first half of the points.

using namespace curvecast;

int main() {
  const GompertzParams truth{0.85, -0.9, -0.17};
  Rng rng(20240612);

  LearningCurve curve;
  curve.task = "demo";
  for (int day = 1; day <= 30; ++day) {
    curve.times.push_back(day);
    double v = gompertz(truth, day) + rng.normal(0.0, 0.02);
    curve.values.push_back(std::clamp(v, 0.0, 1.0));
  }

  auto fit = fit_gompertz(curve);
  std::printf("full fit:   a=%.4f b=%.4f c=%.4f  rse=%.4f  converged=%s\n", fit.params.a,
              fit.params.b, fit.params.c, fit.rse, fit.converged ? "yes" : "no");

  auto fc = forecast_from_prefix(curve, 15, 60.0, {0.75, 0.8});
  std::printf("prefix fit: a=%.4f from the first 15 days\n", fc.fit.params.a);
  for (const auto& [target, t] : fc.t_for) {
    if (t) std::printf("  reaches %.2f around day %.1f\n", target, *t);
    else std::printf("  never reaches %.2f\n", target);
  }
  std::printf("true asymptote %.2f; with all 30 days the estimate is %.4f\n", truth.a,
              fit.params.a);
  return 0;
}
