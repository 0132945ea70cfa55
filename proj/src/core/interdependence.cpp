#include "core/interdependence.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "core/errors.hpp"

namespace branchstat {

ClassMeanSeries class_means(const std::vector<ParamValue>& values, ParameterKind parameter,
                            std::size_t min_count, double fence_multiplier) {
  if (min_count < 1) throw InvalidInput("min_count must be at least 1");

  std::map<double, std::vector<double>> groups;
  for (const auto& v : values) {
    if (v.parameter != parameter) continue;
    if (!v.voltage_class.is_canonical()) continue;
    groups[v.voltage_class.nominal_kv()].push_back(v.value);
  }

  ClassMeanSeries series;
  series.parameter = parameter;
  for (auto& [kv, group] : groups) {
    std::vector<double> kept;
    if (group.size() >= 4) {
      kept = remove_extreme_outliers(std::move(group), fence_multiplier).values;
    } else {
      kept = std::move(group);  // too small for quartile fences
    }
    if (kept.size() < min_count) continue;
    double sum = 0.0;
    for (double x : kept) sum += x;
    series.points.push_back(
        ClassMeanPoint{kv, sum / static_cast<double>(kept.size()), kept.size()});
  }
  if (series.points.empty()) {
    throw InsufficientData("no voltage class reached min_count=" + std::to_string(min_count));
  }
  return series;
}

PowerFit fit_power(const ClassMeanSeries& series) {
  const auto& pts = series.points;
  if (pts.size() < 3) throw InsufficientData("power fit needs at least 3 class means");
  for (const auto& p : pts) {
    if (p.mean <= 0.0) throw InvalidInput("power model undefined for non-positive means");
    if (p.nominal_kv <= 0.0) throw InvalidInput("power model undefined for non-positive kV");
  }
  const std::size_t n = pts.size();

  // Log-space OLS initializer: ln(mean) = ln(a) + b*ln(kv).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    double lx = std::log(p.nominal_kv);
    double ly = std::log(p.mean);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double denom = static_cast<double>(n) * sxx - sx * sx;
  if (std::abs(denom) < 1e-14 * (sxx + 1.0)) {
    throw FitFailed("power fit: degenerate voltage levels");
  }
  double b = (static_cast<double>(n) * sxy - sx * sy) / denom;
  double a = std::exp((sy - b * sx) / static_cast<double>(n));

  auto sse_of = [&pts](double aa, double bb) {
    double sse = 0.0;
    for (const auto& p : pts) {
      double r = p.mean - aa * std::pow(p.nominal_kv, bb);
      sse += r * r;
    }
    return sse;
  };

  // Damped Gauss-Newton on the original-space residuals; a step is accepted
  // only if it does not increase the SSE.
  double sse = sse_of(a, b);
  for (int iter = 0; iter < 200; ++iter) {
    double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
    for (const auto& p : pts) {
      double base = std::pow(p.nominal_kv, b);
      double j0 = base;                            // d model / d a
      double j1 = a * base * std::log(p.nominal_kv);  // d model / d b
      double r = p.mean - a * base;
      jtj00 += j0 * j0;
      jtj01 += j0 * j1;
      jtj11 += j1 * j1;
      jtr0 += j0 * r;
      jtr1 += j1 * r;
    }
    double det = jtj00 * jtj11 - jtj01 * jtj01;
    if (!(std::abs(det) > 1e-300)) throw FitFailed("power fit: singular normal equations");
    double da = (jtj11 * jtr0 - jtj01 * jtr1) / det;
    double db = (jtj00 * jtr1 - jtj01 * jtr0) / det;

    double damping = 1.0;
    double a_next = a, b_next = b, sse_next = sse;
    bool accepted = false;
    for (int halvings = 0; halvings < 40; ++halvings) {
      double a_try = a + damping * da;
      double b_try = b + damping * db;
      if (a_try > 0.0) {
        double sse_try = sse_of(a_try, b_try);
        if (sse_try <= sse) {
          a_next = a_try;
          b_next = b_try;
          sse_next = sse_try;
          accepted = true;
          break;
        }
      }
      damping *= 0.5;
    }
    if (!accepted) break;
    double rel = std::max(std::abs(a_next - a) / (std::abs(a) + 1e-300),
                          std::abs(b_next - b) / (std::abs(b) + 1e-30));
    a = a_next;
    b = b_next;
    sse = sse_next;
    if (rel < 1e-10) break;
  }

  double mean_of_means = 0.0;
  for (const auto& p : pts) mean_of_means += p.mean / static_cast<double>(n);
  double sst = 0.0;
  for (const auto& p : pts) sst += (p.mean - mean_of_means) * (p.mean - mean_of_means);

  PowerFit fit;
  fit.a = a;
  fit.b = b;
  fit.rmse = std::sqrt(sse / static_cast<double>(n));
  fit.r2 = sst > 0.0 ? 1.0 - sse / sst : 1.0;
  return fit;
}

DependenceClass classify_dependence(const PowerFit& fit, double b_threshold,
                                    double r2_threshold) {
  if (!(b_threshold > 0.0)) throw InvalidInput("b_threshold must be positive");
  if (!(r2_threshold > 0.0 && r2_threshold <= 1.0)) {
    throw InvalidInput("r2_threshold must lie in (0, 1]");
  }
  if (std::abs(fit.b) < b_threshold || fit.r2 < r2_threshold) {
    return DependenceClass::VoltageIndependent;
  }
  return DependenceClass::VoltageDependent;
}

}  // namespace branchstat
