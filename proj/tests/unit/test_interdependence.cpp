#include <cmath>
#include <vector>

#include <doctest.h>

#include "core/errors.hpp"
#include "core/interdependence.hpp"
#include "core/reference.hpp"
#include "core/synthesis.hpp"

using namespace branchstat;

namespace {

std::vector<ParamValue> values_at(ParameterKind p, double kv, const std::vector<double>& vals) {
  std::vector<ParamValue> out;
  for (double v : vals) {
    out.push_back(ParamValue{"b", p, v, VoltageClass::canonical(kv)});
  }
  return out;
}

ClassMeanSeries series_from(const std::vector<double>& kvs, const std::vector<double>& means) {
  ClassMeanSeries s;
  s.parameter = ParameterKind::XfmrCapacityMva;
  for (std::size_t i = 0; i < kvs.size(); ++i) {
    s.points.push_back(ClassMeanPoint{kvs[i], means[i], 50});
  }
  return s;
}

}  // namespace

TEST_CASE("class_means groups, cleans and thresholds") {
  auto p = ParameterKind::XfmrCapacityMva;
  std::vector<ParamValue> values;
  for (auto v : values_at(p, 115, std::vector<double>(50, 7.0))) values.push_back(v);
  for (auto v : values_at(p, 230, std::vector<double>(50, 9.0))) values.push_back(v);
  auto series = class_means(values, p, 10);
  REQUIRE(series.points.size() == 2);
  CHECK(series.points[0].nominal_kv == 115.0);
  CHECK(series.points[0].mean == 7.0);
  CHECK(series.points[0].count == 50);
  CHECK(series.points[1].mean == 9.0);

  // A five-value class below min_count drops out.
  auto small = values_at(p, 345, {1, 2, 3, 4, 5});
  for (auto v : small) values.push_back(v);
  auto filtered = class_means(values, p, 10);
  CHECK(filtered.points.size() == 2);

  // Outliers are removed before the mean: {1,2,3,4,100} -> 2.5.
  auto outlier_series = class_means(values_at(p, 161, {1, 2, 3, 4, 100}), p, 4);
  REQUIRE(outlier_series.points.size() == 1);
  CHECK(outlier_series.points[0].mean == doctest::Approx(2.5));
  CHECK(outlier_series.points[0].count == 4);

  // Other() classes never contribute.
  std::vector<ParamValue> off{{"b", p, 5.0, VoltageClass::other(97.0)}};
  CHECK_THROWS_AS(class_means(off, p, 1), InsufficientData);
}

TEST_CASE("fit_power recovers noiseless curves exactly") {
  auto check_exact = [](double a, double b, const std::vector<double>& kvs) {
    std::vector<double> means;
    for (double kv : kvs) means.push_back(a * std::pow(kv, b));
    PowerFit fit = fit_power(series_from(kvs, means));
    CHECK(std::abs(fit.a - a) <= 1e-6 * a);
    CHECK(std::abs(fit.b - b) <= 1e-6 * std::max(1.0, std::abs(b)));
    double max_mean = *std::max_element(means.begin(), means.end());
    CHECK(fit.rmse <= 1e-6 * max_mean);
  };
  check_exact(2.0, 1.5, {100, 200, 400});
  std::vector<double> all_levels(kCanonicalLevelsKv.begin(), kCanonicalLevelsKv.end());
  check_exact(0.172, 1.332, all_levels);
  check_exact(5.0, 0.95, all_levels);
}

TEST_CASE("fit_power on a flat series gives b = 0") {
  PowerFit fit = fit_power(series_from({69, 115, 230, 500}, {4.2, 4.2, 4.2, 4.2}));
  CHECK(std::abs(fit.b) <= 1e-6);
  CHECK(fit.a == doctest::Approx(4.2).epsilon(1e-6));
  CHECK(fit.r2 == 1.0);  // exact fit, zero spread
}

TEST_CASE("fit_power survives multiplicative noise") {
  SeededRng rng(42);
  std::vector<double> kvs(kCanonicalLevelsKv.begin(), kCanonicalLevelsKv.end());
  std::vector<double> means;
  for (double kv : kvs) {
    double noise = 1.0 + 0.05 * (2.0 * rng.next_uniform() - 1.0);
    means.push_back(0.172 * std::pow(kv, 1.332) * noise);
  }
  PowerFit fit = fit_power(series_from(kvs, means));
  CHECK(fit.a >= 0.172 / 1.5);
  CHECK(fit.a <= 0.172 * 1.5);
  CHECK(std::abs(fit.b - 1.332) <= 0.15);
}

TEST_CASE("fit_power refinement never worsens the log-space initializer") {
  SeededRng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> kvs(kCanonicalLevelsKv.begin(), kCanonicalLevelsKv.end());
    std::vector<double> means;
    double a = 0.05 + rng.next_uniform();
    double b = 0.2 + 1.5 * rng.next_uniform();
    for (double kv : kvs) {
      means.push_back(a * std::pow(kv, b) * (1.0 + 0.2 * (2.0 * rng.next_uniform() - 1.0)));
    }
    ClassMeanSeries series = series_from(kvs, means);

    // Log-space OLS baseline, evaluated in original space.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : series.points) {
      double lx = std::log(p.nominal_kv), ly = std::log(p.mean);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    double n = static_cast<double>(series.points.size());
    double b0 = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double a0 = std::exp((sy - b0 * sx) / n);
    double sse0 = 0.0;
    for (const auto& p : series.points) {
      double r = p.mean - a0 * std::pow(p.nominal_kv, b0);
      sse0 += r * r;
    }
    PowerFit fit = fit_power(series);
    double sse = fit.rmse * fit.rmse * n;
    CHECK(sse <= sse0 * (1.0 + 1e-12) + 1e-30);
  }
}

TEST_CASE("fit_power input validation") {
  CHECK_THROWS_AS(fit_power(series_from({100, 200}, {1, 2})), InsufficientData);
  CHECK_THROWS_AS(fit_power(series_from({100, 200, 300}, {1, -2, 3})), InvalidInput);
}

TEST_CASE("fit_power is scale equivariant") {
  SeededRng rng(6);
  std::vector<double> kvs{69, 138, 230, 345, 500};
  std::vector<double> means;
  for (double kv : kvs) {
    means.push_back(0.8 * std::pow(kv, 1.1) * (1.0 + 0.1 * rng.next_uniform()));
  }
  PowerFit base = fit_power(series_from(kvs, means));
  const double k = 3.75;
  std::vector<double> scaled;
  for (double m : means) scaled.push_back(k * m);
  PowerFit moved = fit_power(series_from(kvs, scaled));
  CHECK(moved.a == doctest::Approx(k * base.a).epsilon(1e-8));
  CHECK(moved.b == doctest::Approx(base.b).epsilon(1e-8));
  CHECK(classify_dependence(moved) == classify_dependence(base));
}

TEST_CASE("classify_dependence thresholds") {
  CHECK(classify_dependence(PowerFit{1.0, 1.332, 0.0, 0.95}) == DependenceClass::VoltageDependent);
  CHECK(classify_dependence(PowerFit{1.0, 0.01, 0.0, 0.99}) ==
        DependenceClass::VoltageIndependent);
  CHECK(classify_dependence(PowerFit{1.0, 0.95, 0.0, 0.9}) == DependenceClass::VoltageDependent);
  CHECK(classify_dependence(PowerFit{1.0, 1.0, 0.0, 0.2}) == DependenceClass::VoltageIndependent);
  // Monotone in |b| for fixed r2: once dependent, larger |b| stays dependent.
  for (double b = 0.16; b < 3.0; b += 0.2) {
    CHECK(classify_dependence(PowerFit{1.0, b, 0.0, 0.9}) == DependenceClass::VoltageDependent);
  }
}

TEST_CASE("bundled reference carries the published constants") {
  ReferenceStats ref = bundled_reference();
  const auto& cap = ref.parameter(ParameterKind::XfmrCapacityMva);
  REQUIRE(cap.power_curve.has_value());
  CHECK(*cap.power_curve->a == 0.172);
  CHECK(cap.power_curve->b == 1.332);
  CHECK(cap.dependence == DependenceClass::VoltageDependent);
  CHECK(cap.family == DistFamily::Gev);
  CHECK(cap.power_curve->evaluate(230.0) == doctest::Approx(240.6).epsilon(0.5 / 240.6));
  CHECK(cap.power_curve->evaluate(69.0) == doctest::Approx(48.4).epsilon(0.5 / 48.4));

  const auto& line_xr = ref.parameter(ParameterKind::LineXOverR);
  REQUIRE(line_xr.power_curve.has_value());
  CHECK(line_xr.power_curve->b == 0.95);
  CHECK_FALSE(line_xr.power_curve->usable());  // scale constant not published
  CHECK(line_xr.family == DistFamily::Normal);

  const auto& own_x = ref.parameter(ParameterKind::XfmrXpuOwnBase);
  REQUIRE(own_x.independent_range.has_value());
  CHECK(own_x.independent_range->first == 0.0);
  CHECK(own_x.independent_range->second == 0.25);
  CHECK(own_x.dependence == DependenceClass::VoltageIndependent);
  CHECK(own_x.family == DistFamily::Normal);

  CHECK(ref.parameter(ParameterKind::LineXOhmPerKm).dependence ==
        DependenceClass::VoltageIndependent);
  CHECK(ref.parameter(ParameterKind::LineXOhmPerKm).family == DistFamily::Exponential);
  CHECK(ref.parameter(ParameterKind::XfmrXOverR).family == DistFamily::Gev);
  CHECK(ref.parameter(ParameterKind::LineLengthKm).family == DistFamily::Gev);
  CHECK(ref.parameter(ParameterKind::LineCapacityMva).family == DistFamily::Normal);
}
