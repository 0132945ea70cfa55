#pragma once

// Per-voltage-class means and their power-curve model mean(V) = a * V^b,
// fitted by minimum RMSE, plus the voltage-dependence classification.

#include <cstddef>
#include <vector>

#include "core/per_unit.hpp"
#include "core/stats.hpp"

namespace branchstat {

struct ClassMeanPoint {
  double nominal_kv = 0.0;
  double mean = 0.0;
  std::size_t count = 0;  // cleaned sample size behind the mean
};

struct ClassMeanSeries {
  ParameterKind parameter = ParameterKind::XfmrXpuOwnBase;
  std::vector<ClassMeanPoint> points;  // nominal_kv strictly increasing
};

// Groups values by canonical voltage class, removes extreme outliers per
// group, and keeps classes with at least min_count cleaned values. Other()
// classes are excluded. Throws InsufficientData when no class qualifies.
ClassMeanSeries class_means(const std::vector<ParamValue>& values, ParameterKind parameter,
                            std::size_t min_count = 10, double fence_multiplier = 3.0);

struct PowerFit {
  double a = 0.0;     // > 0
  double b = 0.0;     // exponent
  double rmse = 0.0;  // in the parameter's unit, original space
  double r2 = 0.0;    // coefficient of determination, original space
};

// Least-squares fit of mean = a * kv^b: ordinary least squares on the logs
// seeds a damped Gauss-Newton refinement of the original-space SSE (relative
// parameter change < 1e-10 or 200 iterations). Requires >= 3 points with
// positive means and voltages.
PowerFit fit_power(const ClassMeanSeries& series);

enum class DependenceClass { VoltageDependent, VoltageIndependent };

inline constexpr double kDefaultBThreshold = 0.15;
inline constexpr double kDefaultR2Threshold = 0.5;

// VoltageIndependent iff |b| < b_threshold or r2 < r2_threshold.
DependenceClass classify_dependence(const PowerFit& fit, double b_threshold = kDefaultBThreshold,
                                    double r2_threshold = kDefaultR2Threshold);

}  // namespace branchstat
