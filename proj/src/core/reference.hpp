#pragma once

// The validation envelope: per-parameter dependence class, power curve,
// distribution family and per-class fits. Either loaded from a stats bundle
// produced by an analyze run, or the bundled constants published for the
// reference networks.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/grid_model.hpp"
#include "core/interdependence.hpp"
#include "core/stats.hpp"

namespace branchstat {

// mean(V) = a * V^b; `a` is absent when only the exponent is published.
struct ReferencePowerCurve {
  std::optional<double> a;
  double b = 0.0;
  std::optional<double> rmse;
  std::optional<double> r2;

  bool usable() const { return a.has_value(); }
  double evaluate(double kv) const;
};

struct ReferenceClassEntry {
  double class_kv = 0.0;
  std::size_t sample_count = 0;
  std::optional<double> mean;
  std::optional<DistFit> fit;  // best-ranked fit for the class
};

struct ReferenceParameter {
  ParameterKind parameter = ParameterKind::XfmrXpuOwnBase;
  DependenceClass dependence = DependenceClass::VoltageIndependent;
  DistFamily family = DistFamily::Normal;
  std::optional<ReferencePowerCurve> power_curve;
  std::vector<ReferenceClassEntry> classes;  // ascending class_kv
  // Admissible band for voltage-independent parameters, lo exclusive / hi
  // inclusive; mean of all pooled cleaned values otherwise used with the
  // ratio band.
  std::optional<std::pair<double, double>> independent_range;
  std::optional<double> global_mean;
  bool placeholder = false;  // numbers not published/derivable: never a Pass source
  std::string provenance;

  const ReferenceClassEntry* find_class(double class_kv) const;
};

struct ReferenceStats {
  std::string provenance;
  std::vector<ReferenceParameter> parameters;  // one per ParameterKind, declaration order

  const ReferenceParameter& parameter(ParameterKind p) const;
  ReferenceParameter& parameter(ParameterKind p);
};

// The constants published for the studied real-world networks: the
// transformer-capacity curve 0.172 * V^1.332, the line X/R exponent 0.95, the
// transformer own-base reactance envelope (0, 0.25] p.u., and the best-fit
// family of each parameter. Everything not published ships as a placeholder
// and is excluded from hard validation.
ReferenceStats bundled_reference();

}  // namespace branchstat
