#include "core/reference.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace branchstat {

double ReferencePowerCurve::evaluate(double kv) const {
  if (!a) throw InvalidInput("power curve has no published scale constant");
  return *a * std::pow(kv, b);
}

const ReferenceClassEntry* ReferenceParameter::find_class(double class_kv) const {
  for (const auto& entry : classes) {
    if (entry.class_kv == class_kv) return &entry;
  }
  return nullptr;
}

const ReferenceParameter& ReferenceStats::parameter(ParameterKind p) const {
  for (const auto& rp : parameters) {
    if (rp.parameter == p) return rp;
  }
  throw InvalidInput("reference has no entry for parameter " + std::string(parameter_token(p)));
}

ReferenceParameter& ReferenceStats::parameter(ParameterKind p) {
  for (auto& rp : parameters) {
    if (rp.parameter == p) return rp;
  }
  throw InvalidInput("reference has no entry for parameter " + std::string(parameter_token(p)));
}

ReferenceStats bundled_reference() {
  ReferenceStats ref;
  ref.provenance = "bundled reference constants";

  auto add = [&ref](ParameterKind p, DependenceClass dep, DistFamily family) -> ReferenceParameter& {
    ReferenceParameter rp;
    rp.parameter = p;
    rp.dependence = dep;
    rp.family = family;
    rp.provenance = "bundled";
    ref.parameters.push_back(std::move(rp));
    return ref.parameters.back();
  };

  {
    auto& rp = add(ParameterKind::XfmrXpuOwnBase, DependenceClass::VoltageIndependent,
                   DistFamily::Normal);
    rp.independent_range = std::make_pair(0.0, 0.25);  // p.u. on the own rating
  }
  {
    // The published family is for line per-unit reactance, carried here on
    // the distributed-reactance slot; no admissible band is published.
    auto& rp = add(ParameterKind::LineXOhmPerKm, DependenceClass::VoltageIndependent,
                   DistFamily::Exponential);
    rp.placeholder = true;
  }
  {
    auto& rp = add(ParameterKind::XfmrCapacityMva, DependenceClass::VoltageDependent,
                   DistFamily::Gev);
    rp.power_curve = ReferencePowerCurve{0.172, 1.332, std::nullopt, std::nullopt};
  }
  {
    auto& rp = add(ParameterKind::XfmrXOverR, DependenceClass::VoltageDependent, DistFamily::Gev);
    rp.placeholder = true;  // curve constants not published
  }
  {
    auto& rp = add(ParameterKind::LineLengthKm, DependenceClass::VoltageDependent,
                   DistFamily::Gev);
    rp.placeholder = true;
  }
  {
    auto& rp = add(ParameterKind::LineXOverR, DependenceClass::VoltageDependent,
                   DistFamily::Normal);
    rp.power_curve = ReferencePowerCurve{std::nullopt, 0.95, std::nullopt, std::nullopt};
    rp.placeholder = true;  // exponent published without the scale constant
  }
  {
    auto& rp = add(ParameterKind::LineCapacityMva, DependenceClass::VoltageDependent,
                   DistFamily::Normal);
    rp.placeholder = true;
  }
  return ref;
}

}  // namespace branchstat
