#include "core/grid_model.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace branchstat {

bool BaseQuantities::valid() const {
  return std::isfinite(v_base_kv) && std::isfinite(s_base_mva) && v_base_kv > 0.0 &&
         s_base_mva > 0.0;
}

bool GeoPoint::valid() const {
  return std::isfinite(lat_deg) && std::isfinite(lon_deg) && lat_deg >= -90.0 &&
         lat_deg <= 90.0 && lon_deg >= -180.0 && lon_deg <= 180.0;
}

VoltageClass VoltageClass::canonical(double level_kv) {
  for (double level : kCanonicalLevelsKv) {
    if (level == level_kv) return VoltageClass(level, true);
  }
  throw InvalidInput("not a canonical voltage level: " + std::to_string(level_kv));
}

VoltageClass VoltageClass::other(double kv) { return VoltageClass(kv, false); }

std::string_view parameter_token(ParameterKind p) {
  switch (p) {
    case ParameterKind::XfmrXpuOwnBase: return "xfmr_x_pu";
    case ParameterKind::LineXOhmPerKm: return "line_x_ohm_per_km";
    case ParameterKind::XfmrCapacityMva: return "xfmr_capacity_mva";
    case ParameterKind::XfmrXOverR: return "xfmr_x_over_r";
    case ParameterKind::LineLengthKm: return "line_length_km";
    case ParameterKind::LineXOverR: return "line_x_over_r";
    case ParameterKind::LineCapacityMva: return "line_capacity_mva";
  }
  return "unknown";
}

std::string_view parameter_display_name(ParameterKind p) {
  switch (p) {
    case ParameterKind::XfmrXpuOwnBase: return "Transformer X (p.u.)";
    case ParameterKind::LineXOhmPerKm: return "Line X (Ω/km)";
    case ParameterKind::XfmrCapacityMva: return "Transformer Capacity (MVA)";
    case ParameterKind::XfmrXOverR: return "Transformer X/R ratio";
    case ParameterKind::LineLengthKm: return "Line Length l (km)";
    case ParameterKind::LineXOverR: return "Line X/R ratio";
    case ParameterKind::LineCapacityMva: return "Line Capacity (MVA)";
  }
  return "unknown";
}

std::optional<ParameterKind> parse_parameter_token(std::string_view token) {
  for (auto p : kAllParameters) {
    if (parameter_token(p) == token) return p;
  }
  return std::nullopt;
}

bool parameter_is_transformer(ParameterKind p) {
  switch (p) {
    case ParameterKind::XfmrXpuOwnBase:
    case ParameterKind::XfmrCapacityMva:
    case ParameterKind::XfmrXOverR:
      return true;
    default:
      return false;
  }
}

VoltageClass classify_voltage(double kv, double tolerance_frac) {
  if (!std::isfinite(kv) || kv <= 0.0) {
    throw InvalidInput("voltage must be positive, got " + std::to_string(kv));
  }
  if (!(tolerance_frac >= 0.0 && tolerance_frac < 0.5)) {
    throw InvalidInput("classification tolerance must lie in [0, 0.5)");
  }
  // Smallest relative gap between adjacent levels is 138->161 (16.7%), so any
  // tolerance below half of that makes at most one level match.
  for (double level : kCanonicalLevelsKv) {
    if (std::abs(kv - level) / level <= tolerance_frac) {
      return VoltageClass::canonical(level);
    }
  }
  return VoltageClass::other(kv);
}

VoltageClass branch_voltage_class(const BranchRecord& rec, double tolerance_frac) {
  return classify_voltage(rec.kv_high, tolerance_frac);
}

}  // namespace branchstat
