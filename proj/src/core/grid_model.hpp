#pragma once

// Domain types shared by every stage of the toolkit: branch records, voltage
// classes, and the seven studied branch parameters. Value types only; the
// numerics live elsewhere.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace branchstat {

// Voltage/power base pair a per-unit impedance is expressed on.
struct BaseQuantities {
  double v_base_kv = 0.0;   // > 0
  double s_base_mva = 0.0;  // > 0

  bool valid() const;
};

enum class BranchKind { Line, Transformer };

struct GeoPoint {
  double lat_deg = 0.0;  // [-90, 90]
  double lon_deg = 0.0;  // [-180, 180]

  bool valid() const;
};

// One transmission line or transformer. x_pu/r_pu are on `system_base`.
struct BranchRecord {
  std::string id;
  BranchKind kind = BranchKind::Line;
  std::string from_bus;
  std::string to_bus;
  double x_pu = 0.0;
  double r_pu = 0.0;
  BaseQuantities system_base;
  std::optional<double> rating_mva;  // equipment capacity, > 0 when present
  double kv_high = 0.0;
  double kv_low = 0.0;  // equals kv_high for lines
  std::optional<double> length_km;
  std::optional<std::pair<GeoPoint, GeoPoint>> endpoints_geo;

  // Bookkeeping, not part of the record contract.
  bool length_estimated = false;  // length filled from geography
  int source_row = -1;            // row in the source branch table, -1 if none
};

// Canonical nominal levels of the studied networks, 69 through 735 kV.
inline constexpr std::array<double, 8> kCanonicalLevelsKv = {69.0,  115.0, 138.0, 161.0,
                                                             230.0, 345.0, 500.0, 735.0};

// A canonical nominal level or Other(kv) for anything off the ladder.
class VoltageClass {
 public:
  static VoltageClass canonical(double level_kv);
  static VoltageClass other(double kv);

  bool is_canonical() const { return canonical_; }
  double nominal_kv() const { return nominal_kv_; }

  friend bool operator==(const VoltageClass& a, const VoltageClass& b) {
    return a.canonical_ == b.canonical_ && a.nominal_kv_ == b.nominal_kv_;
  }
  friend bool operator!=(const VoltageClass& a, const VoltageClass& b) { return !(a == b); }

 private:
  VoltageClass(double kv, bool canonical) : nominal_kv_(kv), canonical_(canonical) {}
  double nominal_kv_;
  bool canonical_;
};

// The seven studied branch parameters, in report order.
enum class ParameterKind {
  XfmrXpuOwnBase,   // transformer per-unit reactance on its own MVA rating
  LineXOhmPerKm,    // line distributed reactance
  XfmrCapacityMva,  // transformer rating
  XfmrXOverR,       // transformer X/R ratio
  LineLengthKm,     // line length
  LineXOverR,       // line X/R ratio
  LineCapacityMva,  // line rating
};

inline constexpr std::array<ParameterKind, 7> kAllParameters = {
    ParameterKind::XfmrXpuOwnBase, ParameterKind::LineXOhmPerKm, ParameterKind::XfmrCapacityMva,
    ParameterKind::XfmrXOverR,     ParameterKind::LineLengthKm,  ParameterKind::LineXOverR,
    ParameterKind::LineCapacityMva};

// Stable machine token, e.g. "xfmr_capacity_mva". Used in files and flags.
std::string_view parameter_token(ParameterKind p);
// Human-readable row label, e.g. "Transformer Capacity (MVA)".
std::string_view parameter_display_name(ParameterKind p);
std::optional<ParameterKind> parse_parameter_token(std::string_view token);
bool parameter_is_transformer(ParameterKind p);

inline constexpr double kDefaultClassTolerance = 0.05;

// Snaps kv to the canonical level within tolerance_frac relative error, else
// Other(kv). Throws InvalidInput for kv <= 0 or tolerance outside [0, 0.5).
VoltageClass classify_voltage(double kv, double tolerance_frac = kDefaultClassTolerance);

// Transformers are binned by their high-voltage side; lines by their single
// nominal level (kv_high == kv_low).
VoltageClass branch_voltage_class(const BranchRecord& rec,
                                  double tolerance_frac = kDefaultClassTolerance);

}  // namespace branchstat
