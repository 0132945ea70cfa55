#pragma once

// Case-file ingestion: a MATPOWER-subset reader (baseMVA / bus / branch
// matrices only), a flat branch CSV reader/writer, and line-length estimation
// from endpoint geography.

#include <optional>
#include <string>
#include <vector>

#include "core/grid_model.hpp"

namespace branchstat {

struct ParseResult {
  std::vector<BranchRecord> records;
  std::vector<std::string> warnings;
};

// Raw MATPOWER matrices, kept verbatim so a tuned case can be re-emitted with
// all columns intact (including ones this tool never interprets).
struct MatpowerCase {
  std::string name = "case";
  double base_mva = 0.0;
  std::vector<std::vector<double>> bus;
  std::vector<std::vector<double>> branch;
};

struct MatpowerParse {
  MatpowerCase raw;
  ParseResult result;
};

// Reads the baseMVA, bus and branch tables of a MATPOWER case function file.
// Bus columns used: bus_i (1), baseKV (10). Branch columns used: fbus, tbus,
// r, x, rateA, ratio, status. Everything else is carried through untouched.
// Out-of-service branches and branches touching a bus with baseKV <= 0 are
// dropped with a warning. Throws ParseError (with line number) on missing
// tables, malformed rows, or references to unknown buses.
MatpowerParse parse_matpower_subset(const std::string& text,
                                    std::optional<double> s_base_override = std::nullopt,
                                    double class_tolerance = kDefaultClassTolerance);

std::string write_matpower_case(const MatpowerCase& c);

// Branch CSV with header
//   id,kind,from_bus,to_bus,kv_high,kv_low,x_pu,r_pu,s_base_mva,rating_mva,
//   length_km,from_lat,from_lon,to_lat,to_lon
// Mandatory columns: id, kind, kv_high, kv_low, x_pu, r_pu, s_base_mva.
// Rows with unparseable or contract-violating cells are skipped with a
// warning; a missing mandatory column is a ParseError.
ParseResult parse_branch_csv(const std::string& text);

// Inverse of parse_branch_csv. The schema carries no separate voltage base;
// on reload system_base.v_base is taken as kv_high.
std::string write_branch_csv(const std::vector<BranchRecord>& records);

inline constexpr double kEarthRadiusKm = 6371.0;

// Haversine distance on a sphere of radius 6371 km. Throws InvalidInput for
// out-of-range coordinates.
double great_circle_km(const GeoPoint& p1, const GeoPoint& p2);

// For every line with endpoint geography and no explicit length, fills
// length_km from great_circle_km and marks it estimated. Explicit lengths and
// transformers are untouched.
std::vector<BranchRecord> fill_line_lengths(std::vector<BranchRecord> records);

}  // namespace branchstat
