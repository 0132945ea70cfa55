#include <cmath>
#include <string>

#include <doctest.h>

#include "core/errors.hpp"
#include "core/ingest.hpp"
#include "core/synthesis.hpp"

using namespace branchstat;

namespace {

std::string two_bus_case(double kv_from, double kv_to, double ratio) {
  std::string kvf = std::to_string(kv_from);
  std::string kvt = std::to_string(kv_to);
  return "function mpc = case2\n"
         "mpc.version = '2';\n"
         "mpc.baseMVA = 100;\n"
         "mpc.bus = [\n"
         "\t1 1 0 0 0 0 1 1 0 " + kvf + " 1 1.1 0.9;\n"
         "\t2 1 0 0 0 0 1 1 0 " + kvt + " 1 1.1 0.9;\n"
         "];\n"
         "mpc.branch = [\n"
         "\t1 2 0.01 0.05 0 300 0 0 " + std::to_string(ratio) + " 0 1 -360 360;\n"
         "];\n";
}

}  // namespace

TEST_CASE("matpower 2-bus line maps fields directly") {
  auto parsed = parse_matpower_subset(two_bus_case(230, 230, 0));
  REQUIRE(parsed.result.records.size() == 1);
  const auto& rec = parsed.result.records[0];
  CHECK(rec.kind == BranchKind::Line);
  CHECK(rec.x_pu == 0.05);
  CHECK(rec.r_pu == 0.01);
  REQUIRE(rec.rating_mva.has_value());
  CHECK(*rec.rating_mva == 300.0);
  CHECK(rec.kv_high == 230.0);
  CHECK(rec.kv_low == 230.0);
  CHECK(rec.system_base.s_base_mva == 100.0);
  CHECK(rec.system_base.v_base_kv == 230.0);
  CHECK(branch_voltage_class(rec) == VoltageClass::canonical(230.0));
}

TEST_CASE("nonzero ratio forces a transformer") {
  auto parsed = parse_matpower_subset(two_bus_case(230, 115, 1.05));
  REQUIRE(parsed.result.records.size() == 1);
  const auto& rec = parsed.result.records[0];
  CHECK(rec.kind == BranchKind::Transformer);
  CHECK(rec.kv_high == 230.0);
  CHECK(rec.kv_low == 115.0);
}

TEST_CASE("differing endpoint kV forces a transformer even at ratio 0") {
  auto parsed = parse_matpower_subset(two_bus_case(230, 115, 0));
  REQUIRE(parsed.result.records.size() == 1);
  CHECK(parsed.result.records[0].kind == BranchKind::Transformer);
}

TEST_CASE("unknown bus reference names the bus") {
  std::string text = two_bus_case(230, 230, 0);
  auto pos = text.find("\t1 2 0.01");
  text.replace(pos, 4, "\t1 99");
  try {
    parse_matpower_subset(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("99") != std::string::npos);
  }
}

TEST_CASE("missing tables and malformed rows are parse errors") {
  CHECK_THROWS_AS(parse_matpower_subset("mpc.baseMVA = 100;\n"), ParseError);
  std::string short_row =
      "mpc.baseMVA = 100;\n"
      "mpc.bus = [\n"
      "\t1 1 0 0 0 0 1 1 0 230 1 1.1 0.9;\n"
      "\t2 1 0 0 0 0 1 1 0 230 1 1.1 0.9;\n"
      "];\n"
      "mpc.branch = [\n"
      "\t1 2 0.01;\n"
      "];\n";
  CHECK_THROWS_AS(parse_matpower_subset(short_row), ParseError);
  std::string bad_token =
      "mpc.baseMVA = 100;\n"
      "mpc.bus = [\n"
      "\t1 1 0 0 0 0 1 1 0 230 1 1.1 oops;\n"
      "];\n"
      "mpc.branch = [\n"
      "];\n";
  CHECK_THROWS_AS(parse_matpower_subset(bad_token), ParseError);
}

TEST_CASE("out-of-service branches are dropped with a warning") {
  std::string text = two_bus_case(230, 230, 0);
  auto pos = text.find(" 1 -360 360;");
  text.replace(pos, 2, " 0");
  auto parsed = parse_matpower_subset(text);
  CHECK(parsed.result.records.empty());
  REQUIRE(parsed.result.warnings.size() == 1);
  CHECK(parsed.result.warnings[0].find("out of service") != std::string::npos);
}

TEST_CASE("non-positive baseKV skips the touching branches with a warning") {
  std::string text = two_bus_case(230, 230, 0);
  auto pos = text.find("230.000000");  // bus 1's baseKV cell
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 10, "0.000000");
  auto parsed = parse_matpower_subset(text);
  CHECK(parsed.result.records.empty());
  REQUIRE_FALSE(parsed.result.warnings.empty());
  CHECK(parsed.result.warnings[0].find("baseKV") != std::string::npos);
}

TEST_CASE("s_base override replaces the file baseMVA") {
  auto parsed = parse_matpower_subset(two_bus_case(230, 230, 0), 50.0);
  REQUIRE(parsed.result.records.size() == 1);
  CHECK(parsed.result.records[0].system_base.s_base_mva == 50.0);
  CHECK(parsed.raw.base_mva == 50.0);
}

TEST_CASE("matpower rewrite preserves uninterpreted columns") {
  auto parsed = parse_matpower_subset(two_bus_case(230, 115, 1.05));
  std::string text = write_matpower_case(parsed.raw);
  auto reparsed = parse_matpower_subset(text);
  REQUIRE(reparsed.raw.branch.size() == 1);
  CHECK(reparsed.raw.branch[0] == parsed.raw.branch[0]);
  CHECK(reparsed.raw.bus == parsed.raw.bus);
  CHECK(reparsed.raw.base_mva == parsed.raw.base_mva);
}

TEST_CASE("branch csv row maps directly") {
  std::string text =
      "id,kind,from_bus,to_bus,kv_high,kv_low,x_pu,r_pu,s_base_mva,rating_mva,length_km,"
      "from_lat,from_lon,to_lat,to_lon\n"
      "T1,xfmr,a,b,230,115,0.08,0.004,100,200,,,,,\n";
  auto parsed = parse_branch_csv(text);
  REQUIRE(parsed.records.size() == 1);
  CHECK(parsed.warnings.empty());
  const auto& rec = parsed.records[0];
  CHECK(rec.kind == BranchKind::Transformer);
  CHECK(rec.kv_high == 230.0);
  CHECK(rec.kv_low == 115.0);
  CHECK(rec.x_pu == 0.08);
  CHECK(*rec.rating_mva == 200.0);
  CHECK_FALSE(rec.length_km.has_value());
}

TEST_CASE("csv line with geography and no length keeps geography") {
  std::string text =
      "id,kind,from_bus,to_bus,kv_high,kv_low,x_pu,r_pu,s_base_mva,rating_mva,length_km,"
      "from_lat,from_lon,to_lat,to_lon\n"
      "L1,line,a,b,115,115,0.02,0.003,100,150,,40.0,-75.0,40.5,-74.5\n";
  auto parsed = parse_branch_csv(text);
  REQUIRE(parsed.records.size() == 1);
  const auto& rec = parsed.records[0];
  REQUIRE(rec.endpoints_geo.has_value());
  CHECK_FALSE(rec.length_km.has_value());
  CHECK(rec.endpoints_geo->first.lat_deg == 40.0);
}

TEST_CASE("header-only csv parses to an empty list") {
  std::string text =
      "id,kind,from_bus,to_bus,kv_high,kv_low,x_pu,r_pu,s_base_mva,rating_mva,length_km,"
      "from_lat,from_lon,to_lat,to_lon\n";
  auto parsed = parse_branch_csv(text);
  CHECK(parsed.records.empty());
  CHECK(parsed.warnings.empty());
}

TEST_CASE("missing mandatory column is a parse error") {
  CHECK_THROWS_AS(parse_branch_csv("id,kind,from_bus\nT1,xfmr,a\n"), ParseError);
}

TEST_CASE("bad number becomes a row warning, not an error") {
  std::string text =
      "id,kind,from_bus,to_bus,kv_high,kv_low,x_pu,r_pu,s_base_mva,rating_mva,length_km,"
      "from_lat,from_lon,to_lat,to_lon\n"
      "T1,xfmr,a,b,230,115,oops,0.004,100,,,,,,\n"
      "T2,xfmr,a,b,230,115,0.05,0.004,100,,,,,,\n";
  auto parsed = parse_branch_csv(text);
  CHECK(parsed.records.size() == 1);
  CHECK(parsed.records[0].id == "T2");
  REQUIRE(parsed.warnings.size() == 1);
  CHECK(parsed.warnings[0].find("x_pu") != std::string::npos);
}

TEST_CASE("csv writer round-trips records field for field") {
  SeededRng rng(99);
  std::vector<BranchRecord> records;
  for (int i = 0; i < 40; ++i) {
    BranchRecord rec;
    bool line = rng.next_uniform() < 0.5;
    rec.id = (line ? "L" : "T") + std::to_string(i);
    rec.kind = line ? BranchKind::Line : BranchKind::Transformer;
    rec.from_bus = "f" + std::to_string(i);
    rec.to_bus = "t" + std::to_string(i);
    rec.kv_high = kCanonicalLevelsKv[i % kCanonicalLevelsKv.size()];
    rec.kv_low = line ? rec.kv_high : rec.kv_high / 2.0;
    rec.x_pu = rng.next_uniform() * 0.2;
    rec.r_pu = rng.next_uniform() * 0.02;
    rec.system_base = BaseQuantities{rec.kv_high, 100.0};
    if (rng.next_uniform() < 0.8) rec.rating_mva = 50.0 + 500.0 * rng.next_uniform();
    if (line && rng.next_uniform() < 0.6) rec.length_km = 1.0 + 100.0 * rng.next_uniform();
    if (line && rng.next_uniform() < 0.5) {
      rec.endpoints_geo = std::make_pair(
          GeoPoint{90.0 * (rng.next_uniform() - 0.5), 180.0 * (rng.next_uniform() - 0.5)},
          GeoPoint{90.0 * (rng.next_uniform() - 0.5), 180.0 * (rng.next_uniform() - 0.5)});
    }
    records.push_back(std::move(rec));
  }
  auto parsed = parse_branch_csv(write_branch_csv(records));
  CHECK(parsed.warnings.empty());
  REQUIRE(parsed.records.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& a = records[i];
    const auto& b = parsed.records[i];
    CHECK(a.id == b.id);
    CHECK(a.kind == b.kind);
    CHECK(a.from_bus == b.from_bus);
    CHECK(a.to_bus == b.to_bus);
    CHECK(a.kv_high == b.kv_high);
    CHECK(a.kv_low == b.kv_low);
    CHECK(a.x_pu == b.x_pu);
    CHECK(a.r_pu == b.r_pu);
    CHECK(a.system_base.s_base_mva == b.system_base.s_base_mva);
    CHECK(a.rating_mva == b.rating_mva);
    CHECK(a.length_km == b.length_km);
    CHECK(a.endpoints_geo.has_value() == b.endpoints_geo.has_value());
    if (a.endpoints_geo) {
      CHECK(a.endpoints_geo->first.lat_deg == b.endpoints_geo->first.lat_deg);
      CHECK(a.endpoints_geo->second.lon_deg == b.endpoints_geo->second.lon_deg);
    }
  }
}

TEST_CASE("great circle matches hand-derived arcs") {
  CHECK(great_circle_km({40, -75}, {40, -75}) == 0.0);
  // one degree of latitude: (pi/180) * 6371
  CHECK(great_circle_km({0, 0}, {1, 0}) == doctest::Approx(111.19492664455873).epsilon(1e-8));
  // antipodal along the equator: pi * 6371
  CHECK(great_circle_km({0, 0}, {0, 180}) == doctest::Approx(20015.086796020572).epsilon(1e-9));
  CHECK_THROWS_AS(great_circle_km({95, 0}, {0, 0}), InvalidInput);
}

TEST_CASE("great circle is symmetric and bounded") {
  SeededRng rng(3);
  for (int i = 0; i < 200; ++i) {
    GeoPoint a{180.0 * (rng.next_uniform() - 0.5), 360.0 * (rng.next_uniform() - 0.5)};
    GeoPoint b{180.0 * (rng.next_uniform() - 0.5), 360.0 * (rng.next_uniform() - 0.5)};
    double ab = great_circle_km(a, b);
    CHECK(ab == great_circle_km(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 3.14159265358979323846 * kEarthRadiusKm + 1e-9);
  }
}

TEST_CASE("fill_line_lengths fills only missing line lengths") {
  BranchRecord explicit_line;
  explicit_line.id = "L1";
  explicit_line.kind = BranchKind::Line;
  explicit_line.length_km = 12.5;
  explicit_line.endpoints_geo = std::make_pair(GeoPoint{0, 0}, GeoPoint{1, 0});

  BranchRecord geo_line = explicit_line;
  geo_line.id = "L2";
  geo_line.length_km.reset();

  BranchRecord xfmr;
  xfmr.id = "T1";
  xfmr.kind = BranchKind::Transformer;
  xfmr.endpoints_geo = std::make_pair(GeoPoint{0, 0}, GeoPoint{1, 0});

  auto filled = fill_line_lengths({explicit_line, geo_line, xfmr});
  CHECK(*filled[0].length_km == 12.5);
  CHECK_FALSE(filled[0].length_estimated);
  CHECK(*filled[1].length_km == doctest::Approx(111.19492664455873).epsilon(1e-8));
  CHECK(filled[1].length_estimated);
  CHECK_FALSE(filled[2].length_km.has_value());
}
