#include "core/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "core/errors.hpp"
#include "core/textio.hpp"

namespace branchstat {

namespace {

// ---------------------------------------------------------------------------
// MATPOWER subset
// ---------------------------------------------------------------------------

struct NumberedRow {
  std::vector<double> values;
  int line = 0;
};

// Reads the numeric rows of one `mpc.<name> = [ ... ];` matrix starting after
// the opening bracket. Advances `i` past the closing bracket line.
std::vector<NumberedRow> read_matrix(const std::vector<std::string_view>& lines, std::size_t& i,
                                     const std::string& table) {
  std::vector<NumberedRow> rows;
  for (; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (auto cut = line.find('%'); cut != std::string_view::npos) line = line.substr(0, cut);
    bool closes = line.find(']') != std::string_view::npos;
    if (closes) line = line.substr(0, line.find(']'));

    std::string cleaned(line);
    std::replace(cleaned.begin(), cleaned.end(), ';', ' ');
    std::replace(cleaned.begin(), cleaned.end(), '\t', ' ');
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');

    NumberedRow row;
    row.line = static_cast<int>(i + 1);
    std::istringstream ss(cleaned);
    std::string tok;
    while (ss >> tok) {
      auto v = parse_double(tok);
      if (!v) throw ParseError("malformed " + table + " row: bad token '" + tok + "'", row.line);
      row.values.push_back(*v);
    }
    if (!row.values.empty()) rows.push_back(std::move(row));
    if (closes) {
      ++i;
      return rows;
    }
  }
  throw ParseError("unterminated " + table + " matrix", static_cast<int>(lines.size()));
}

std::string format_bus_id(double v) {
  double rounded = std::nearbyint(v);
  if (std::abs(v - rounded) < 1e-9 && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(rounded));
  }
  return to_decimal_string(v);
}

}  // namespace

MatpowerParse parse_matpower_subset(const std::string& text, std::optional<double> s_base_override,
                                    double class_tolerance) {
  MatpowerParse out;
  auto lines = split_lines(text);

  bool have_base_mva = false;
  bool have_bus = false;
  bool have_branch = false;
  std::vector<NumberedRow> bus_rows;
  std::vector<NumberedRow> branch_rows;

  for (std::size_t i = 0; i < lines.size();) {
    std::string_view line = lines[i];
    if (auto cut = line.find('%'); cut != std::string_view::npos) line = line.substr(0, cut);
    std::string_view t = trim(line);

    if (t.rfind("function", 0) == 0) {
      if (auto eq = t.find('='); eq != std::string_view::npos) {
        out.raw.name = std::string(trim(t.substr(eq + 1)));
      }
      ++i;
    } else if (t.rfind("mpc.baseMVA", 0) == 0) {
      auto eq = t.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError("malformed baseMVA assignment", static_cast<int>(i + 1));
      }
      std::string rhs(trim(t.substr(eq + 1)));
      if (!rhs.empty() && rhs.back() == ';') rhs.pop_back();
      auto v = parse_double(rhs);
      if (!v || *v <= 0.0) {
        throw ParseError("baseMVA must be a positive number", static_cast<int>(i + 1));
      }
      out.raw.base_mva = *v;
      have_base_mva = true;
      ++i;
    } else if (t.rfind("mpc.bus", 0) == 0 && t.find('[') != std::string_view::npos) {
      ++i;
      bus_rows = read_matrix(lines, i, "bus");
      have_bus = true;
    } else if (t.rfind("mpc.branch", 0) == 0 && t.find('[') != std::string_view::npos) {
      ++i;
      branch_rows = read_matrix(lines, i, "branch");
      have_branch = true;
    } else {
      ++i;
    }
  }

  if (!have_base_mva && !s_base_override) throw ParseError("missing mpc.baseMVA");
  if (!have_bus) throw ParseError("missing mpc.bus table");
  if (!have_branch) throw ParseError("missing mpc.branch table");

  double s_base = s_base_override.value_or(out.raw.base_mva);
  if (s_base_override) out.raw.base_mva = *s_base_override;
  if (s_base <= 0.0) throw ParseError("system power base must be positive");

  // bus_i -> baseKV
  std::map<long long, double> bus_kv;
  for (const auto& row : bus_rows) {
    if (row.values.size() < 10) throw ParseError("malformed bus row: expected >= 10 columns", row.line);
    long long id = static_cast<long long>(std::llround(row.values[0]));
    if (!bus_kv.emplace(id, row.values[9]).second) {
      out.result.warnings.push_back("duplicate bus " + std::to_string(id) +
                                    "; first definition kept");
    }
    out.raw.bus.push_back(row.values);
  }

  int table_row = 0;
  for (const auto& row : branch_rows) {
    ++table_row;
    if (row.values.size() < 11) {
      throw ParseError("malformed branch row: expected >= 11 columns", row.line);
    }
    out.raw.branch.push_back(row.values);

    long long fbus = static_cast<long long>(std::llround(row.values[0]));
    long long tbus = static_cast<long long>(std::llround(row.values[1]));
    auto f_it = bus_kv.find(fbus);
    auto t_it = bus_kv.find(tbus);
    if (f_it == bus_kv.end()) {
      throw ParseError("branch references unknown bus " + std::to_string(fbus), row.line);
    }
    if (t_it == bus_kv.end()) {
      throw ParseError("branch references unknown bus " + std::to_string(tbus), row.line);
    }

    std::string id = "b" + std::to_string(table_row);
    double status = row.values[10];
    if (status == 0.0) {
      out.result.warnings.push_back("branch " + id + " is out of service; dropped");
      continue;
    }
    double kv_from = f_it->second;
    double kv_to = t_it->second;
    if (kv_from <= 0.0 || kv_to <= 0.0) {
      out.result.warnings.push_back("branch " + id +
                                    " touches a bus with non-positive baseKV; skipped");
      continue;
    }

    double ratio = row.values[8];
    double kv_high = std::max(kv_from, kv_to);
    double kv_low = std::min(kv_from, kv_to);
    bool kv_mismatch = (kv_high - kv_low) / kv_high > class_tolerance;

    BranchRecord rec;
    rec.id = id;
    rec.kind = (ratio != 0.0 || kv_mismatch) ? BranchKind::Transformer : BranchKind::Line;
    rec.from_bus = format_bus_id(row.values[0]);
    rec.to_bus = format_bus_id(row.values[1]);
    rec.r_pu = row.values[2];
    rec.x_pu = row.values[3];
    rec.kv_high = kv_high;
    rec.kv_low = rec.kind == BranchKind::Line ? kv_high : kv_low;
    rec.system_base = BaseQuantities{kv_high, s_base};
    if (double rate_a = row.values[5]; rate_a > 0.0) rec.rating_mva = rate_a;
    rec.source_row = table_row - 1;

    if (rec.r_pu < 0.0) {
      out.result.warnings.push_back("branch " + id + " has negative resistance; skipped");
      continue;
    }
    out.result.records.push_back(std::move(rec));
  }
  return out;
}

std::string write_matpower_case(const MatpowerCase& c) {
  std::string out;
  out += "function mpc = " + c.name + "\n";
  out += "mpc.version = '2';\n";
  out += "mpc.baseMVA = " + to_decimal_string(c.base_mva) + ";\n";
  auto emit = [&out](const char* table, const std::vector<std::vector<double>>& rows) {
    out += std::string("mpc.") + table + " = [\n";
    for (const auto& row : rows) {
      out += '\t';
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ' ';
        out += to_decimal_string(row[i]);
      }
      out += ";\n";
    }
    out += "];\n";
  };
  emit("bus", c.bus);
  emit("branch", c.branch);
  return out;
}

// ---------------------------------------------------------------------------
// Branch CSV
// ---------------------------------------------------------------------------

namespace {

const char* const kCsvColumns[] = {"id",       "kind",       "from_bus",   "to_bus",
                                   "kv_high",  "kv_low",     "x_pu",       "r_pu",
                                   "s_base_mva", "rating_mva", "length_km", "from_lat",
                                   "from_lon", "to_lat",     "to_lon"};
constexpr std::size_t kCsvColumnCount = 15;
const char* const kMandatoryColumns[] = {"id",   "kind", "kv_high",   "kv_low",
                                         "x_pu", "r_pu", "s_base_mva"};

}  // namespace

ParseResult parse_branch_csv(const std::string& text) {
  ParseResult out;
  auto lines = split_lines(text);

  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw ParseError("missing CSV header row");

  std::map<std::string, std::size_t, std::less<>> col;
  {
    auto cells = split(lines[first], ',');
    for (std::size_t i = 0; i < cells.size(); ++i) col.emplace(std::string(trim(cells[i])), i);
    for (const char* name : kMandatoryColumns) {
      if (!col.count(name)) {
        throw ParseError(std::string("missing mandatory column '") + name + "'",
                         static_cast<int>(first + 1));
      }
    }
  }

  auto cell = [&](const std::vector<std::string_view>& cells,
                  const char* name) -> std::string_view {
    auto it = col.find(name);
    if (it == col.end() || it->second >= cells.size()) return {};
    return trim(cells[it->second]);
  };

  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    int line_no = static_cast<int>(li + 1);
    auto cells = split(lines[li], ',');
    auto warn_skip = [&](const std::string& why) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": " + why + "; row skipped");
    };

    BranchRecord rec;
    rec.id = std::string(cell(cells, "id"));
    if (rec.id.empty()) {
      warn_skip("empty id");
      continue;
    }
    std::string_view kind = cell(cells, "kind");
    if (kind == "line") {
      rec.kind = BranchKind::Line;
    } else if (kind == "xfmr") {
      rec.kind = BranchKind::Transformer;
    } else {
      warn_skip("unknown kind '" + std::string(kind) + "'");
      continue;
    }
    rec.from_bus = std::string(cell(cells, "from_bus"));
    rec.to_bus = std::string(cell(cells, "to_bus"));

    auto need = [&](const char* name) -> std::optional<double> {
      auto v = parse_double(cell(cells, name));
      if (!v) warn_skip(std::string("bad number in column ") + name);
      return v;
    };
    auto kv_high = need("kv_high");
    if (!kv_high) continue;
    auto kv_low = need("kv_low");
    if (!kv_low) continue;
    auto x_pu = need("x_pu");
    if (!x_pu) continue;
    auto r_pu = need("r_pu");
    if (!r_pu) continue;
    auto s_base = need("s_base_mva");
    if (!s_base) continue;

    if (*kv_high <= 0.0 || *kv_low <= 0.0) {
      warn_skip("non-positive voltage");
      continue;
    }
    if (rec.kind == BranchKind::Line && *kv_high != *kv_low) {
      warn_skip("line with kv_high != kv_low");
      continue;
    }
    if (*s_base <= 0.0) {
      warn_skip("non-positive s_base_mva");
      continue;
    }
    if (!std::isfinite(*x_pu)) {
      warn_skip("non-finite x_pu");
      continue;
    }
    if (*r_pu < 0.0) {
      warn_skip("negative r_pu");
      continue;
    }
    rec.kv_high = *kv_high;
    rec.kv_low = *kv_low;
    rec.x_pu = *x_pu;
    rec.r_pu = *r_pu;
    rec.system_base = BaseQuantities{*kv_high, *s_base};

    if (auto rating = parse_double(cell(cells, "rating_mva"))) {
      if (*rating > 0.0) {
        rec.rating_mva = *rating;
      } else {
        out.warnings.push_back("line " + std::to_string(line_no) +
                               ": non-positive rating_mva ignored");
      }
    }
    if (auto length = parse_double(cell(cells, "length_km"))) {
      if (rec.kind == BranchKind::Transformer) {
        out.warnings.push_back("line " + std::to_string(line_no) +
                               ": length_km on a transformer ignored");
      } else if (*length > 0.0) {
        rec.length_km = *length;
      } else {
        out.warnings.push_back("line " + std::to_string(line_no) +
                               ": non-positive length_km ignored");
      }
    }

    auto from_lat = parse_double(cell(cells, "from_lat"));
    auto from_lon = parse_double(cell(cells, "from_lon"));
    auto to_lat = parse_double(cell(cells, "to_lat"));
    auto to_lon = parse_double(cell(cells, "to_lon"));
    int geo_cells = int(bool(from_lat)) + int(bool(from_lon)) + int(bool(to_lat)) + int(bool(to_lon));
    if (geo_cells == 4) {
      GeoPoint from{*from_lat, *from_lon};
      GeoPoint to{*to_lat, *to_lon};
      if (from.valid() && to.valid()) {
        rec.endpoints_geo = std::make_pair(from, to);
      } else {
        out.warnings.push_back("line " + std::to_string(line_no) +
                               ": coordinates out of range; geography ignored");
      }
    } else if (geo_cells != 0) {
      out.warnings.push_back("line " + std::to_string(line_no) +
                             ": incomplete coordinates; geography ignored");
    }
    rec.source_row = static_cast<int>(out.records.size());
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::string write_branch_csv(const std::vector<BranchRecord>& records) {
  std::string out;
  for (std::size_t i = 0; i < kCsvColumnCount; ++i) {
    if (i) out += ',';
    out += kCsvColumns[i];
  }
  out += '\n';
  auto opt = [](const std::optional<double>& v) { return v ? to_decimal_string(*v) : ""; };
  for (const auto& r : records) {
    out += r.id;
    out += ',';
    out += r.kind == BranchKind::Line ? "line" : "xfmr";
    out += ',';
    out += r.from_bus;
    out += ',';
    out += r.to_bus;
    out += ',';
    out += to_decimal_string(r.kv_high);
    out += ',';
    out += to_decimal_string(r.kv_low);
    out += ',';
    out += to_decimal_string(r.x_pu);
    out += ',';
    out += to_decimal_string(r.r_pu);
    out += ',';
    out += to_decimal_string(r.system_base.s_base_mva);
    out += ',';
    out += opt(r.rating_mva);
    out += ',';
    out += opt(r.length_km);
    if (r.endpoints_geo) {
      out += ',' + to_decimal_string(r.endpoints_geo->first.lat_deg);
      out += ',' + to_decimal_string(r.endpoints_geo->first.lon_deg);
      out += ',' + to_decimal_string(r.endpoints_geo->second.lat_deg);
      out += ',' + to_decimal_string(r.endpoints_geo->second.lon_deg);
    } else {
      out += ",,,,";
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Geography
// ---------------------------------------------------------------------------

double great_circle_km(const GeoPoint& p1, const GeoPoint& p2) {
  if (!p1.valid() || !p2.valid()) {
    throw InvalidInput("coordinates out of range for great-circle distance");
  }
  constexpr double deg = 3.14159265358979323846 / 180.0;
  double lat1 = p1.lat_deg * deg;
  double lat2 = p2.lat_deg * deg;
  double dlat = (p2.lat_deg - p1.lat_deg) * deg;
  double dlon = (p2.lon_deg - p1.lon_deg) * deg;
  double s1 = std::sin(dlat / 2.0);
  double s2 = std::sin(dlon / 2.0);
  double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

std::vector<BranchRecord> fill_line_lengths(std::vector<BranchRecord> records) {
  for (auto& rec : records) {
    if (rec.kind != BranchKind::Line || rec.length_km || !rec.endpoints_geo) continue;
    double km = great_circle_km(rec.endpoints_geo->first, rec.endpoints_geo->second);
    if (km > 0.0) {
      rec.length_km = km;
      rec.length_estimated = true;
    }
  }
  return records;
}

}  // namespace branchstat
