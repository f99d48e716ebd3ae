#pragma once
// On-disk interchange for the command-line driver: strict versioned JSON
// configs (unknown keys rejected, parse errors reported with line/column),
// frozen calibration constants, deterministic report emission, a minimal
// structural schema validator, and CSV tables for plotting.
//
// Determinism contract: identical config + seed must produce byte-identical
// report files.  Reports therefore carry no timestamps or durations, objects
// preserve insertion order, and every number is printed by the same
// fixed-format routines on every run.

#include "bhi/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace bhi {

using ojson = nlohmann::ordered_json;

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kReportSchemaId = "bhi-report-v1";

// ---------------------------------------------------------------------------
// file IO
// ---------------------------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw config_error("cannot write file: " + path);
  out << content;
  out.flush();
  if (!out) throw config_error("short write: " + path);
}

// ---------------------------------------------------------------------------
// parsing with line/column diagnostics
// ---------------------------------------------------------------------------

struct TextPos {
  int line = 1;    // 1-based
  int column = 1;  // 1-based, in bytes
};

inline TextPos text_position(const std::string& text, std::size_t byte) {
  TextPos p;
  const std::size_t stop = std::min(byte, text.size());
  for (std::size_t i = 0; i < stop; ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

// Parse a JSON document; a syntax error becomes a config_error that names the
// origin and the 1-based line:column of the offending byte.
inline ojson parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is 1-based and points just past the last accepted character
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    const TextPos pos = text_position(text, byte);
    std::ostringstream msg;
    msg << origin << ":" << pos.line << ":" << pos.column << ": " << e.what();
    throw config_error(msg.str());
  }
}

inline ojson load_json_file(const std::string& path) {
  return parse_json_text(read_text_file(path), path);
}

// ---------------------------------------------------------------------------
// strict object access
// ---------------------------------------------------------------------------

// Reject members outside the declared set and report missing required ones.
inline void check_keys(const ojson& obj, const std::string& where,
                       const std::vector<std::string>& required,
                       const std::vector<std::string>& optional = {}) {
  if (!obj.is_object()) throw config_error(where + ": expected a JSON object");
  auto known = [&](const std::string& k) {
    for (const auto& r : required)
      if (r == k) return true;
    for (const auto& o : optional)
      if (o == k) return true;
    return false;
  };
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known(it.key())) {
      std::ostringstream msg;
      msg << where << ": unknown key \"" << it.key() << "\" (allowed:";
      for (const auto& r : required) msg << " " << r;
      for (const auto& o : optional) msg << " " << o;
      msg << ")";
      throw config_error(msg.str());
    }
  }
  for (const auto& r : required)
    if (!obj.contains(r)) throw config_error(where + ": missing required key \"" + r + "\"");
}

inline const ojson& need(const ojson& obj, const std::string& where, const std::string& key) {
  if (!obj.is_object() || !obj.contains(key))
    throw config_error(where + ": missing required key \"" + key + "\"");
  return obj.at(key);
}

inline double need_number(const ojson& obj, const std::string& where, const std::string& key) {
  const ojson& v = need(obj, where, key);
  if (!v.is_number()) throw config_error(where + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::int64_t need_int(const ojson& obj, const std::string& where, const std::string& key) {
  const ojson& v = need(obj, where, key);
  if (!v.is_number_integer()) throw config_error(where + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

inline std::string need_string(const ojson& obj, const std::string& where,
                               const std::string& key) {
  const ojson& v = need(obj, where, key);
  if (!v.is_string()) throw config_error(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline double number_or(const ojson& obj, const std::string& where, const std::string& key,
                        double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const ojson& v = obj.at(key);
  if (!v.is_number()) throw config_error(where + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::int64_t int_or(const ojson& obj, const std::string& where, const std::string& key,
                           std::int64_t fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const ojson& v = obj.at(key);
  if (!v.is_number_integer()) throw config_error(where + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

inline std::vector<double> need_number_array(const ojson& obj, const std::string& where,
                                             const std::string& key) {
  const ojson& v = need(obj, where, key);
  if (!v.is_array()) throw config_error(where + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw config_error(where + "." + key + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

// Version gate shared by every config kind; the message carries a migration
// hint so a stale file is actionable, not just rejected.
inline void check_schema_version(const ojson& j, const std::string& origin) {
  const std::int64_t v = need_int(j, origin, "schema_version");
  if (v != kConfigSchemaVersion) {
    std::ostringstream msg;
    msg << origin << ": schema_version " << v << " is not readable by this build (expected "
        << kConfigSchemaVersion << "). Migration: start from a shipped file under configs/ "
        << "with schema_version " << kConfigSchemaVersion
        << " and port your fields across; field names and defaults are documented in README.md.";
    throw config_error(msg.str());
  }
}

// ---------------------------------------------------------------------------
// frozen calibration constants
// ---------------------------------------------------------------------------

// Normalization constants measured once by the calibration routines and then
// pinned in a versioned file that scenario configs reference by path.
struct CalibrationData {
  std::string version;

  // boundary-mode constants (half-line flow)
  double c0 = 0.0;           // per-mode transgression of the full connecting flow
  double eps = 0.0;          // sign pairing the symbol winding with the flow direction
  double kappa_unit = 0.0;   // spectral-asymmetry normalization per unit mode index
  double kappa_freeze = 0.0; // frozen eta-vs-sign-sum comparison constant
  std::string scheme;        // finite-difference scheme the constants were measured with

  // area-pairing constants (two-torus)
  double area_ratio_re = 0.0;  // pairing / plaquette-holonomy first Chern number
  double area_ratio_im = 0.0;
  double orientation = 0.0;    // plaquette orientation sign vs the counting arithmetic

  static CalibrationData from_json(const ojson& j, const std::string& origin) {
    check_schema_version(j, origin);
    check_keys(j, origin, {"schema_version", "constants_version", "degree0", "degree2"});
    CalibrationData c;
    c.version = need_string(j, origin, "constants_version");
    const ojson& d0 = need(j, origin, "degree0");
    check_keys(d0, origin + ".degree0", {"c0", "eps", "kappa_unit", "kappa_freeze", "scheme"});
    c.c0 = need_number(d0, origin + ".degree0", "c0");
    c.eps = need_number(d0, origin + ".degree0", "eps");
    c.kappa_unit = need_number(d0, origin + ".degree0", "kappa_unit");
    c.kappa_freeze = need_number(d0, origin + ".degree0", "kappa_freeze");
    c.scheme = need_string(d0, origin + ".degree0", "scheme");
    const ojson& d2 = need(j, origin, "degree2");
    check_keys(d2, origin + ".degree2", {"ratio_re", "ratio_im", "orientation"});
    c.area_ratio_re = need_number(d2, origin + ".degree2", "ratio_re");
    c.area_ratio_im = need_number(d2, origin + ".degree2", "ratio_im");
    c.orientation = need_number(d2, origin + ".degree2", "orientation");
    return c;
  }

  static CalibrationData load(const std::string& path) {
    return from_json(load_json_file(path), path);
  }
};

// ---------------------------------------------------------------------------
// scenario configs
// ---------------------------------------------------------------------------

struct ApsScenario {
  int boundary_sites = 16;
  int slab_depth = 64;
  int margin = 28;
  std::string scheme = "balanced";
  double boundary_gap = 0.6;
  int cap_depth = 5;
  double cap_amplitude = 0.4;
  std::vector<double> u_grid{0.5, 1.0, 2.0, 4.0};
  double u_main = 1.0;
  int regulator_offset = 10;
  int nlam = 512;
  bool relative_enabled = true;
  double path_tol = 1e-8;
  int path_max_nodes = 2049;
  double horizon_tol = 1e-18;  // corner blocks decay at half the diagonal rate
  int integrand_samples = 65;
};

struct FluxCase {
  int p = 1;
  int q = 8;
  int grid = 32;
};

struct FluxScenario {
  std::vector<FluxCase> cases;
  double t1 = 1.0;
  double t2 = 0.2;
  double drop_tol = 1e-13;
  int scan_grid = 64;
};

struct ScenarioConfig {
  std::string path;  // file this was loaded from
  std::string scenario_id;
  std::string kind;  // "aps_slab_degree0" | "flux_torus_area"
  std::uint64_t seed = 1;
  std::string calibration_path;  // resolved relative to the config file
  CalibrationData calibration;
  ojson tolerances;  // name -> threshold overrides

  std::optional<ApsScenario> aps;
  std::optional<FluxScenario> flux;

  double tol(const std::string& name, double fallback) const {
    if (tolerances.is_object() && tolerances.contains(name)) {
      const ojson& v = tolerances.at(name);
      if (!v.is_number()) throw config_error(path + ".tolerances." + name + ": expected a number");
      return v.get<double>();
    }
    return fallback;
  }

  static ScenarioConfig load(const std::string& file_path) {
    const ojson j = load_json_file(file_path);
    const std::string origin = file_path;
    check_schema_version(j, origin);
    check_keys(j, origin,
               {"schema_version", "scenario_id", "kind", "seed", "calibration", "model"},
               {"flow", "relative", "tolerances"});

    ScenarioConfig sc;
    sc.path = file_path;
    sc.scenario_id = need_string(j, origin, "scenario_id");
    sc.kind = need_string(j, origin, "kind");
    const std::int64_t seed = need_int(j, origin, "seed");
    if (seed < 0) throw config_error(origin + ".seed: expected a nonnegative integer");
    sc.seed = static_cast<std::uint64_t>(seed);

    // the calibration file is named relative to the directory of the config
    const std::string calib_rel = need_string(j, origin, "calibration");
    std::filesystem::path base = std::filesystem::path(file_path).parent_path();
    sc.calibration_path = (base / calib_rel).string();
    sc.calibration = CalibrationData::load(sc.calibration_path);

    if (j.contains("tolerances")) {
      sc.tolerances = j.at("tolerances");
      if (!sc.tolerances.is_object()) throw config_error(origin + ".tolerances: expected an object");
    }

    const ojson& model = need(j, origin, "model");
    if (sc.kind == "aps_slab_degree0") {
      ApsScenario a;
      check_keys(model, origin + ".model",
                 {"boundary_sites", "slab_depth", "margin", "scheme", "boundary_gap"},
                 {"cap_depth", "cap_amplitude"});
      a.boundary_sites = static_cast<int>(need_int(model, origin + ".model", "boundary_sites"));
      a.slab_depth = static_cast<int>(need_int(model, origin + ".model", "slab_depth"));
      a.margin = static_cast<int>(need_int(model, origin + ".model", "margin"));
      a.scheme = need_string(model, origin + ".model", "scheme");
      a.boundary_gap = need_number(model, origin + ".model", "boundary_gap");
      a.cap_depth = static_cast<int>(int_or(model, origin + ".model", "cap_depth", a.cap_depth));
      a.cap_amplitude = number_or(model, origin + ".model", "cap_amplitude", a.cap_amplitude);
      if (a.scheme != "balanced" && a.scheme != "forward")
        throw config_error(origin + ".model.scheme: expected \"balanced\" or \"forward\"");
      if (a.boundary_sites < 1 || a.slab_depth < 4 || a.margin < 4)
        throw config_error(origin + ".model: geometry out of range");
      if (j.contains("flow")) {
        const ojson& f = j.at("flow");
        check_keys(f, origin + ".flow", {}, {"u_grid", "u_main", "regulator_offset", "nlam"});
        if (f.contains("u_grid")) a.u_grid = need_number_array(f, origin + ".flow", "u_grid");
        a.u_main = number_or(f, origin + ".flow", "u_main", a.u_main);
        a.regulator_offset =
            static_cast<int>(int_or(f, origin + ".flow", "regulator_offset", a.regulator_offset));
        a.nlam = static_cast<int>(int_or(f, origin + ".flow", "nlam", a.nlam));
      }
      if (j.contains("relative")) {
        const ojson& r = j.at("relative");
        check_keys(r, origin + ".relative", {},
                   {"enabled", "path_tol", "path_max_nodes", "horizon_tol", "integrand_samples"});
        if (r.contains("enabled")) {
          if (!r.at("enabled").is_boolean())
            throw config_error(origin + ".relative.enabled: expected a boolean");
          a.relative_enabled = r.at("enabled").get<bool>();
        }
        a.path_tol = number_or(r, origin + ".relative", "path_tol", a.path_tol);
        a.path_max_nodes =
            static_cast<int>(int_or(r, origin + ".relative", "path_max_nodes", a.path_max_nodes));
        a.horizon_tol = number_or(r, origin + ".relative", "horizon_tol", a.horizon_tol);
        a.integrand_samples = static_cast<int>(
            int_or(r, origin + ".relative", "integrand_samples", a.integrand_samples));
      }
      if (a.u_grid.empty()) throw config_error(origin + ".flow.u_grid: expected at least one value");
      sc.aps = a;
    } else if (sc.kind == "flux_torus_area") {
      FluxScenario f;
      check_keys(model, origin + ".model", {"cases"}, {"t1", "t2", "drop_tol", "scan_grid"});
      const ojson& cases = need(model, origin + ".model", "cases");
      if (!cases.is_array() || cases.empty())
        throw config_error(origin + ".model.cases: expected a nonempty array");
      int ci = 0;
      for (const auto& c : cases) {
        const std::string cw = origin + ".model.cases[" + std::to_string(ci++) + "]";
        check_keys(c, cw, {"p", "q", "grid"});
        FluxCase fc;
        fc.p = static_cast<int>(need_int(c, cw, "p"));
        fc.q = static_cast<int>(need_int(c, cw, "q"));
        fc.grid = static_cast<int>(need_int(c, cw, "grid"));
        if (fc.q < 2 || fc.grid < 4 || (fc.grid & (fc.grid - 1)) != 0)
          throw config_error(cw + ": q must be >= 2 and grid a power of two >= 4");
        f.cases.push_back(fc);
      }
      f.t1 = number_or(model, origin + ".model", "t1", f.t1);
      f.t2 = number_or(model, origin + ".model", "t2", f.t2);
      f.drop_tol = number_or(model, origin + ".model", "drop_tol", f.drop_tol);
      f.scan_grid = static_cast<int>(int_or(model, origin + ".model", "scan_grid", f.scan_grid));
      sc.flux = f;
    } else {
      throw config_error(origin + ".kind: unknown scenario kind \"" + sc.kind +
                         "\" (expected aps_slab_degree0 or flux_torus_area)");
    }
    return sc;
  }
};

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

struct PassEntry {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// The per-scenario result envelope.  Field groups are insertion-ordered
// name/number lists so emission order is exactly the order the driver filled
// them in, run after run.
struct IndexReport {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::string constants_version;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::pair<std::string, double>> errors;
  std::vector<std::pair<std::string, double>> oracles;
  std::vector<PassEntry> pass;

  void add_value(const std::string& k, double v) { values.emplace_back(k, v); }
  void add_error(const std::string& k, double v) { errors.emplace_back(k, v); }
  void add_oracle(const std::string& k, double v) { oracles.emplace_back(k, v); }
  void add_check(const std::string& name, double measured, double threshold) {
    pass.push_back({name, measured, threshold, measured < threshold});
  }
  // integer-valued checks (exact equality demanded)
  void add_exact_check(const std::string& name, double measured) {
    pass.push_back({name, measured, 0.5, std::abs(measured) < 0.5});
  }

  bool all_pass() const {
    for (const auto& p : pass)
      if (!p.pass) return false;
    return true;
  }

  ojson to_json() const {
    ojson j;
    j["schema"] = kReportSchemaId;
    j["scenario_id"] = scenario_id;
    j["seed"] = seed;
    j["constants_version"] = constants_version;
    ojson jv = ojson::object();
    for (const auto& [k, v] : values) jv[k] = v;
    j["values"] = std::move(jv);
    ojson je = ojson::object();
    for (const auto& [k, v] : errors) je[k] = v;
    j["errors"] = std::move(je);
    ojson jo = ojson::object();
    for (const auto& [k, v] : oracles) jo[k] = v;
    j["oracles"] = std::move(jo);
    ojson jp = ojson::array();
    for (const auto& p : pass) {
      ojson e;
      e["name"] = p.name;
      e["measured"] = p.measured;
      e["threshold"] = p.threshold;
      e["pass"] = p.pass;
      jp.push_back(std::move(e));
    }
    j["pass"] = std::move(jp);
    return j;
  }
};

inline std::string dump_json(const ojson& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// minimal structural schema validation
// ---------------------------------------------------------------------------

// Validate a document against the shipped report schema.  Supports exactly
// the keywords that schema uses: type, const, required, properties,
// additionalProperties (boolean or schema), and items.
inline void validate_against_schema(const ojson& doc, const ojson& schema,
                                    const std::string& where = "$") {
  if (!schema.is_object()) throw config_error(where + ": schema node must be an object");
  if (schema.contains("type")) {
    const std::string t = schema.at("type").get<std::string>();
    bool ok = false;
    if (t == "object") ok = doc.is_object();
    else if (t == "array") ok = doc.is_array();
    else if (t == "string") ok = doc.is_string();
    else if (t == "number") ok = doc.is_number();
    else if (t == "integer") ok = doc.is_number_integer();
    else if (t == "boolean") ok = doc.is_boolean();
    else throw config_error(where + ": schema uses unsupported type \"" + t + "\"");
    if (!ok) throw config_error(where + ": expected type " + t);
  }
  if (schema.contains("const") && doc != schema.at("const"))
    throw config_error(where + ": value does not match the schema constant");
  if (doc.is_object()) {
    if (schema.contains("required"))
      for (const auto& r : schema.at("required"))
        if (!doc.contains(r.get<std::string>()))
          throw config_error(where + ": missing required member \"" + r.get<std::string>() + "\"");
    const bool has_props = schema.contains("properties");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (has_props && schema.at("properties").contains(it.key())) {
        validate_against_schema(it.value(), schema.at("properties").at(it.key()),
                                where + "." + it.key());
      } else if (schema.contains("additionalProperties")) {
        const ojson& ap = schema.at("additionalProperties");
        if (ap.is_boolean()) {
          if (!ap.get<bool>())
            throw config_error(where + ": unexpected member \"" + it.key() + "\"");
        } else {
          validate_against_schema(it.value(), ap, where + "." + it.key());
        }
      }
    }
  }
  if (doc.is_array() && schema.contains("items")) {
    int i = 0;
    for (const auto& el : doc)
      validate_against_schema(el, schema.at("items"), where + "[" + std::to_string(i++) + "]");
  }
}

// ---------------------------------------------------------------------------
// shipped report schema
// ---------------------------------------------------------------------------

// Canonical text of the report schema.  The same text is shipped as
// configs/report_schema_v1.json; the driver validates every report against
// this copy before writing it, and the test suite pins the shipped file to
// this string so the two can never drift apart.
inline constexpr const char* kReportSchemaJson = R"json({
  "schema_version": 1,
  "schema_id": "bhi-report-v1",
  "report": {
    "type": "object",
    "required": ["schema", "scenario_id", "seed", "constants_version", "values", "errors", "oracles", "pass"],
    "additionalProperties": false,
    "properties": {
      "schema": {"type": "string", "const": "bhi-report-v1"},
      "scenario_id": {"type": "string"},
      "seed": {"type": "integer"},
      "constants_version": {"type": "string"},
      "values": {"type": "object", "additionalProperties": {"type": "number"}},
      "errors": {"type": "object", "additionalProperties": {"type": "number"}},
      "oracles": {"type": "object", "additionalProperties": {"type": "number"}},
      "pass": {
        "type": "array",
        "items": {
          "type": "object",
          "required": ["name", "measured", "threshold", "pass"],
          "additionalProperties": false,
          "properties": {
            "name": {"type": "string"},
            "measured": {"type": "number"},
            "threshold": {"type": "number"},
            "pass": {"type": "boolean"}
          }
        }
      }
    }
  }
}
)json";

inline ojson report_schema_doc() { return ojson::parse(kReportSchemaJson); }

// Validate a rendered report against the schema; throws config_error on any
// structural mismatch.
inline void validate_report(const ojson& report) {
  validate_against_schema(report, report_schema_doc().at("report"), "report");
}

// ---------------------------------------------------------------------------
// CSV tables
// ---------------------------------------------------------------------------

// Shortest exact decimal round-trip would also work; fixed %.17g is chosen so
// the byte layout is stable and obvious.
inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string to_string() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out << ",";
      out << header[i];
    }
    out << "\n";
    for (const auto& row : rows) {
      if (row.size() != header.size())
        throw precondition_error("CsvTable: row width does not match the header");
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ",";
        out << format_number(row[i]);
      }
      out << "\n";
    }
    return out.str();
  }
};

inline void write_csv_file(const std::string& path, const CsvTable& table) {
  write_text_file(path, table.to_string());
}

}  // namespace bhi
