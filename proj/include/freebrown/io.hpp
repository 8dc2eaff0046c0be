#pragma once

// JSON and CSV exchange formats.
//
// Measure:  {"atom0": 0.0, "atoms": [{"x": 1.0, "w": 1.0}],
//            "density": {"grid": [...], "values": [...]},
//            "law": {"kind": "free_poisson", "rate": 1.0, "scale": 1.0}}
// Every key is optional. A "law" without a density expands to the free
// Poisson grid and keeps the closed form for transforms.
// Quantile CSV: header t,r and one row per node, 12 significant digits.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "freebrown/error.hpp"
#include "freebrown/measures.hpp"
#include "freebrown/numeric.hpp"

namespace freebrown {

using json = nlohmann::json;

inline PositiveRealMeasure measure_from_json(const json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::Validation, "measure JSON must be an object");
    for (const auto& [key, _] : j.items()) {
      if (key != "atom0" && key != "atoms" && key != "density" && key != "law") {
        throw Error(ErrorCode::Validation, "unknown measure key '" + key + "'");
      }
    }
    std::optional<FreePoissonLaw> law;
    if (j.contains("law")) {
      const json& l = j.at("law");
      if (l.value("kind", std::string("free_poisson")) != "free_poisson") {
        throw Error(ErrorCode::Validation, "only free_poisson laws are supported");
      }
      law = FreePoissonLaw{l.value("rate", 1.0), l.value("scale", 1.0)};
      if (!j.contains("density") && !j.contains("atoms") && !j.contains("atom0")) {
        return free_poisson(law->rate, law->scale);
      }
    }
    const double atom0 = j.value("atom0", 0.0);
    std::vector<Atom> atoms;
    if (j.contains("atoms")) {
      for (const json& a : j.at("atoms")) atoms.push_back({a.at("x").get<double>(), a.at("w").get<double>()});
    }
    std::optional<DensityGrid> density;
    if (j.contains("density")) {
      DensityGrid d;
      d.grid = j.at("density").at("grid").get<std::vector<double>>();
      d.values = j.at("density").at("values").get<std::vector<double>>();
      density = std::move(d);
    }
    return PositiveRealMeasure(atom0, std::move(atoms), std::move(density), law);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("malformed measure JSON: ") + e.what());
  }
}

inline json measure_to_json(const PositiveRealMeasure& mu) {
  json j;
  j["atom0"] = mu.atom0();
  j["atoms"] = json::array();
  for (const Atom& a : mu.atoms()) j["atoms"].push_back({{"x", a.x}, {"w", a.w}});
  if (mu.density()) j["density"] = {{"grid", mu.density()->grid}, {"values", mu.density()->values}};
  if (mu.law()) j["law"] = {{"kind", "free_poisson"}, {"rate", mu.law()->rate}, {"scale", mu.law()->scale}};
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Validation, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, "cannot parse " + path + ": " + e.what());
  }
}

inline PositiveRealMeasure read_measure(const std::string& path) { return measure_from_json(read_json_file(path)); }

/// Finite values as numbers, +infinity as the string "inf".
inline json to_json(const ExtendedReal& x) {
  if (x.is_infinite()) return "inf";
  return x.value();
}

/// Radius or null when unbounded.
inline json radius_to_json(double r) {
  if (std::isinf(r)) return nullptr;
  return r;
}

inline std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string quantile_csv(const RadialBrownMeasure& b) {
  std::ostringstream out;
  out << "t,r\n";
  for (std::size_t i = 0; i < b.t_grid().size(); ++i) {
    out << format_g12(b.t_grid()[i]) << ',' << format_g12(b.q_values()[i]) << '\n';
  }
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Validation, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::Validation, "failed writing " + path);
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

/// Path of the JSON sidecar that accompanies a CSV output.
inline std::string sidecar_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  if (p == std::filesystem::path(csv_path)) p += ".meta.json";
  return p.string();
}

}  // namespace freebrown
