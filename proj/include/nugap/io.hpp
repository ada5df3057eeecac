#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nugap/element.hpp"
#include "nugap/error.hpp"
#include "nugap/factorization.hpp"

namespace nugap::io {

using Json = nlohmann::json;

/// %.9g
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// Value rounded to 9 significant digits for JSON output; non-finite -> null.
inline Json num9(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(fmt(v));
}

inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed JSON: ") + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline double get_number(const Json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorCode::Parse, std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(ErrorCode::Parse, std::string(what) + " must be finite");
  return v;
}

inline Poly get_poly(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::Parse, std::string(what) + " must be a nonempty array of numbers");
  std::vector<double> c;
  for (const Json& v : j) c.push_back(get_number(v, what));
  return Poly(std::move(c));
}

inline PlantDesc plant_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "plant must be a JSON object");
  PlantDesc p;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw Error(ErrorCode::Parse, "name must be a string");
    p.name = j["name"].get<std::string>();
  }
  if (j.contains("tau")) p.tau = get_number(j["tau"], "tau");
  if (!j.contains("num") || !j.contains("den")) throw Error(ErrorCode::Parse, "plant needs num and den");
  p.num = get_poly(j["num"], "num");
  p.den = get_poly(j["den"], "den");
  p.validate();
  return p;
}

inline PlantDesc parse_plant(const std::string& text) { return plant_from_json(parse_json(text)); }

inline Json to_json(const PlantDesc& p) {
  Json j;
  if (!p.name.empty()) j["name"] = p.name;
  j["tau"] = p.tau;
  j["num"] = p.num.coeffs();
  j["den"] = p.den.coeffs();
  return j;
}

inline std::string print_plant(const PlantDesc& p) { return to_json(p).dump(); }

inline LineElement element_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "element must be a JSON object");
  std::vector<Atom> atoms;
  std::vector<RationalTerm> terms;
  if (j.contains("atoms")) {
    if (!j["atoms"].is_array()) throw Error(ErrorCode::Parse, "atoms must be an array");
    for (const Json& a : j["atoms"]) {
      if (!a.is_array() || a.size() != 2) throw Error(ErrorCode::Parse, "atom must be [coeff, shift]");
      atoms.push_back({get_number(a[0], "atom coeff"), get_number(a[1], "atom shift")});
    }
  }
  LineElement out(std::move(atoms), {});
  if (j.contains("terms")) {
    if (!j["terms"].is_array()) throw Error(ErrorCode::Parse, "terms must be an array");
    for (const Json& t : j["terms"]) {
      if (!t.is_object() || !t.contains("num") || !t.contains("den")) throw Error(ErrorCode::Parse, "term needs num and den");
      const double shift = t.contains("shift") ? get_number(t["shift"], "term shift") : 0.0;
      // proper (not only strictly proper) terms are accepted and split
      out = out + LineElement::rational(get_poly(t["num"], "num"), get_poly(t["den"], "den"), shift);
    }
  }
  return out;
}

inline LineElement parse_element(const std::string& text) { return element_from_json(parse_json(text)); }

inline Json to_json(const LineElement& e) {
  Json j;
  j["atoms"] = Json::array();
  for (const Atom& a : e.atoms()) j["atoms"].push_back({a.coeff, a.shift});
  j["terms"] = Json::array();
  for (const RationalTerm& t : e.terms()) j["terms"].push_back({{"num", t.num().coeffs()}, {"den", t.den().coeffs()}, {"shift", t.shift()}});
  return j;
}

}  // namespace nugap::io
