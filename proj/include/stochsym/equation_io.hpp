#pragma once

// Equation documents: {"drift": "<expr>", "sigma": "<expr>", "domain": [a, b]}.
// Domain ends may be numbers, "inf"/"-inf" or null (unbounded); sigma
// defaults to 1 and the domain to the real line.

#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "stochsym/error.hpp"
#include "stochsym/expr.hpp"
#include "stochsym/fp_symmetry.hpp"
#include "stochsym/ito.hpp"

namespace stochsym {

namespace detail {

inline double json_bound(const nlohmann::json& v, double unbounded) {
  if (v.is_null()) return unbounded;
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ValidationError("domain ends must be numbers, \"inf\", \"-inf\" or null");
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline std::string json_string(const nlohmann::json& doc, const char* key, const char* fallback) {
  if (!doc.contains(key)) {
    if (fallback == nullptr) throw ValidationError(std::string("missing field '") + key + "'");
    return fallback;
  }
  const auto& v = doc.at(key);
  if (v.is_number()) return format_number(v.get<double>());
  if (!v.is_string()) throw ValidationError(std::string("field '") + key + "' must be an expression string");
  return v.get<std::string>();
}

}  // namespace detail

inline nlohmann::json bound_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline nlohmann::json interval_to_json(const Interval& iv) {
  return nlohmann::json::array({bound_to_json(iv.lo), bound_to_json(iv.hi)});
}

inline Interval interval_from_json(const nlohmann::json& v) {
  if (!v.is_array() || v.size() != 2) throw ValidationError("domain must be a two-element array");
  return {detail::json_bound(v[0], -std::numeric_limits<double>::infinity()),
          detail::json_bound(v[1], std::numeric_limits<double>::infinity())};
}

inline ItoEquation equation_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("equation document must be a JSON object");
  const Expr f = parse(detail::json_string(doc, "drift", nullptr));
  const Expr s = parse(detail::json_string(doc, "sigma", "1"));
  const Interval dom = doc.contains("domain") ? interval_from_json(doc.at("domain")) : Interval::real_line();
  return ItoEquation::make(f, s, dom);
}

inline ItoEquation load_equation(const std::string& path) {
  return equation_from_json(detail::read_json_file(path));
}

inline nlohmann::json equation_to_json(const ItoEquation& eq) {
  return {{"drift", to_string(eq.f())}, {"sigma", to_string(eq.sigma())}, {"domain", interval_to_json(eq.domain())}};
}

/// Field documents: {"tau": "...", "xi": "...", "phi1": "...", "phi0": "..."};
/// missing components are zero.
inline VectorField field_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("field document must be a JSON object");
  VectorField v;
  v.tau = parse(detail::json_string(doc, "tau", "0"));
  v.xi = parse(detail::json_string(doc, "xi", "0"));
  v.phi1 = parse(detail::json_string(doc, "phi1", "0"));
  v.phi0 = parse(detail::json_string(doc, "phi0", "0"));
  v.label = doc.value("label", std::string("X"));
  return v;
}

inline VectorField load_field(const std::string& path) { return field_from_json(detail::read_json_file(path)); }

inline nlohmann::json field_to_json(const VectorField& v) {
  return {{"label", v.label},
          {"tau", to_string(v.tau)},
          {"xi", to_string(v.xi)},
          {"phi1", to_string(v.phi1)},
          {"phi0", to_string(v.phi0)},
          {"printed", to_string(v)}};
}

}  // namespace stochsym
