#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qam/errors.hpp"
#include "qam/generator.hpp"
#include "qam/lattice.hpp"

namespace qam {

// Generator spec files (JSON):
//   {"kind":"catalog","name":"power","p":2.0,"interval":[1e-6,100.0],"margin":1e-3}
//   {"kind":"affine","alpha":2.0,"beta":3.0,"base":{...}}
//   {"kind":"reflect","base":{...}}
//   {"kind":"piecewise","interval":[a,b],"breakpoints":[0.0],"pieces":[{...},{...}],
//    "scales":[...],"offsets":[...]}          scales/offsets optional
//   {"kind":"join"|"meet","operands":[{...},...],"interval":[a,b],"margin":m}
// Nested specs without an "interval" inherit the enclosing one.

namespace detail {

inline double num(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw DomainError(std::string("spec: missing numeric field '") + key + "'");
  return j[key].get<double>();
}

inline std::optional<Interval> spec_interval(const json& j, const std::optional<Interval>& inherited) {
  if (!j.contains("interval")) return inherited;
  const json& iv = j["interval"];
  if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
    throw DomainError("spec: 'interval' must be [lo, hi]");
  std::optional<double> margin;
  if (j.contains("margin")) margin = num(j, "margin");
  return Interval(iv[0].get<double>(), iv[1].get<double>(), margin);
}

inline Interval need_interval(const std::optional<Interval>& iv, const std::string& kind) {
  if (!iv) throw DomainError("spec: " + kind + " generator needs an 'interval'");
  return *iv;
}

}  // namespace detail

inline Generator parse_generator(const json& j, const std::optional<Interval>& inherited = std::nullopt,
                                 const LatticeOptions& lattice_opts = {}) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw DomainError("spec: generator must be an object with a string 'kind'");
  const std::string kind = j["kind"];
  const std::optional<Interval> iv = detail::spec_interval(j, inherited);

  if (kind == "catalog") {
    const Interval i = detail::need_interval(iv, kind);
    if (!j.contains("name") || !j["name"].is_string()) throw DomainError("spec: catalog entry needs a 'name'");
    const std::string name = j["name"];
    if (name == "identity") return Generator::identity(i);
    if (name == "power") return Generator::power(detail::num(j, "p"), i);
    if (name == "log") return Generator::log(i);
    if (name == "exp-scaled") return Generator::exp_scaled(detail::num(j, "alpha"), i);
    if (name == "sin") return Generator::sin(i);
    if (name == "tan") return Generator::tan(i);
    if (name == "cube") return Generator::cube(i);
    throw DomainError("spec: unknown catalog name '" + name + "'");
  }
  if (kind == "affine") {
    if (!j.contains("base")) throw DomainError("spec: affine needs a 'base'");
    return affine(parse_generator(j["base"], iv, lattice_opts), detail::num(j, "alpha"), detail::num(j, "beta"));
  }
  if (kind == "reflect") {
    if (!j.contains("base")) throw DomainError("spec: reflect needs a 'base'");
    // The base lives on the mirrored interval.
    std::optional<Interval> base_iv;
    if (iv) base_iv = iv->reflected();
    return reflect(parse_generator(j["base"], j.contains("interval") ? base_iv : std::nullopt, lattice_opts));
  }
  if (kind == "piecewise") {
    const Interval i = detail::need_interval(iv, kind);
    if (!j.contains("pieces") || !j["pieces"].is_array()) throw DomainError("spec: piecewise needs 'pieces'");
    PiecewiseData d{i, {}, {}, {}, {}};
    if (j.contains("breakpoints")) d.breakpoints = j["breakpoints"].get<std::vector<double>>();
    for (const auto& p : j["pieces"]) d.pieces.push_back(parse_generator(p, i, lattice_opts));
    if (j.contains("scales")) d.scales = j["scales"].get<std::vector<double>>();
    if (j.contains("offsets")) d.offsets = j["offsets"].get<std::vector<double>>();
    return piecewise(std::move(d));
  }
  if (kind == "join" || kind == "meet") {
    const Interval i = detail::need_interval(iv, kind);
    if (!j.contains("operands") || !j["operands"].is_array()) throw DomainError("spec: " + kind + " needs 'operands'");
    std::vector<Generator> ops;
    for (const auto& o : j["operands"]) ops.push_back(parse_generator(o, i, lattice_opts));
    return kind == "join" ? join(ops, i, lattice_opts).generator : meet(ops, i, lattice_opts).generator;
  }
  throw DomainError("spec: unknown generator kind '" + kind + "'");
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open spec file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DomainError("spec file '" + path + "' is not valid JSON: " + e.what());
  }
}

inline Generator load_generator(const std::string& path, const std::optional<Interval>& override_iv = std::nullopt,
                                const LatticeOptions& lattice_opts = {}) {
  json j = read_json_file(path);
  if (override_iv) {
    j["interval"] = detail::interval_json(*override_iv);
    j["margin"] = override_iv->margin();
  }
  return parse_generator(j, std::nullopt, lattice_opts);
}

inline std::string to_spec_string(const Generator& g) { return g.spec().dump(2); }

}  // namespace qam
