// Copyright 2026 The rydark Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rydark/core.hpp"
#include "rydark/dynamics.hpp"
#include "rydark/model.hpp"

namespace rydark {

/// A malformed or inconsistent configuration value. field() is the key (or
/// "[section]"); line() is 0 when the problem is not tied to one line.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string field, int line, const std::string& message)
      : ValidationError(field, line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct ConfigEntry {
  std::string value;
  int line = 0;
};

/// Sectioned key = value document. Maps are ordered so dumps are deterministic.
struct ConfigDocument {
  std::map<std::string, std::map<std::string, ConfigEntry>> sections;

  bool has(const std::string& section) const { return sections.count(section) != 0; }
  bool has(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) != 0;
  }
  const ConfigEntry* find(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }
  void set(const std::string& section, const std::string& key, std::string value) {
    auto& e = sections[section][key];
    e.value = std::move(value);
  }
  void erase(const std::string& section, const std::string& key) {
    auto s = sections.find(section);
    if (s != sections.end()) s->second.erase(key);
  }

  std::string dump() const {
    std::string out;
    for (const auto& [name, keys] : sections) {
      if (!out.empty()) out += "\n";
      out += "[" + name + "]\n";
      for (const auto& [k, e] : keys) out += k + " = " + e.value + "\n";
    }
    return out;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline const std::vector<std::string>& known_sections() {
  static const std::vector<std::string> s = {"atom", "geometry", "run", "sweep"};
  return s;
}

/// Section that owns `key`, or "" for unknown keys. Sweep axes are dynamic.
inline std::string section_of(const std::string& key) {
  static const std::map<std::string, std::string> table = {
      {"omega_R_MHz", "atom"},      {"omega_M_MHz", "atom"},     {"gamma_r_MHz", "atom"},
      {"gamma_r_per_atom_MHz", "atom"}, {"omega_E_MHz", "atom"}, {"kappa_MHz", "atom"},
      {"gamma_s_kHz", "atom"},      {"gamma_r_intr_kHz", "atom"}, {"gamma_d_kHz", "atom"},
      {"dephasing", "atom"},        {"dephasing_mode", "atom"},  {"N", "geometry"},
      {"blockade", "geometry"},     {"positions_um", "geometry"}, {"C6_rr", "geometry"},
      {"C6_ss", "geometry"},        {"C3_rs", "geometry"},       {"V_rr_MHz", "geometry"},
      {"V_ss_MHz", "geometry"},     {"V_rs_MHz", "geometry"},    {"reference_um", "geometry"},
      {"separation_um", "geometry"}, {"spacing_um", "geometry"}, {"perfect_pairs", "geometry"},
      {"model", "run"},             {"t_end_us", "run"},         {"dt_out_us", "run"},
      {"observables", "run"},       {"initial", "run"},          {"method", "run"},
      {"rtol", "run"},              {"atol", "run"}};
  auto it = table.find(key);
  return it == table.end() ? std::string() : it->second;
}

/// Parses "[section]" headers, "key = value" lines and comments.
inline ConfigDocument parse_config(std::istream& in) {
  ConfigDocument doc;
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    // '#' starts a comment anywhere; ';' only at the start of a line since
    // positions_um uses it as a separator.
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty() || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("[section]", line_no, "unterminated section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const auto& s : known_sections()) known = known || s == section;
      if (!known) throw ConfigError("[" + section + "]", line_no, "unknown section [" + section + "]");
      if (doc.has(section)) throw ConfigError("[" + section + "]", line_no, "duplicate section [" + section + "]");
      doc.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("syntax", line_no, "expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("syntax", line_no, "empty key");
    if (section.empty()) throw ConfigError(key, line_no, "key outside of any section");
    auto& keys = doc.sections[section];
    if (keys.count(key)) throw ConfigError(key, line_no, "duplicate key");
    keys[key] = ConfigEntry{value, line_no};
  }
  return doc;
}

inline ConfigDocument parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ConfigDocument parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", 0, "cannot open '" + path + "'");
  return parse_config(in);
}

enum class ModelKind { restricted, restricted_excited, full3, full4, composite, hybrid };

inline const char* to_string(ModelKind m) {
  switch (m) {
    case ModelKind::restricted: return "restricted";
    case ModelKind::restricted_excited: return "restricted-e";
    case ModelKind::full3: return "full-3";
    case ModelKind::full4: return "full-4";
    case ModelKind::composite: return "composite";
    case ModelKind::hybrid: return "hybrid";
  }
  return "?";
}

enum class BlockadeMode { perfect, finite };

/// Geometry in internal units. Couplings come from, in order of precedence:
/// positions with power-law coefficients, or uniform V values. For composite
/// models V_* are the strengths at reference_um and the cross couplings
/// follow the power laws from there.
struct GeometrySpec {
  std::size_t N = 0;
  BlockadeMode blockade = BlockadeMode::perfect;
  std::vector<Position> positions;              // um
  std::optional<CouplingCoefficients> coefficients;  // rad/us um^n
  std::optional<double> V_rr, V_ss, V_rs;       // rad/us
  std::optional<double> reference_um;
  std::optional<double> separation_um;
  double spacing_um = 0.1;
  std::vector<std::pair<std::size_t, std::size_t>> perfect_pairs;  // 0-based
};

struct SweepAxis {
  std::string section;
  std::string key;
  std::vector<double> values;
};

struct ScenarioConfig {
  AtomScheme scheme;
  ModelKind model = ModelKind::restricted;
  GeometrySpec geometry;
  double t_end = 20.0;   // us
  double dt_out = 0.01;  // us
  std::vector<std::string> observables = {"P_D", "purity"};
  std::string initial = "G";
  std::optional<Method> method;
  std::optional<double> rtol, atol;
  std::vector<SweepAxis> sweep;
};

namespace detail {

class Reader {
 public:
  explicit Reader(const ConfigDocument& doc) : doc_(doc) {}

  const ConfigEntry* entry(const std::string& key) {
    return doc_.find(section_of(key), key);
  }

  std::optional<double> number(const std::string& key, bool allow_negative = false) {
    const ConfigEntry* e = entry(key);
    if (!e) return std::nullopt;
    return parse_number(key, e->value, e->line, allow_negative);
  }

  std::optional<std::string> text(const std::string& key) {
    const ConfigEntry* e = entry(key);
    if (!e) return std::nullopt;
    if (e->value.empty()) throw ConfigError(key, e->line, "empty value");
    return e->value;
  }

  std::vector<double> numbers(const std::string& key, const std::string& value, int line, bool allow_negative) {
    std::vector<double> out;
    for (const auto& tok : split(value, ',')) out.push_back(parse_number(key, tok, line, allow_negative));
    return out;
  }

  static double parse_number(const std::string& key, std::string_view tok, int line, bool allow_negative) {
    tok = trim(tok);
    double v = 0.0;
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (tok.empty() || ec != std::errc() || ptr != end)
      throw ConfigError(key, line, "'" + std::string(tok) + "' is not a number");
    if (!std::isfinite(v)) throw ConfigError(key, line, "value must be finite");
    if (!allow_negative && v < 0.0) throw ConfigError(key, line, "value must be >= 0");
    return v;
  }

  int line_of(const std::string& key) const {
    const auto* e = doc_.find(section_of(key), key);
    return e ? e->line : 0;
  }

  /// Every key present in the document must have been consumed.
  void reject_unknown() const {
    for (const auto& [sec, keys] : doc_.sections) {
      if (sec == "sweep") continue;
      for (const auto& [k, e] : keys) {
        const std::string owner = section_of(k);
        if (owner.empty()) throw ConfigError(k, e.line, "unknown key in [" + sec + "]");
        if (owner != sec) throw ConfigError(k, e.line, "key belongs in [" + owner + "], not [" + sec + "]");
      }
    }
  }

 private:
  const ConfigDocument& doc_;
};

inline ModelKind parse_model(const std::string& s, int line) {
  if (s == "restricted") return ModelKind::restricted;
  if (s == "restricted-e" || s == "restricted-4") return ModelKind::restricted_excited;
  if (s == "full-3" || s == "full-3-level") return ModelKind::full3;
  if (s == "full-4" || s == "full-4-level") return ModelKind::full4;
  if (s == "composite" || s == "composite-restricted") return ModelKind::composite;
  if (s == "hybrid") return ModelKind::hybrid;
  throw ConfigError("model", line,
                    "unknown model '" + s + "' (expected restricted, restricted-e, full-3, full-4, composite, hybrid)");
}

}  // namespace detail

/// Keys that take text or lists and so cannot be swept numerically.
inline bool is_numeric_key(const std::string& key) {
  static const std::vector<std::string> text = {"gamma_r_per_atom_MHz", "dephasing", "dephasing_mode", "blockade",
                                                "positions_um",         "perfect_pairs"};
  return std::find(text.begin(), text.end(), key) == text.end();
}

/// [sweep] axes: axis / values, axis_2 / values_2, ... in order. Empty when
/// the document has no [sweep] section.
inline std::vector<SweepAxis> parse_sweep_axes(const ConfigDocument& doc) {
  std::vector<SweepAxis> axes;
  if (!doc.has("sweep")) return axes;
  const auto& keys = doc.sections.at("sweep");
  for (int k = 1;; ++k) {
    const std::string suffix = k == 1 ? "" : "_" + std::to_string(k);
    auto a = keys.find("axis" + suffix);
    auto v = keys.find("values" + suffix);
    if (a == keys.end() && v == keys.end()) break;
    if (a == keys.end()) throw ConfigError("axis" + suffix, v->second.line, "values without an axis");
    if (v == keys.end()) throw ConfigError("values" + suffix, a->second.line, "axis without values");
    SweepAxis axis;
    axis.key = a->second.value;
    axis.section = section_of(axis.key);
    if (axis.section.empty() || axis.section == "run" || !is_numeric_key(axis.key))
      throw ConfigError("axis" + suffix, a->second.line, "'" + axis.key + "' is not a sweepable numeric key");
    if (detail::trim(v->second.value).empty()) throw ConfigError("values" + suffix, v->second.line, "empty sweep axis");
    for (const auto& tok : detail::split(v->second.value, ','))
      axis.values.push_back(detail::Reader::parse_number("values" + suffix, tok, v->second.line, true));
    for (const auto& prev : axes)
      if (prev.key == axis.key) throw ConfigError("axis" + suffix, a->second.line, "axis repeated");
    axes.push_back(std::move(axis));
  }
  for (const auto& [k, e] : keys) {
    bool ok = false;
    for (std::size_t i = 1; i <= axes.size(); ++i) {
      const std::string suffix = i == 1 ? "" : "_" + std::to_string(i);
      ok = ok || k == "axis" + suffix || k == "values" + suffix;
    }
    if (!ok) throw ConfigError(k, e.line, "unknown key in [sweep]");
  }
  if (axes.empty()) throw ConfigError("axis", 0, "[sweep] needs axis and values");
  return axes;
}

/// Converts user-facing values (MHz / kHz in the nu = omega / 2pi convention,
/// um, us) into a validated ScenarioConfig in rad/us and us.
inline ScenarioConfig normalize_units(const ConfigDocument& doc) {
  for (const char* required : {"atom", "geometry", "run"})
    if (!doc.has(required))
      throw ConfigError(std::string("[") + required + "]", 0, std::string("missing section [") + required + "]");
  detail::Reader rd(doc);
  rd.reject_unknown();
  ScenarioConfig cfg;

  // [atom]
  AtomScheme& s = cfg.scheme;
  s.omega_R = from_mhz(rd.number("omega_R_MHz").value_or(0.0));
  s.omega_M = from_mhz(rd.number("omega_M_MHz").value_or(0.0));
  if (auto g = rd.number("gamma_r_MHz")) s.gamma_r = from_mhz(*g);
  if (const auto* e = rd.entry("gamma_r_per_atom_MHz"))
    for (double g : rd.numbers("gamma_r_per_atom_MHz", e->value, e->line, false)) s.gamma_r_per_atom.push_back(from_mhz(g));
  const auto omega_E = rd.number("omega_E_MHz");
  const auto kappa = rd.number("kappa_MHz");
  if (omega_E.has_value() != kappa.has_value())
    throw ConfigError(omega_E ? "kappa_MHz" : "omega_E_MHz", rd.line_of(omega_E ? "omega_E_MHz" : "kappa_MHz"),
                      "omega_E_MHz and kappa_MHz must be given together");
  if (omega_E) {
    if (s.gamma_r || !s.gamma_r_per_atom.empty())
      throw ConfigError("gamma_r_MHz", rd.line_of("gamma_r_MHz"),
                        "give either gamma_r_MHz or the engineered omega_E_MHz + kappa_MHz, not both");
    s.engineered = EngineeredDecay{from_mhz(*omega_E), from_mhz(*kappa)};
  }
  s.gamma_s = from_khz(rd.number("gamma_s_kHz").value_or(0.0));
  s.gamma_r_intrinsic = from_khz(rd.number("gamma_r_intr_kHz").value_or(0.0));
  s.gamma_d = from_khz(rd.number("gamma_d_kHz").value_or(0.0));
  if (auto d = rd.text("dephasing")) {
    if (*d == "both") s.dephasing_target = DephasingTarget::both;
    else if (*d == "r") s.dephasing_target = DephasingTarget::r_only;
    else if (*d == "s") s.dephasing_target = DephasingTarget::s_only;
    else throw ConfigError("dephasing", rd.line_of("dephasing"), "expected both, r or s");
  }
  if (auto d = rd.text("dephasing_mode")) {
    if (*d == "per_atom") s.dephasing_mode = DephasingMode::per_atom;
    else if (*d == "collective") s.dephasing_mode = DephasingMode::collective;
    else throw ConfigError("dephasing_mode", rd.line_of("dephasing_mode"), "expected per_atom or collective");
  }

  // [run]
  const auto model_text = rd.text("model");
  if (!model_text) throw ConfigError("model", 0, "[run] needs a model");
  cfg.model = detail::parse_model(*model_text, rd.line_of("model"));
  const bool four = cfg.model == ModelKind::restricted_excited || cfg.model == ModelKind::full4;
  if (four && !s.four_level())
    throw ConfigError("model", rd.line_of("model"), std::string(to_string(cfg.model)) +
                                                        " needs the engineered omega_E_MHz + kappa_MHz block");
  if (!four && s.four_level())
    throw ConfigError("model", rd.line_of("model"), std::string(to_string(cfg.model)) +
                                                        " is a 3-level model; use gamma_r_MHz instead of omega_E/kappa");
  cfg.t_end = rd.number("t_end_us").value_or(cfg.t_end);
  cfg.dt_out = rd.number("dt_out_us").value_or(cfg.dt_out);
  if (!(cfg.dt_out > 0.0)) throw ConfigError("dt_out_us", rd.line_of("dt_out_us"), "must be > 0");
  if (auto o = rd.text("observables")) cfg.observables = detail::split(*o, ',');
  for (const auto& o : cfg.observables)
    if (o.empty()) throw ConfigError("observables", rd.line_of("observables"), "empty observable name");
  if (auto i = rd.text("initial")) cfg.initial = *i;
  if (auto m = rd.text("method")) {
    try {
      cfg.method = parse_method(*m);
    } catch (const ValidationError& e) {
      throw ConfigError("method", rd.line_of("method"), e.what());
    }
  }
  cfg.rtol = rd.number("rtol");
  cfg.atol = rd.number("atol");

  // [geometry]
  GeometrySpec& g = cfg.geometry;
  if (auto n = rd.number("N")) {
    if (*n < 1 || *n != std::floor(*n)) throw ConfigError("N", rd.line_of("N"), "must be a positive integer");
    g.N = static_cast<std::size_t>(*n);
  }
  if (const auto* e = rd.entry("positions_um")) {
    for (const auto& atom : detail::split(e->value, ';')) {
      const auto xyz = rd.numbers("positions_um", atom, e->line, true);
      if (xyz.empty() || xyz.size() > 3) throw ConfigError("positions_um", e->line, "each atom needs 1 to 3 coordinates");
      g.positions.push_back({xyz[0], xyz.size() > 1 ? xyz[1] : 0.0, xyz.size() > 2 ? xyz[2] : 0.0});
    }
    if (g.N && g.N != g.positions.size())
      throw ConfigError("positions_um", e->line, "lists " + std::to_string(g.positions.size()) + " atoms but N = " +
                                                     std::to_string(g.N));
    g.N = g.positions.size();
  }
  if (g.N == 0) throw ConfigError("N", 0, "[geometry] needs N or positions_um");
  if (auto b = rd.text("blockade")) {
    if (*b == "perfect") g.blockade = BlockadeMode::perfect;
    else if (*b == "finite") g.blockade = BlockadeMode::finite;
    else throw ConfigError("blockade", rd.line_of("blockade"), "expected perfect or finite");
  } else if (cfg.model == ModelKind::full3 || cfg.model == ModelKind::full4) {
    g.blockade = BlockadeMode::finite;
  }
  const auto c6rr = rd.number("C6_rr"), c6ss = rd.number("C6_ss"), c3rs = rd.number("C3_rs");
  if (c6rr || c6ss || c3rs)
    g.coefficients = CouplingCoefficients{from_mhz(c6rr.value_or(0.0)), from_mhz(c6ss.value_or(0.0)),
                                          from_mhz(c3rs.value_or(0.0))};
  if (auto v = rd.number("V_rr_MHz")) g.V_rr = from_mhz(*v);
  if (auto v = rd.number("V_ss_MHz")) g.V_ss = from_mhz(*v);
  if (auto v = rd.number("V_rs_MHz")) g.V_rs = from_mhz(*v);
  g.reference_um = rd.number("reference_um");
  g.separation_um = rd.number("separation_um");
  if (auto sp = rd.number("spacing_um")) g.spacing_um = *sp;
  if (const auto* e = rd.entry("perfect_pairs")) {
    for (const auto& pair : detail::split(e->value, ',')) {
      const auto ij = detail::split(pair, '-');
      if (ij.size() != 2) throw ConfigError("perfect_pairs", e->line, "pairs are written i-j with 1-based indices");
      const double i = detail::Reader::parse_number("perfect_pairs", ij[0], e->line, false);
      const double j = detail::Reader::parse_number("perfect_pairs", ij[1], e->line, false);
      if (i < 1 || j < 1 || i > double(g.N) || j > double(g.N) || i == j || i != std::floor(i) || j != std::floor(j))
        throw ConfigError("perfect_pairs", e->line, "invalid pair '" + pair + "'");
      g.perfect_pairs.emplace_back(static_cast<std::size_t>(i) - 1, static_cast<std::size_t>(j) - 1);
    }
  }
  if (g.coefficients && (g.V_rr || g.V_ss || g.V_rs))
    throw ConfigError("C6_ss", rd.line_of("C6_ss"), "give either C6/C3 coefficients or V_*_MHz values, not both");

  // Model-specific consistency.
  const bool any_v = g.V_rr || g.V_ss || g.V_rs || g.coefficients;
  switch (cfg.model) {
    case ModelKind::restricted:
    case ModelKind::restricted_excited:
      if (g.blockade != BlockadeMode::perfect)
        throw ConfigError("blockade", rd.line_of("blockade"), "restricted models assume perfect blockade");
      if (any_v) throw ConfigError("geometry", 0, "interaction values have no effect on a restricted model");
      break;
    case ModelKind::full3:
    case ModelKind::full4:
      if (g.blockade == BlockadeMode::finite && !any_v)
        throw ConfigError("geometry", 0, "finite blockade needs V_*_MHz values or C6/C3 coefficients");
      if (g.coefficients && g.positions.empty())
        throw ConfigError("positions_um", 0, "C6/C3 coefficients need positions_um");
      if (g.reference_um && g.positions.empty())
        throw ConfigError("reference_um", rd.line_of("reference_um"), "reference_um needs positions_um");
      break;
    case ModelKind::hybrid:
      if (g.V_rr || g.V_ss || g.coefficients)
        throw ConfigError("geometry", 0, "the hybrid model excludes rr / ss pairs; only V_rs_MHz applies");
      break;
    case ModelKind::composite:
      if (!g.separation_um) throw ConfigError("separation_um", 0, "composite model needs separation_um");
      if (!(g.spacing_um > 0.0)) throw ConfigError("spacing_um", rd.line_of("spacing_um"), "must be > 0");
      if (!any_v) throw ConfigError("geometry", 0, "composite model needs V_*_MHz values or C6/C3 coefficients");
      break;
  }

  cfg.sweep = parse_sweep_axes(doc);
  s.validate();
  return cfg;
}

/// Inverse of normalize_units: user-facing document for a resolved config.
inline ConfigDocument denormalize(const ScenarioConfig& cfg) {
  ConfigDocument doc;
  auto num = [&](const std::string& key, double v) { doc.set(section_of(key), key, detail::format_double(v)); };
  const AtomScheme& s = cfg.scheme;
  num("omega_R_MHz", to_mhz(s.omega_R));
  num("omega_M_MHz", to_mhz(s.omega_M));
  if (s.gamma_r) num("gamma_r_MHz", to_mhz(*s.gamma_r));
  if (!s.gamma_r_per_atom.empty()) {
    std::string list;
    for (double g : s.gamma_r_per_atom) list += (list.empty() ? "" : ", ") + detail::format_double(to_mhz(g));
    doc.set("atom", "gamma_r_per_atom_MHz", list);
  }
  if (s.engineered) {
    num("omega_E_MHz", to_mhz(s.engineered->omega_E));
    num("kappa_MHz", to_mhz(s.engineered->kappa));
  }
  num("gamma_s_kHz", to_khz(s.gamma_s));
  num("gamma_r_intr_kHz", to_khz(s.gamma_r_intrinsic));
  num("gamma_d_kHz", to_khz(s.gamma_d));
  doc.set("atom", "dephasing",
          s.dephasing_target == DephasingTarget::both ? "both" : s.dephasing_target == DephasingTarget::r_only ? "r" : "s");
  doc.set("atom", "dephasing_mode", s.dephasing_mode == DephasingMode::per_atom ? "per_atom" : "collective");

  const GeometrySpec& g = cfg.geometry;
  num("N", static_cast<double>(g.N));
  doc.set("geometry", "blockade", g.blockade == BlockadeMode::perfect ? "perfect" : "finite");
  if (!g.positions.empty()) {
    std::string list;
    for (const auto& p : g.positions)
      list += (list.empty() ? "" : "; ") + detail::format_double(p[0]) + ", " + detail::format_double(p[1]) + ", " +
              detail::format_double(p[2]);
    doc.set("geometry", "positions_um", list);
  }
  if (g.coefficients) {
    num("C6_rr", to_mhz(g.coefficients->C6_rr));
    num("C6_ss", to_mhz(g.coefficients->C6_ss));
    num("C3_rs", to_mhz(g.coefficients->C3_rs));
  }
  if (g.V_rr) num("V_rr_MHz", to_mhz(*g.V_rr));
  if (g.V_ss) num("V_ss_MHz", to_mhz(*g.V_ss));
  if (g.V_rs) num("V_rs_MHz", to_mhz(*g.V_rs));
  if (g.reference_um) num("reference_um", *g.reference_um);
  if (g.separation_um) num("separation_um", *g.separation_um);
  if (cfg.model == ModelKind::composite) num("spacing_um", g.spacing_um);
  if (!g.perfect_pairs.empty()) {
    std::string list;
    for (auto [i, j] : g.perfect_pairs) list += (list.empty() ? "" : ", ") + std::to_string(i + 1) + "-" + std::to_string(j + 1);
    doc.set("geometry", "perfect_pairs", list);
  }

  doc.set("run", "model", to_string(cfg.model));
  num("t_end_us", cfg.t_end);
  num("dt_out_us", cfg.dt_out);
  std::string obs;
  for (const auto& o : cfg.observables) obs += (obs.empty() ? "" : ", ") + o;
  doc.set("run", "observables", obs);
  doc.set("run", "initial", cfg.initial);
  if (cfg.method) doc.set("run", "method", to_string(*cfg.method));
  if (cfg.rtol) num("rtol", *cfg.rtol);
  if (cfg.atol) num("atol", *cfg.atol);

  for (std::size_t i = 0; i < cfg.sweep.size(); ++i) {
    const std::string suffix = i == 0 ? "" : "_" + std::to_string(i + 1);
    doc.set("sweep", "axis" + suffix, cfg.sweep[i].key);
    std::string list;
    for (double v : cfg.sweep[i].values) list += (list.empty() ? "" : ", ") + detail::format_double(v);
    doc.set("sweep", "values" + suffix, list);
  }
  return doc;
}

}  // namespace rydark
