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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rydark/scenarios.hpp"

namespace rydark::cli {

namespace fs = std::filesystem;

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"fig2",      "fig2-inset", "fig3", "fig4", "n20-w",
                                                 "n20-equal", "full-vs-restricted", "custom"};
  return names;
}

struct Options {
  std::string scenario;
  std::string config;
  std::string out_dir = ".";
  std::size_t parallelism = 1;
  std::optional<double> rtol, atol;
  std::optional<std::string> method;
  bool dump_operators = false;
};

// CSV layout: header row, comma separated, LF endings, every number printed
// with %.17g. Column order is the table's; trajectories start with t_us.
inline void write_csv(const fs::path& path, const Table& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  for (std::size_t c = 0; c < t.columns.size(); ++c) f << (c ? "," : "") << t.columns[c];
  f << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) f << (c ? "," : "") << detail::format_double(row[c]);
    f << '\n';
  }
}

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

inline void write_failures(const fs::path& path, const ScenarioResult& r) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  for (const auto& a : r.axis_names) f << a << ",";
  f << "error\n";
  for (const auto& fail : r.failures) {
    for (double v : fail.axis_values) f << detail::format_double(v) << ",";
    f << csv_quote(fail.message) << '\n';
  }
}

/// Metadata document: key = value lines grouped in sections, read back with
/// read_metadata.
inline void write_metadata(const fs::path& path, const ScenarioResult& r, const std::string& command) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << "# " << kVersion << "\n";
  f << "[tool]\nversion = " << kVersion << "\ncommand = " << command << "\nscenario = " << r.id << "\n";
  f << "\n[parameters]\n";
  for (const auto& [k, v] : r.parameters) f << k << " = " << v << "\n";
  f << "\n[summary]\n";
  for (const auto& [k, v] : r.summary) f << k << " = " << v << "\n";
  f << "\n[integrator]\n";
  f << "trajectories = " << r.trajectories << "\n";
  f << "accepted_steps = " << r.stats.accepted << "\n";
  f << "rejected_steps = " << r.stats.rejected << "\n";
  f << "rhs_evaluations = " << r.stats.rhs_evaluations << "\n";
  f << "exponentials = " << r.stats.exponentials << "\n";
  f << "\n[diagnostics]\n";
  f << "max_trace_error = " << detail::format_double(r.worst.trace_error) << "\n";
  f << "max_hermiticity_error = " << detail::format_double(r.worst.hermiticity_error) << "\n";
  f << "min_eigenvalue = " << detail::format_double(r.worst.min_eigenvalue) << "\n";
  f << "\n[outputs]\n";
  for (const auto& t : r.tables) f << t.name << " = " << t.name << ".csv\n";
  if (!r.failures.empty()) f << "failures = " << r.id << "_failures.csv\n";
  f << "\n[runtime]\nwall_seconds = " << detail::format_double(r.wall_seconds) << "\n";
}

/// Reads a metadata document back into sections of key = value entries.
inline ConfigDocument read_metadata(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  ConfigDocument doc;
  std::string section;
  for (std::string line; std::getline(in, line);) {
    const std::string t(rydark::detail::trim(line));
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = t.substr(1, t.size() - 2);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    doc.set(section, std::string(rydark::detail::trim(t.substr(0, eq))),
            std::string(rydark::detail::trim(t.substr(eq + 1))));
  }
  return doc;
}

inline void write_bundle(const fs::path& dir, const ScenarioResult& r, const std::string& command) {
  fs::create_directories(dir);
  for (const auto& t : r.tables) write_csv(dir / (t.name + ".csv"), t);
  if (!r.failures.empty()) write_failures(dir / (r.id + "_failures.csv"), r);
  write_metadata(dir / (r.id + "_meta.txt"), r, command);
}

inline void dump_operators(const fs::path& dir, const std::string& id, const BuiltModel& m) {
  fs::create_directories(dir);
  std::ofstream h(dir / (id + "_hamiltonian.txt"), std::ios::binary);
  write_operator_dump(h, m.hamiltonian.matrix);
  std::ofstream l(dir / (id + "_liouvillian.txt"), std::ios::binary);
  write_operator_dump(l, m.liouvillian.sparse());
}

namespace detail {

// Command-line integrator flags are written into [run] so they take
// precedence over the file; the scenario default only fills gaps.
inline void apply_flags(ConfigDocument& doc, const Options& o) {
  if (o.method) doc.set("run", "method", *o.method);
  if (o.rtol) doc.set("run", "rtol", rydark::detail::format_double(*o.rtol));
  if (o.atol) doc.set("run", "atol", rydark::detail::format_double(*o.atol));
}

inline IntegratorSettings scenario_settings(const std::string& scenario, const Options& o) {
  IntegratorSettings s;
  s.method = o.method ? parse_method(*o.method) : default_method(scenario);
  if (o.rtol) s.rtol = *o.rtol;
  if (o.atol) s.atol = *o.atol;
  s.validate();
  return s;
}

inline IntegratorSettings default_settings(const std::string& scenario) {
  IntegratorSettings s;
  s.method = default_method(scenario);
  return s;
}

inline ConfigDocument load(const Options& o) {
  if (o.config.empty()) throw ValidationError("--config", "a configuration file is required");
  ConfigDocument doc = parse_config_file(o.config);
  apply_flags(doc, o);
  return doc;
}

}  // namespace detail

inline ScenarioResult run_scenario(const Options& o) {
  const std::string& s = o.scenario;
  if (s == "custom") {
    ConfigDocument doc = detail::load(o);
    const ScenarioConfig cfg = normalize_units(doc);
    if (o.dump_operators) dump_operators(o.out_dir, "custom", build_model(cfg));
    return run_custom(cfg, detail::default_settings(s));
  }
  if (!o.config.empty())
    throw ValidationError("--config", "scenario " + s + " is pre-registered; --config applies to run custom");
  if (o.dump_operators) throw ValidationError("--dump-operators", "only available for custom, steady and sweep");
  const IntegratorSettings settings = detail::scenario_settings(s, o);
  if (s == "fig2") return run_fig2({}, settings);
  if (s == "fig2-inset") return run_fig2_inset({}, settings);
  if (s == "fig3") return run_fig3({}, settings);
  if (s == "fig4") return run_fig4({}, settings);
  if (s == "n20-w") return run_realistic_n20({}, settings);
  if (s == "n20-equal") return run_realistic_n20({.variant = N20Variant::equal_weight}, settings);
  if (s == "full-vs-restricted") return run_full_vs_restricted({}, settings);
  throw ValidationError("scenario", "unknown scenario " + s);
}

inline ScenarioResult run_steady_command(const Options& o) {
  const ScenarioConfig cfg = normalize_units(detail::load(o));
  if (o.dump_operators) dump_operators(o.out_dir, "steady", build_model(cfg));
  return run_steady(cfg);
}

inline ScenarioResult run_sweep_command(const Options& o) {
  const ConfigDocument doc = detail::load(o);
  if (o.dump_operators) {
    ConfigDocument first = doc;
    first.sections.erase("sweep");
    for (const auto& a : parse_sweep_axes(doc))
      first.set(a.section, a.key, rydark::detail::format_double(a.values.front()));
    dump_operators(o.out_dir, "sweep", build_model(normalize_units(first)));
  }
  return sweep(doc, detail::default_settings("sweep"), o.parallelism);
}

inline std::string error_line(const ValidationError& e) {
  std::string line = "rydark: error: ";
  line += e.what();
  const std::string sec = rydark::section_of(e.field());
  if (!sec.empty()) line += " (section [" + sec + "])";
  return line;
}

/// Entry point. Exit status: 0 on success, 2 for invalid input (config,
/// flags), 1 for anything that fails at run time.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dissipative dark-state preparation in driven Rydberg ensembles", "rydark"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "configuration file");
    if (needs_config) c->required();
    sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    sub->add_option("--tolerance-rel", o.rtol, "adaptive relative tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--tolerance-abs", o.atol, "adaptive absolute tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--method", o.method, "integrator: adaptive, rk4, expm or chebyshev");
    sub->add_flag("--dump-operators", o.dump_operators, "write H and L as 'row col real imag' text");
    sub->add_option("--parallelism", o.parallelism, "worker threads for sweeps")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1024}))
        ->capture_default_str();
  };
  CLI::App* run = app.add_subcommand("run", "run a registered scenario");
  run->add_option("scenario", o.scenario, "scenario id")->required()->check(CLI::IsMember(scenario_names()));
  common(run, false);
  CLI::App* steady = app.add_subcommand("steady", "steady state of a configured model");
  common(steady, true);
  CLI::App* sw = app.add_subcommand("sweep", "parameter sweep over the [sweep] axes");
  common(sw, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::string command = "rydark";
  for (int i = 1; i < argc; ++i) command += std::string(" ") + argv[i];

  try {
    ScenarioResult r;
    if (run->parsed()) {
      r = run_scenario(o);
    } else if (steady->parsed()) {
      r = run_steady_command(o);
    } else {
      r = run_sweep_command(o);
    }
    write_bundle(o.out_dir, r, command);
    const bool all_failed = !r.failures.empty() && r.tables.front().rows.empty();
    char line[256];
    std::snprintf(line, sizeof line, "%s: %zu table(s), %zu trajectories, %.2f s -> %s", r.id.c_str(), r.tables.size(),
                  r.trajectories, r.wall_seconds, o.out_dir.c_str());
    out << line;
    if (!r.failures.empty()) out << " (" << r.failures.size() << " failed cell(s))";
    if (steady->parsed()) out << " kernel_dimension=" << r.value("kernel_dimension");
    out << "\n";
    if (all_failed) {
      err << "rydark: error: every sweep cell failed; first: " << r.failures.front().message << "\n";
      return 1;
    }
    return 0;
  } catch (const ValidationError& e) {
    err << error_line(e) << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "rydark: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace rydark::cli
