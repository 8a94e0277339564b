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
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rydark/config.hpp"
#include "rydark/dynamics.hpp"
#include "rydark/hilbert.hpp"
#include "rydark/model.hpp"
#include "rydark/observables.hpp"
#include "rydark/operators.hpp"

namespace rydark {

/// Fully blockaded rr / ss pairs with the rs pair states kept:
/// [G, R_1..R_N, S_1..S_N, then r_i s_j for i != j ordered by (i, j)].
inline SpacePtr hybrid_rs_space(std::size_t atoms) {
  if (atoms < 1) throw ValidationError("N", "need at least one atom");
  std::vector<Configuration> basis = restricted_space(atoms)->basis();
  for (std::size_t i = 0; i < atoms; ++i)
    for (std::size_t j = 0; j < atoms; ++j) {
      if (i == j) continue;
      Configuration c(atoms, Level::g);
      c[i] = Level::r;
      c[j] = Level::s;
      basis.push_back(std::move(c));
    }
  return std::make_shared<HilbertSpace>(SpaceKind::custom, atoms, 3, std::move(basis));
}

/// Everything needed to integrate one model instance.
struct BuiltModel {
  SpacePtr space;
  QOperator hamiltonian;
  std::vector<LindbladChannel> channels;
  Liouvillian liouvillian;
  StateVector dark;
  DensityMatrix initial;
  std::vector<Observable> observables;
};

namespace detail {

inline PairCouplings full_couplings(const GeometrySpec& g) {
  if (g.blockade == BlockadeMode::perfect) return PairCouplings::perfect_blockade(g.N);
  EnsembleGeometry eg;
  eg.perfect_pairs = g.perfect_pairs;
  if (!g.positions.empty()) {
    eg.positions = g.positions;
    if (g.coefficients) {
      eg.coefficients = g.coefficients;
    } else {
      if (!g.reference_um) throw ValidationError("reference_um", "V_*_MHz with positions_um needs reference_um");
      const double r3 = std::pow(*g.reference_um, 3), r6 = r3 * r3;
      eg.coefficients = CouplingCoefficients{g.V_rr.value_or(0.0) * r6, g.V_ss.value_or(0.0) * r6,
                                             g.V_rs.value_or(0.0) * r3};
    }
  } else {
    eg.explicit_couplings =
        PairCouplings::uniform(g.N, g.V_rr.value_or(0.0), g.V_ss.value_or(0.0), g.V_rs.value_or(0.0));
  }
  return pairwise_couplings(eg);
}

/// Inter-ensemble couplings for two linear ensembles: atoms at k * spacing
/// and separation + k * spacing along x.
inline CrossCouplings composite_couplings(const GeometrySpec& g) {
  CouplingCoefficients c;
  if (g.coefficients) {
    c = *g.coefficients;
  } else {
    const double ref = g.reference_um.value_or(*g.separation_um);
    if (!(ref > 0.0)) throw ValidationError("reference_um", "must be > 0");
    const double r3 = std::pow(ref, 3), r6 = r3 * r3;
    c = {g.V_rr.value_or(0.0) * r6, g.V_ss.value_or(0.0) * r6, g.V_rs.value_or(0.0) * r3};
  }
  const auto n = static_cast<Eigen::Index>(g.N);
  CrossCouplings out{RealMatrix(n, n), RealMatrix(n, n), RealMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = std::abs(*g.separation_um + static_cast<double>(j - i) * g.spacing_um);
      if (!(r > 0.0)) throw ValidationError("separation_um", "ensembles overlap (coincident atoms)");
      const double r3 = r * r * r, r6 = r3 * r3;
      out.V_rr(i, j) = c.C6_rr / r6;
      out.V_ss(i, j) = c.C6_ss / r6;
      out.V_rs(i, j) = c.C3_rs / r3;
    }
  return out;
}

inline DensityMatrix initial_state(const std::string& label, const SpacePtr& space, const StateVector& dark) {
  if (label == "G") return DensityMatrix::basis_state(space, space->index_of(space->ground()));
  if (label == "dark") return DensityMatrix::pure(dark);
  if (label == "mixed") return DensityMatrix::maximally_mixed(space);
  return DensityMatrix::basis_state(space, space->index_of_label(label));
}

}  // namespace detail

inline BuiltModel build_model(const ScenarioConfig& cfg,
                              std::size_t dense_threshold = Liouvillian::kDefaultDenseThreshold) {
  const GeometrySpec& g = cfg.geometry;
  const AtomScheme& s = cfg.scheme;
  SpacePtr space;
  QOperator h;
  switch (cfg.model) {
    case ModelKind::restricted:
      space = restricted_space(g.N);
      h = hamiltonian_restricted(s, space);
      break;
    case ModelKind::restricted_excited:
      space = restricted_excited_space(g.N);
      h = hamiltonian_restricted(s, space);
      break;
    case ModelKind::full3:
    case ModelKind::full4: {
      const PairCouplings c = detail::full_couplings(g);
      space = full_space(g.N, cfg.model == ModelKind::full3 ? 3 : 4, c.perfect_pairs());
      h = hamiltonian_full(s, c, space);
      break;
    }
    case ModelKind::hybrid:
      space = hybrid_rs_space(g.N);
      h = hamiltonian_full(s, PairCouplings::uniform(g.N, 0.0, 0.0, g.V_rs.value_or(0.0)), space);
      break;
    case ModelKind::composite: {
      auto half = restricted_space(g.N);
      space = composite_space(*half, *half);
      h = hamiltonian_restricted(s, space, detail::composite_couplings(g));
      break;
    }
  }
  auto channels = collapse_operators(s, space);
  Liouvillian l = liouvillian(h, channels, dense_threshold);
  const bool driven = s.omega_R != 0.0 || s.omega_M != 0.0;
  StateVector dark = driven ? dark_state(space->atoms(), s.omega_R, s.omega_M, space)
                            : dark_state(space->atoms(), 0.0, 1.0, space);
  DensityMatrix rho0 = detail::initial_state(cfg.initial, space, dark);
  std::vector<Observable> obs;
  for (const auto& name : cfg.observables) {
    if (name == "P_D" && !driven) {
      obs.push_back(make_observable(ObservableSpec::projector("P_D", dark.amplitudes), *space));
      continue;
    }
    obs.push_back(make_observable(standard_observable(name, space, s.omega_R, s.omega_M), *space));
  }
  return BuiltModel{space, std::move(h), std::move(channels), std::move(l), std::move(dark), std::move(rho0),
                    std::move(obs)};
}

/// Config-level integrator options layered over `base`.
inline IntegratorSettings settings_for(const ScenarioConfig& cfg, IntegratorSettings base) {
  if (cfg.method) base.method = *cfg.method;
  if (cfg.rtol) base.rtol = *cfg.rtol;
  if (cfg.atol) base.atol = *cfg.atol;
  return base;
}

/// Integrator used by a named scenario when neither the command line nor the
/// config chooses one. fig4 reaches V_rs / Omega ~ 1e4, far too stiff for
/// explicit steps. At default tolerances DOPRI5 lets the smallest eigenvalue
/// of rho dip to -1e-7 in fig3, so the engineered-decay runs go through the
/// Chebyshev propagator as well.
inline Method default_method(const std::string& scenario) {
  if (scenario == "fig4" || scenario == "fig3" || scenario == "n20-w" || scenario == "n20-equal")
    return Method::chebyshev;
  if (scenario == "fig2" || scenario == "fig2-inset" || scenario == "full-vs-restricted") return Method::expm;
  return Method::adaptive;
}

/// Named numeric table; the CLI writes one CSV per table.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& c) const {
    auto it = std::find(columns.begin(), columns.end(), c);
    if (it == columns.end()) throw ValidationError("column", "table " + name + " has no column " + c);
    const auto k = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[k]);
    return out;
  }
};

inline Table trajectory_table(std::string name, const Trajectory& tr) {
  Table t{std::move(name), {"t_us"}, {}};
  t.columns.insert(t.columns.end(), tr.names.begin(), tr.names.end());
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    std::vector<double> row{tr.times[i]};
    row.insert(row.end(), tr.values[i].begin(), tr.values[i].end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct CellFailure {
  std::vector<double> axis_values;
  std::string message;
};

struct ScenarioResult {
  std::string id;
  std::vector<std::pair<std::string, std::string>> parameters;  // resolved inputs, user-facing units
  std::vector<std::pair<std::string, std::string>> summary;     // derived numbers
  std::vector<Table> tables;
  std::vector<std::string> axis_names;  // sweeps only
  std::vector<CellFailure> failures;    // sweeps only
  StateDiagnostics worst{0.0, 0.0, std::numeric_limits<double>::infinity()};
  IntegratorStats stats;
  std::size_t trajectories = 0;
  double wall_seconds = 0.0;

  void absorb(const Trajectory& tr) {
    const StateDiagnostics w = tr.worst();
    worst.trace_error = std::max(worst.trace_error, w.trace_error);
    worst.hermiticity_error = std::max(worst.hermiticity_error, w.hermiticity_error);
    worst.min_eigenvalue = std::min(worst.min_eigenvalue, w.min_eigenvalue);
    stats.method = tr.stats.method;
    stats.accepted += tr.stats.accepted;
    stats.rejected += tr.stats.rejected;
    stats.rhs_evaluations += tr.stats.rhs_evaluations;
    stats.exponentials += tr.stats.exponentials;
    ++trajectories;
  }
  void absorb(const ScenarioResult& other) {
    worst.trace_error = std::max(worst.trace_error, other.worst.trace_error);
    worst.hermiticity_error = std::max(worst.hermiticity_error, other.worst.hermiticity_error);
    worst.min_eigenvalue = std::min(worst.min_eigenvalue, other.worst.min_eigenvalue);
    stats.accepted += other.stats.accepted;
    stats.rejected += other.stats.rejected;
    stats.rhs_evaluations += other.stats.rhs_evaluations;
    stats.exponentials += other.stats.exponentials;
    trajectories += other.trajectories;
  }
  void param(const std::string& k, double v) { parameters.emplace_back(k, detail::format_double(v)); }
  void param(const std::string& k, const std::string& v) { parameters.emplace_back(k, v); }
  void note(const std::string& k, double v) { summary.emplace_back(k, detail::format_double(v)); }
  void note(const std::string& k, const std::string& v) { summary.emplace_back(k, v); }

  const Table& table(const std::string& name) const {
    for (const auto& t : tables)
      if (t.name == name) return t;
    throw ValidationError("table", "result " + id + " has no table " + name);
  }
  std::string value(const std::string& key) const {
    for (const auto& [k, v] : summary)
      if (k == key) return v;
    throw ValidationError("summary", "result " + id + " has no entry " + key);
  }
};

/// Earliest output time with series > threshold, or NaN if never reached.
inline double time_to_threshold(const std::vector<double>& times, const std::vector<double>& series, double threshold) {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (series[i] > threshold) return times[i];
  return std::numeric_limits<double>::quiet_NaN();
}

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void record_settings(ScenarioResult& r, const IntegratorSettings& s) {
  r.param("method", to_string(s.method));
  if (s.method == Method::adaptive) {
    r.param("rtol", s.rtol);
    r.param("atol", s.atol);
  }
  if (s.method == Method::rk4) r.param("fixed_step_us", s.fixed_step);
}

inline void record_config(ScenarioResult& r, const ScenarioConfig& cfg) {
  const ConfigDocument doc = denormalize(cfg);
  for (const auto& [sec, keys] : doc.sections)
    for (const auto& [k, e] : keys) r.param(sec + "." + k, e.value);
}

inline ScenarioConfig restricted_config(std::size_t n, double omega_R, double omega_M, double gamma, double t_end,
                                        double dt) {
  ScenarioConfig c;
  c.model = ModelKind::restricted;
  c.geometry.N = n;
  c.scheme.omega_R = omega_R;
  c.scheme.omega_M = omega_M;
  c.scheme.gamma_r = gamma;
  c.t_end = t_end;
  c.dt_out = dt;
  return c;
}

inline Trajectory run_config(const ScenarioConfig& cfg, const IntegratorSettings& settings, bool store_states = false) {
  const BuiltModel m = build_model(cfg);
  return evolve(m.liouvillian, m.initial, TimeGrid::uniform(cfg.t_end, cfg.dt_out), settings, m.observables,
                store_states);
}

}  // namespace detail

/// Generic single run of a user configuration.
inline ScenarioResult run_custom(const ScenarioConfig& cfg, const IntegratorSettings& base = {}) {
  detail::Stopwatch sw;
  ScenarioResult r;
  r.id = "custom";
  const IntegratorSettings settings = settings_for(cfg, base);
  detail::record_config(r, cfg);
  detail::record_settings(r, settings);
  const BuiltModel m = build_model(cfg);
  r.param("dimension", static_cast<double>(m.space->dimension()));
  const Trajectory tr =
      evolve(m.liouvillian, m.initial, TimeGrid::uniform(cfg.t_end, cfg.dt_out), settings, m.observables);
  r.absorb(tr);
  r.tables.push_back(trajectory_table("custom", tr));
  for (std::size_t k = 0; k < tr.names.size(); ++k) r.note(tr.names[k] + "_end", tr.values.back()[k]);
  r.wall_seconds = sw.seconds();
  return r;
}

/// Steady state of a single configured model.
inline ScenarioResult run_steady(const ScenarioConfig& cfg) {
  detail::Stopwatch sw;
  ScenarioResult r;
  r.id = "steady";
  detail::record_config(r, cfg);
  const BuiltModel m = build_model(cfg);
  r.param("dimension", static_cast<double>(m.space->dimension()));
  const SteadyState ss = steady_state(m.liouvillian);
  Table t{"steady", {}, {{}}};
  for (const auto& o : m.observables) {
    t.columns.push_back(o.name);
    t.rows[0].push_back(o.eval(ss.state.rho));
  }
  t.columns.insert(t.columns.end(), {"kernel_dim", "residual"});
  t.rows[0].push_back(static_cast<double>(ss.kernel_dimension));
  t.rows[0].push_back(ss.residual);
  r.tables.push_back(std::move(t));
  r.note("kernel_dimension", static_cast<double>(ss.kernel_dimension));
  r.note("degenerate", ss.degenerate ? "yes" : "no");
  r.note("residual", ss.residual);
  r.note("purity", purity(ss.state));
  r.worst = ss.diagnostics;
  r.wall_seconds = sw.seconds();
  return r;
}

struct Fig2Options {
  std::vector<std::size_t> atom_counts = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double omega_R = from_mhz(1.0);
  double omega_M = from_mhz(1.0);
  double gamma = from_mhz(2.0);
  double t_end = 20.0;
  double dt_out = 0.01;
  std::size_t reference_N = 10;  // single atom with sqrt(N) omega_R
};

/// P_D(t) for a perfectly blockaded ensemble of each size, plus a single
/// atom driven at sqrt(N_ref) omega_R.
inline ScenarioResult run_fig2(const Fig2Options& o = {}, const IntegratorSettings& settings = {}) {
  detail::Stopwatch sw;
  ScenarioResult r;
  r.id = "fig2";
  r.param("model", "restricted");
  r.param("omega_R_MHz", to_mhz(o.omega_R));
  r.param("omega_M_MHz", to_mhz(o.omega_M));
  r.param("gamma_r_MHz", to_mhz(o.gamma));
  r.param("t_end_us", o.t_end);
  r.param("dt_out_us", o.dt_out);
  r.param("initial", "G");
  detail::record_settings(r, settings);

  Table summary{"fig2_summary", {"N", "t99_us", "P_D_end", "min_step_change"}, {}};
  std::vector<double> reference_curve;
  for (std::size_t n : o.atom_counts) {
    ScenarioConfig c = detail::restricted_config(n, o.omega_R, o.omega_M, o.gamma, o.t_end, o.dt_out);
    const Trajectory tr = detail::run_config(c, settings);
    r.absorb(tr);
    const auto pd = tr.series("P_D");
    double min_change = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < pd.size(); ++i) min_change = std::min(min_change, pd[i] - pd[i - 1]);
    summary.rows.push_back({double(n), time_to_threshold(tr.times, pd, 0.99), pd.back(), min_change});
    if (n == o.reference_N) reference_curve = pd;
    r.tables.push_back(trajectory_table("fig2_N" + std::to_string(n), tr));
  }
  if (o.reference_N > 0) {
    const double scaled = std::sqrt(static_cast<double>(o.reference_N)) * o.omega_R;
    ScenarioConfig c = detail::restricted_config(1, scaled, o.omega_M, o.gamma, o.t_end, o.dt_out);
    const Trajectory tr = detail::run_config(c, settings);
    r.absorb(tr);
    r.tables.push_back(trajectory_table("fig2_single_sqrt" + std::to_string(o.reference_N), tr));
    r.param("reference_omega_R_MHz", to_mhz(scaled));
    if (!reference_curve.empty()) {
      const auto single = tr.series("P_D");
      double dev = 0.0;
      for (std::size_t i = 0; i < single.size(); ++i) dev = std::max(dev, std::abs(single[i] - reference_curve[i]));
      r.note("rescaling_max_deviation", dev);
    }
  }
  r.tables.push_back(std::move(summary));
  r.wall_seconds = sw.seconds();
  return r;
}

struct InsetOptions {
  std::size_t N = 4;
  std::vector<double> V_rs_MHz = {0, 1, 3, 10, 30, 100};
  double tau = 5.0;
  double dt_out = 0.05;
  double omega_R = from_mhz(1.0);
  double omega_M = from_mhz(1.0);
  double gamma = from_mhz(2.0);
  bool steady = true;
};

inline ScenarioConfig inset_config(const InsetOptions& o, double v_rs_mhz) {
  ScenarioConfig c = detail::restricted_config(o.N, o.omega_R, o.omega_M, o.gamma, o.tau, o.dt_out);
  c.model = ModelKind::hybrid;
  c.geometry.V_rs = from_mhz(v_rs_mhz);
  return c;
}

/// P_D(tau) and purity(tau) against V_rs in the hybrid rs-pair basis.
inline ScenarioResult run_fig2_inset(const InsetOptions& o = {}, const IntegratorSettings& settings = {}) {
  detail::Stopwatch sw;
  ScenarioResult r;
  r.id = "fig2_inset";
  r.param("model", "hybrid");
  r.param("N", static_cast<double>(o.N));
  r.param("omega_R_MHz", to_mhz(o.omega_R));
  r.param("omega_M_MHz", to_mhz(o.omega_M));
  r.param("gamma_r_MHz", to_mhz(o.gamma));
  r.param("tau_us", o.tau);
  r.param("dt_out_us", o.dt_out);
  r.param("V_rr", "perfect");
  r.param("V_ss", "perfect");
  detail::record_settings(r, settings);
  Table t{"fig2_inset", {"V_rs_MHz", "P_D_tau", "purity_tau"}, {}};
  if (o.steady) t.columns.insert(t.columns.end(), {"P_D_ss", "purity_ss", "kernel_dim"});
  for (double v : o.V_rs_MHz) {
    const ScenarioConfig c = inset_config(o, v);
    const BuiltModel m = build_model(c);
    const Trajectory tr =
        evolve(m.liouvillian, m.initial, TimeGrid::uniform(c.t_end, c.dt_out), settings, m.observables);
    r.absorb(tr);
    std::vector<double> row{v, tr.values.back()[0], tr.values.back()[1]};
    if (o.steady) {
      const SteadyState ss = steady_state(m.liouvillian);
      row.insert(row.end(), {dark_state_population(ss.state, m.dark), purity(ss.state),
                             static_cast<double>(ss.kernel_dimension)});
    }
    t.rows.push_back(std::move(row));
  }
  r.param("dimension", static_cast<double>(hybrid_rs_space(o.N)->dimension()));
  r.tables.push_back(std::move(t));
  r.wall_seconds = sw.seconds();
  return r;
}

struct Fig3Options {
  std::size_t N = 10;
  double omega_R = from_mhz(1.0);
  double omega_M = from_mhz(1.0);
  double kappa = from_mhz(5.0);
  std::vector<double> rate_fractions = {0.2, 0.4, 0.5};  // target gamma / kappa
  bool include_zero = true;
  double t_end = 20.0;
  double dt_out = 0.01;
};

/// Four-level ensembles in the 3N+1 space with omega_E chosen by inverting
/// the adiabatic estimate, each overlaid by the 3-level run at the target rate.
inline ScenarioResult run_fig3(const Fig3Options& o = {}, const IntegratorSettings& settings = {}) {
  detail::Stopwatch sw;
  ScenarioResult r;
  r.id = "fig3";
  r.param("model", "restricted-e");
  r.param("N", static_cast<double>(o.N));
  r.param("omega_R_MHz", to_mhz(o.omega_R));
  r.param("omega_M_MHz", to_mhz(o.omega_M));
  r.param("kappa_MHz", to_mhz(o.kappa));
  r.param("t_end_us", o.t_end);
  r.param("dt_out_us", o.dt_out);
  detail::record_settings(r, settings);

  std::vector<double> fractions = o.rate_fractions;
  if (o.include_zero) fractions.push_back(0.0);
  Table rates{"fig3_rates",
              {"gamma_target_MHz", "omega_E_MHz", "gamma_est_MHz", "gamma_fit_MHz", "max_dev_after_1us", "P_D_end"},
              {}};
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    const double target = fractions[k] * o.kappa;
    const double omega_E = coupling_for_decay(target, o.kappa);
    const DecayFit fit = fit_effective_decay(omega_E, o.kappa);

    ScenarioConfig four = detail::restricted_config(o.N, o.omega_R, o.omega_M, 0.0, o.t_end, o.dt_out);
    four.model = ModelKind::restricted_excited;
    four.scheme.gamma_r.reset();
    four.scheme.engineered = EngineeredDecay{omega_E, o.kappa};
    four.observables = {"P_D", "n_e"};
    const Trajectory t4 = detail::run_config(four, settings);
    r.absorb(t4);

    ScenarioConfig three = detail::restricted_config(o.N, o.omega_R, o.omega_M, target, o.t_end, o.dt_out);
    three.observables = {"P_D"};
    const Trajectory t3 = detail::run_config(three, settings);
    r.absorb(t3);

    const auto p4 = t4.series("P_D"), p3 = t3.series("P_D");
    Table curve{"fig3_case" + std::to_string(k + 1), {"t_us", "P_D_4level", "P_D_3level", "n_e"}, {}};
    double dev = 0.0;
    const auto ne = t4.series("n_e");
    for (std::size_t i = 0; i < p4.size(); ++i) {
      curve.rows.push_back({t4.times[i], p4[i], p3[i], ne[i]});
      if (t4.times[i] >= 1.0) dev = std::max(dev, std::abs(p4[i] - p3[i]));
    }
    rates.rows.push_back({to_mhz(target), to_mhz(omega_E), to_mhz(fit.analytic_rate), to_mhz(fit.fitted_rate), dev,
                          p4.back()});
    r.tables.push_back(std::move(curve));
  }
  r.tables.push_back(std::move(rates));
  r.wall_seconds = sw.seconds();
  return r;
}

struct Fig4Options {
  std::size_t N = 3;  // per ensemble
  std::vector<double> separations_um = {3.0, 6.0};
  std::vector<double> V_rs_MHz = {0, 1, 3, 10, 30, 100, 300, 1000, 3000, 10000};  // at R6ss
  double R6ss_um = 3.0;
  double V_ss_MHz = 1.0;         // V_ss(R6ss) = omega_R / 2pi by definition of R6ss
  double V_rr_over_V_ss = 190.0 / 400.0;
  double spacing_um = 0.1;
  double tau = 10.0;
  double dt_out = 0.05;
  double omega_R = from_mhz(1.0);
  double omega_M = from_mhz(1.0);
  double gamma = from_mhz(2.0);
};

inline ScenarioConfig fig4_config(const Fig4Options& o, double separation, double v_rs_mhz) {
  ScenarioConfig c = detail::restricted_config(o.N, o.omega_R, o.omega_M, o.gamma, o.tau, o.dt_out);
  c.model = ModelKind::composite;
  c.observables = {"P_D", "purity"};
  c.geometry.separation_um = separation;
  c.geometry.spacing_um = o.spacing_um;
  c.geometry.reference_um = o.R6ss_um;
  c.geometry.V_ss = from_mhz(o.V_ss_MHz);
  c.geometry.V_rr = from_mhz(o.V_ss_MHz * o.V_rr_over_V_ss);
  c.geometry.V_rs = from_mhz(v_rs_mhz);
  return c;
}

/// Two perfectly blockaded ensembles coupled only through the inter-ensemble
/// interactions; P_D of the joint 2N-atom dark state at tau.
inline ScenarioResult run_fig4(const Fig4Options& o = {}, const IntegratorSettings& settings = {}) {
  detail::Stopwatch sw;
  ScenarioResult r;
  r.id = "fig4";
  r.param("model", "composite");
  r.param("N_per_ensemble", static_cast<double>(o.N));
  r.param("R6ss_um", o.R6ss_um);
  r.param("V_ss_at_R6ss_MHz", o.V_ss_MHz);
  r.param("V_rr_at_R6ss_MHz", o.V_ss_MHz * o.V_rr_over_V_ss);
  r.param("V_rs_axis", "V_rs at R6ss, MHz; cross couplings scale as 1/r^3 (rs) and 1/r^6 (rr, ss)");
  r.param("spacing_um", o.spacing_um);
  r.param("omega_R_MHz", to_mhz(o.omega_R));
  r.param("omega_M_MHz", to_mhz(o.omega_M));
  r.param("gamma_r_MHz", to_mhz(o.gamma));
  r.param("tau_us", o.tau);
  detail::record_settings(r, settings);
  Table t{"fig4", {"separation_um", "V_rs_MHz", "P_D_tau"}, {}};
  for (double sep : o.separations_um)
    for (double v : o.V_rs_MHz) {
      const Trajectory tr = detail::run_config(fig4_config(o, sep, v), settings);
      r.absorb(tr);
      t.rows.push_back({sep, v, tr.values.back()[0]});
    }
  r.tables.push_back(std::move(t));
  r.wall_seconds = sw.seconds();
  return r;
}

enum class N20Variant { w_dominated, equal_weight };

struct N20Options {
  N20Variant variant = N20Variant::w_dominated;
  std::size_t N = 20;
  double omega_R = from_mhz(1.0);
  double omega_E = from_mhz(24.0);
  double kappa = from_mhz(6.0);
  double gamma_d = from_khz(10.0);
  double gamma_s = from_khz(5.0);
  double gamma_r_intrinsic = from_khz(5.0);
  DephasingMode dephasing_mode = DephasingMode::collective;
  double t_end = 20.0;
  double dt_out = 0.05;
  std::vector<std::size_t> convergence_N = {1, 2, 5, 10, 15, 20};
};

inline double n20_omega_M(const N20Options& o) {
  return o.variant == N20Variant::w_dominated ? o.omega_R : std::sqrt(static_cast<double>(o.N)) * o.omega_R;
}

/// Realistic parameters: engineered decay replaced by its fitted effective
/// rate, dephasing and intrinsic decays switched on.
inline ScenarioResult run_realistic_n20(const N20Options& o = {}, const IntegratorSettings& settings = {}) {
  detail::Stopwatch sw;
  ScenarioResult r;
  const bool w = o.variant == N20Variant::w_dominated;
  r.id = w ? "n20_w" : "n20_equal";
  const DecayFit fit = fit_effective_decay(o.omega_E, o.kappa);
  const double omega_M = n20_omega_M(o);

  auto make = [&](std::size_t n, bool lossy) {
    ScenarioConfig c = detail::restricted_config(n, o.omega_R, omega_M, fit.fitted_rate, o.t_end, o.dt_out);
    c.observables = {"P_W", "P_D", "purity"};
    if (lossy) {
      c.scheme.gamma_d = o.gamma_d;
      c.scheme.gamma_s = o.gamma_s;
      c.scheme.gamma_r_intrinsic = o.gamma_r_intrinsic;
      c.scheme.dephasing_mode = o.dephasing_mode;
    }
    return c;
  };
  const ScenarioConfig main = make(o.N, true);
  detail::record_config(r, main);
  r.param("omega_E_MHz", to_mhz(o.omega_E));
  r.param("kappa_MHz", to_mhz(o.kappa));
  r.param("gamma_eff_source", "fit_effective_decay(omega_E, kappa)");
  detail::record_settings(r, settings);

  const Trajectory tr = detail::run_config(main, settings);
  r.absorb(tr);
  r.tables.push_back(trajectory_table(r.id, tr));
  const auto pw = tr.series("P_W"), pd = tr.series("P_D");
  auto at = [&](const std::vector<double>& s, double t) {
    for (std::size_t i = 0; i < tr.times.size(); ++i)
      if (std::abs(tr.times[i] - t) < 1e-9) return s[i];
    throw ValidationError("t_end_us", "grid does not contain t = " + std::to_string(t));
  };
  r.note("gamma_eff_MHz", to_mhz(fit.fitted_rate));
  r.note("gamma_eff_over_kappa", fit.fitted_rate / o.kappa);
  r.note("P_W_10us", at(pw, 10.0));
  r.note("P_D_10us", at(pd, 10.0));
  r.note("P_D_12us", at(pd, 12.0));

  // Formation time T_f: first time with P_D > 0.99 without losses.
  Table conv{r.id + "_convergence", {"N", "T_f_us", "P_D_end_lossy"}, {}};
  double tf_main = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t n : o.convergence_N) {
    const Trajectory clean = detail::run_config(make(n, false), settings);
    const Trajectory lossy = n == o.N ? tr : detail::run_config(make(n, true), settings);
    r.absorb(clean);
    if (n != o.N) r.absorb(lossy);
    const double tf = time_to_threshold(clean.times, clean.series("P_D"), 0.99);
    if (n == o.N) tf_main = tf;
    conv.rows.push_back({double(n), tf, lossy.series("P_D").back()});
  }
  r.tables.push_back(std::move(conv));

  const BuiltModel m = build_model(main);
  const SteadyState ss = steady_state(m.liouvillian);
  const double loss = 1.0 - dark_state_population(ss.state, m.dark);
  r.note("T_f_us", tf_main);
  r.note("P_D_steady", 1.0 - loss);
  r.note("fidelity_loss_steady", loss);
  r.note("loss_rate_times_T_f", (o.gamma_d + o.gamma_s) * tf_main);
  r.wall_seconds = sw.seconds();
  return r;
}

struct FullVsRestrictedOptions {
  std::size_t N = 3;
  std::vector<double> V_MHz = {250, 500, 1000, 2000};
  double omega_R = from_mhz(1.0);
  double omega_M = from_mhz(1.0);
  double gamma = from_mhz(2.0);
  double t_end = 10.0;
  double dt_out = 0.01;
};

/// Full 3^N model with V_rr = V_ss = V_rs = V on every pair against the
/// perfectly blockaded restricted model.
inline ScenarioResult run_full_vs_restricted(const FullVsRestrictedOptions& o = {},
                                             const IntegratorSettings& settings = {}) {
  detail::Stopwatch sw;
  ScenarioResult r;
  r.id = "full_vs_restricted";
  r.param("N", static_cast<double>(o.N));
  r.param("omega_R_MHz", to_mhz(o.omega_R));
  r.param("omega_M_MHz", to_mhz(o.omega_M));
  r.param("gamma_r_MHz", to_mhz(o.gamma));
  r.param("t_end_us", o.t_end);
  r.param("dt_out_us", o.dt_out);
  detail::record_settings(r, settings);
  ScenarioConfig rc = detail::restricted_config(o.N, o.omega_R, o.omega_M, o.gamma, o.t_end, o.dt_out);
  rc.observables = {"P_D"};
  const Trajectory restricted = detail::run_config(rc, settings);
  r.absorb(restricted);
  const auto pr = restricted.series("P_D");
  Table t{"full_vs_restricted", {"V_MHz", "max_abs_dP_D", "shrink_factor"}, {}};
  double previous = 0.0;
  for (double v : o.V_MHz) {
    ScenarioConfig fc = rc;
    fc.model = ModelKind::full3;
    fc.geometry.blockade = BlockadeMode::finite;
    fc.geometry.V_rr = fc.geometry.V_ss = fc.geometry.V_rs = from_mhz(v);
    const Trajectory full = detail::run_config(fc, settings);
    r.absorb(full);
    const auto pf = full.series("P_D");
    double dev = 0.0;
    for (std::size_t i = 0; i < pf.size(); ++i) dev = std::max(dev, std::abs(pf[i] - pr[i]));
    t.rows.push_back({v, dev, previous > 0.0 ? previous / dev : 0.0});
    previous = dev;
  }
  r.tables.push_back(std::move(t));
  r.wall_seconds = sw.seconds();
  return r;
}

/// Cartesian sweep over the [sweep] axes of a configuration document. Cells
/// run on up to `parallelism` threads; rows are ordered lexicographically by
/// axis values whatever the completion order. Failed cells are recorded.
inline ScenarioResult sweep(const ConfigDocument& doc, const IntegratorSettings& base = {},
                            std::size_t parallelism = 1) {
  detail::Stopwatch sw;
  if (!doc.has("sweep")) throw ConfigError("[sweep]", 0, "missing section [sweep]");
  const std::vector<SweepAxis> axes = parse_sweep_axes(doc);
  auto cell_document = [&](const std::vector<double>& values) {
    ConfigDocument cell = doc;
    cell.sections.erase("sweep");
    for (std::size_t a = 0; a < axes.size(); ++a)
      cell.set(axes[a].section, axes[a].key, detail::format_double(values[a]));
    return cell;
  };
  // The base document may rely on the axes for required keys; validate it
  // with the first value of each axis.
  std::vector<double> first;
  for (const auto& a : axes) first.push_back(a.values.front());
  ScenarioConfig cfg = normalize_units(cell_document(first));
  cfg.sweep = axes;
  ScenarioResult r;
  r.id = "sweep";
  detail::record_config(r, cfg);
  const IntegratorSettings settings = settings_for(cfg, base);
  detail::record_settings(r, settings);

  std::vector<std::vector<double>> cells{{}};
  for (const auto& axis : cfg.sweep) {
    r.axis_names.push_back(axis.key);
    std::vector<std::vector<double>> next;
    for (const auto& c : cells)
      for (double v : axis.values) {
        auto e = c;
        e.push_back(v);
        next.push_back(std::move(e));
      }
    cells = std::move(next);
  }
  std::stable_sort(cells.begin(), cells.end());

  struct Outcome {
    bool ok = false;
    std::vector<double> values;
    std::vector<std::string> names;
    ScenarioResult stats;
    std::string error;
  };
  std::vector<Outcome> out(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        const ScenarioConfig cc = normalize_units(cell_document(cells[i]));
        const Trajectory tr = detail::run_config(cc, settings_for(cc, base));
        out[i].stats.absorb(tr);
        out[i].values = tr.values.back();
        out[i].names = tr.names;
        out[i].ok = true;
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(parallelism, cells.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  Table t{"sweep", r.axis_names, {}};
  bool have_columns = false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!out[i].ok) {
      r.failures.push_back({cells[i], out[i].error});
      continue;
    }
    if (!have_columns) {
      for (const auto& n : out[i].names) t.columns.push_back(n + "_tau");
      have_columns = true;
    }
    std::vector<double> row = cells[i];
    row.insert(row.end(), out[i].values.begin(), out[i].values.end());
    t.rows.push_back(std::move(row));
    r.absorb(out[i].stats);
  }
  if (!have_columns)
    for (const auto& n : cfg.observables) t.columns.push_back(n + "_tau");
  r.tables.push_back(std::move(t));
  r.note("cells", static_cast<double>(cells.size()));
  r.note("failed_cells", static_cast<double>(r.failures.size()));
  r.wall_seconds = sw.seconds();
  return r;
}

}  // namespace rydark
