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

// Acceptance suite: one PASS/FAIL line per headline criterion, with the
// measured numbers and wall time. Exit status is the number of failures.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "rydark/cli.hpp"

using namespace rydark;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;
std::vector<ScenarioResult> all_results;  // feeds the state-sanity criterion

void report(const char* name, double limit_s, const std::function<Verdict()>& body) {
  detail::Stopwatch sw;
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double s = sw.seconds();
  if (limit_s > 0 && s > limit_s) {
    v.pass = false;
    v.detail += "; over time budget " + detail::format_double(limit_s) + " s";
  }
  if (!v.pass) ++failures;
  std::printf("%s %-28s %8.2f s  %s\n", v.pass ? "PASS" : "FAIL", name, s, v.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

IntegratorSettings method(const std::string& scenario) {
  IntegratorSettings s;
  s.method = default_method(scenario);
  return s;
}

bool nondecreasing(const std::vector<double>& v, double slack = 0.0) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1] - slack) return false;
  return true;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "rydark");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Verdict nullity() {
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> u(0.01, 10.0);  // MHz
  double worst = 0.0;
  for (std::size_t n = 1; n <= 20; ++n) {
    auto sp = restricted_space(n);
    for (int k = 0; k < 50; ++k) {
      const double wr = from_mhz(u(rng)), wm = from_mhz(u(rng));
      AtomScheme s;
      s.omega_R = wr;
      s.omega_M = wm;
      const QOperator h = hamiltonian_restricted(s, sp);
      worst = std::max(worst, (h.matrix * dark_state(n, wr, wm, sp).amplitudes).norm());
    }
  }
  return {worst < 1e-12, "max |H psi_D| = " + fmt("%.3g", worst) + " over 1000 draws"};
}

Verdict fig2() {
  Fig2Options o;
  o.reference_N = 0;  // rescaling is its own criterion
  const ScenarioResult r = run_fig2(o, method("fig2"));
  all_results.push_back(r);
  const Table& s = r.table("fig2_summary");
  const auto t99 = s.column("t99_us"), end = s.column("P_D_end"), step = s.column("min_step_change");
  bool ok = nondecreasing(t99);
  for (std::size_t i = 0; i < t99.size(); ++i) ok = ok && std::isfinite(t99[i]) && end[i] > 0.99 && step[i] >= -1e-6;
  std::string d = "t99(N=1..10) =";
  for (double t : t99) d += " " + fmt("%.2f", t);
  d += "; min P_D(20us) = " + fmt("%.6f", *std::min_element(end.begin(), end.end()));
  d += "; worst step change = " + fmt("%.2g", *std::min_element(step.begin(), step.end()));
  return {ok, d};
}

Verdict rescaling() {
  Fig2Options o;
  o.atom_counts = {10};
  o.reference_N = 10;
  const ScenarioResult r = run_fig2(o, method("fig2"));
  all_results.push_back(r);
  const double dev = std::stod(r.value("rescaling_max_deviation"));
  return {dev < 1e-9, "max |P_D(N=10) - P_D(N=1, sqrt10)| = " + fmt("%.3g", dev)};
}

Verdict inset() {
  const ScenarioResult r = run_fig2_inset({}, method("fig2-inset"));
  all_results.push_back(r);
  const Table& t = r.table("fig2_inset");
  const auto pd = t.column("P_D_tau"), pu = t.column("purity_tau");
  const bool ok = pd.front() < 0.95 && pu.front() < 0.95 && nondecreasing(pd) && nondecreasing(pu) && pd.back() > 0.95;
  std::string d = "P_D(tau) =";
  for (double p : pd) d += " " + fmt("%.4f", p);
  d += "; purity(tau) =";
  for (double p : pu) d += " " + fmt("%.4f", p);
  return {ok, d};
}

Verdict engineered_decay() {
  const double kappa = from_mhz(5.0);
  bool ok = true;
  std::string d = "fit/estimate at omega/kappa =";
  for (double f : {0.05, 0.1, 0.25, 0.5}) {
    const DecayFit fit = fit_effective_decay(f * kappa, kappa);
    const double ratio = fit.fitted_rate / fit.analytic_rate;
    ok = ok && std::abs(ratio - 1.0) <= 0.10;
    d += " " + fmt("%g:", f) + fmt("%.3f", ratio);
  }
  const DecayFit quarter = fit_effective_decay(kappa / 4, kappa);
  const double q = quarter.fitted_rate / (kappa / 5);
  ok = ok && std::abs(q - 1.0) <= 0.10;
  d += "; omega=kappa/4 gives " + fmt("%.3f", q) + " x kappa/5";
  const DecayFit strong = fit_effective_decay(from_mhz(24.0), from_mhz(6.0));
  const double s = strong.fitted_rate / (from_mhz(6.0) / 2);
  ok = ok && std::abs(s - 1.0) <= 0.15;
  d += "; 24/6 MHz gives " + fmt("%.3f", s) + " x kappa/2";
  return {ok, d};
}

Verdict full_vs_restricted() {
  const ScenarioResult r = run_full_vs_restricted({}, method("full-vs-restricted"));
  all_results.push_back(r);
  const Table& t = r.table("full_vs_restricted");
  const auto v = t.column("V_MHz"), dev = t.column("max_abs_dP_D"), shrink = t.column("shrink_factor");
  bool ok = true;
  std::string d = "max|dP_D| at V =";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 500.0) ok = ok && dev[i] < 0.02;
    if (i) ok = ok && std::abs(shrink[i] - 4.0) < 0.5;
    d += " " + fmt("%g:", v[i]) + fmt("%.3g", dev[i]);
  }
  d += "; shrink per doubling =";
  for (std::size_t i = 1; i < shrink.size(); ++i) d += " " + fmt("%.3f", shrink[i]);
  return {ok, d};
}

Verdict n20() {
  const ScenarioResult a = run_realistic_n20({}, method("n20-w"));
  const ScenarioResult b = run_realistic_n20({.variant = N20Variant::equal_weight}, method("n20-equal"));
  all_results.push_back(a);
  all_results.push_back(b);
  const double w = std::stod(a.value("P_W_10us")), pd = std::stod(b.value("P_D_12us"));
  const bool ok = std::abs(w - 0.914) <= 0.05 && std::abs(pd - 0.988) <= 0.05;
  return {ok, "variant A P_W(10us) = " + fmt("%.5f", w) + " (target 0.914); variant B P_D(12us) = " + fmt("%.5f", pd) +
                  " (target 0.988); T_f = " + a.value("T_f_us") + " us"};
}

Verdict fig4() {
  const ScenarioResult r = run_fig4({}, method("fig4"));
  all_results.push_back(r);
  const Table& t = r.table("fig4");
  const auto sep = t.column("separation_um"), v = t.column("V_rs_MHz"), p = t.column("P_D_tau");
  const double v_ss = Fig4Options{}.V_ss_MHz;
  // Smallest grid value from which P_D stays >= 0.9.
  auto threshold = [&](double s) {
    double th = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = sep.size(); i-- > 0;) {
      if (sep[i] != s) continue;
      if (p[i] < 0.9) break;
      th = v[i];
    }
    return th;
  };
  auto curve = [&](double s) {
    std::vector<double> c;
    for (std::size_t i = 0; i < sep.size(); ++i)
      if (sep[i] == s) c.push_back(p[i]);
    return c;
  };
  bool near_ok = true;
  for (std::size_t i = 0; i < sep.size(); ++i)
    if (sep[i] == 3.0 && v[i] >= 30.0 * v_ss) near_ok = near_ok && p[i] >= 0.9;
  const double th3 = threshold(3.0), th6 = threshold(6.0);
  const bool far_ok = std::isfinite(th6) && th6 >= 10.0 * th3;
  const bool mono = nondecreasing(curve(6.0));
  std::string d = "3um: P_D>=0.9 for V_rs>=30 V_ss " + std::string(near_ok ? "yes" : "no") +
                  " (threshold " + fmt("%g", th3) + " MHz); 6um threshold " + fmt("%g", th6) + " MHz; 6um monotone " +
                  (mono ? "yes" : "no") + "; 6um P_D =";
  for (double x : curve(6.0)) d += " " + fmt("%.4f", x);
  return {near_ok && far_ok && mono, d};
}

Verdict fig3_for_sanity() {
  const ScenarioResult r = run_fig3({}, method("fig3"));
  all_results.push_back(r);
  return {true, "fig3 trajectories: " + std::to_string(r.trajectories)};
}

Verdict sanity() {
  double trace = 0, herm = 0, eig = std::numeric_limits<double>::infinity();
  std::string ids;
  for (const auto& r : all_results) {
    trace = std::max(trace, r.worst.trace_error);
    herm = std::max(herm, r.worst.hermiticity_error);
    eig = std::min(eig, r.worst.min_eigenvalue);
    ids += (ids.empty() ? "" : ",") + r.id;
  }
  const bool ok = trace < 1e-8 && herm < 1e-10 && eig > -1e-9 && all_results.size() >= 8;
  return {ok, "over " + ids + ": max|Tr-1| = " + fmt("%.2g", trace) + ", hermiticity " + fmt("%.2g", herm) +
                  ", min eigenvalue " + fmt("%.2g", eig)};
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "rydark_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cfg = (root / "sweep.cfg").string();
  std::ofstream(cfg) << "[atom]\nomega_R_MHz = 1\nomega_M_MHz = 1\ngamma_r_MHz = 2\n[geometry]\nN = 4\n"
                        "[run]\nmodel = hybrid\nt_end_us = 5\ndt_out_us = 0.05\nobservables = P_D, purity\n"
                        "[sweep]\naxis = V_rs_MHz\nvalues = 100, 0, 3, 1, 30, 10\n";
  bool ok = invoke({"sweep", "--config", cfg, "--parallelism", "1", "--out", (root / "s1").string()}) == 0 &&
            invoke({"sweep", "--config", cfg, "--parallelism", "8", "--out", (root / "s8").string()}) == 0 &&
            invoke({"run", "fig2", "--parallelism", "1", "--out", (root / "f1").string()}) == 0 &&
            invoke({"run", "fig2", "--parallelism", "8", "--out", (root / "f8").string()}) == 0;
  std::size_t compared = 0;
  for (const auto& [a, b] : {std::pair{"s1", "s8"}, std::pair{"f1", "f8"}}) {
    for (const auto& e : fs::directory_iterator(root / a)) {
      if (e.path().extension() != ".csv") continue;
      ok = ok && slurp(e.path()) == slurp(root / b / e.path().filename());
      ++compared;
    }
  }
  ok = ok && compared == 13;
  fs::remove_all(root);
  return {ok, std::to_string(compared) + " CSV files compared byte for byte (sweep and fig2, parallelism 1 vs 8)"};
}

}  // namespace

int main() {
  std::printf("%s acceptance suite\n", kVersion);
  report("dark-state nullity", 1.0, nullity);
  report("fig2 convergence", 10.0, fig2);
  report("sqrt(N) rescaling", 5.0, rescaling);
  report("fig2 inset", 120.0, inset);
  report("engineered decay", 10.0, engineered_decay);
  report("full vs restricted", 300.0, full_vs_restricted);
  report("n20 realistic targets", 120.0, n20);  // two variants, one minute each
  report("fig4 thresholds", 300.0, fig4);
  {
    // Not a criterion of its own; fills in the fig3 trajectories for sanity.
    detail::Stopwatch sw;
    const Verdict v = fig3_for_sanity();
    std::printf("info %-28s %8.2f s  %s\n", "fig3 run", sw.seconds(), v.detail.c_str());
  }
  report("state sanity", 0.0, sanity);
  report("determinism", 0.0, determinism);
  std::printf("%d failing criteria\n", failures);
  return failures;
}
