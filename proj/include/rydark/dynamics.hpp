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
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "rydark/core.hpp"
#include "rydark/hilbert.hpp"
#include "rydark/operators.hpp"

namespace rydark {

enum class Method { adaptive, rk4, expm, chebyshev };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::adaptive: return "adaptive";
    case Method::rk4: return "rk4";
    case Method::expm: return "expm";
    case Method::chebyshev: return "chebyshev";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "adaptive" || s == "dopri5") return Method::adaptive;
  if (s == "rk4") return Method::rk4;
  if (s == "expm") return Method::expm;
  if (s == "chebyshev") return Method::chebyshev;
  throw ValidationError("method", "unknown integrator '" + s + "' (expected adaptive, rk4, expm or chebyshev)");
}

struct IntegratorSettings {
  Method method = Method::adaptive;
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = 0.0;     // us, 0 = unbounded
  double fixed_step = 1e-3;  // us, rk4 only
  bool diagnostics = true;   // per-output trace / Hermiticity / eigenvalue checks

  void validate() const {
    if (!(rtol > 0.0)) throw ValidationError("tolerance-rel", "must be > 0");
    if (!(atol > 0.0)) throw ValidationError("tolerance-abs", "must be > 0");
    if (max_step < 0.0) throw ValidationError("max_step", "must be >= 0");
    if (!(fixed_step > 0.0)) throw ValidationError("fixed_step", "must be > 0");
  }
};

/// Output times in us: strictly increasing, starting at 0.
struct TimeGrid {
  std::vector<double> times;

  static TimeGrid uniform(double t_end, double dt) {
    if (!(t_end >= 0.0)) throw ValidationError("t_end_us", "must be >= 0");
    if (!(dt > 0.0)) throw ValidationError("dt_out_us", "must be > 0");
    const auto n = static_cast<std::size_t>(std::llround(t_end / dt));
    TimeGrid g;
    for (std::size_t i = 0; i <= n; ++i) g.times.push_back(static_cast<double>(i) * dt);
    if (std::abs(g.times.back() - t_end) > 1e-9 * std::max(1.0, t_end)) g.times.push_back(t_end);
    return g;
  }

  static TimeGrid points(std::vector<double> t) {
    TimeGrid g{std::move(t)};
    g.validate();
    return g;
  }

  void validate() const {
    if (times.empty() || times.front() != 0.0) throw ValidationError("time grid", "must start at t = 0");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw ValidationError("time grid", "must be strictly increasing");
  }
};

struct StateDiagnostics {
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
};

/// Trace error, Hermiticity defect and smallest eigenvalue of the Hermitian part.
inline StateDiagnostics validate_state(const Matrix& rho) {
  StateDiagnostics d;
  d.trace_error = std::abs(rho.trace() - cplx(1.0, 0.0));
  d.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  const Matrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

inline StateDiagnostics validate_state(const DensityMatrix& rho) { return validate_state(rho.rho); }

struct Observable {
  std::string name;
  std::function<double(const Matrix&)> eval;
};

struct IntegratorStats {
  Method method = Method::adaptive;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  std::size_t exponentials = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // [time][observable]
  std::vector<StateDiagnostics> diagnostics;
  std::vector<Matrix> states;  // filled when requested
  IntegratorStats stats;

  std::vector<double> series(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ValidationError("observable", "trajectory has no series '" + name + "'");
    const auto col = static_cast<std::size_t>(it - names.begin());
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& row : values) out.push_back(row[col]);
    return out;
  }

  double at(std::size_t time_index, const std::string& name) const { return series(name).at(time_index); }

  /// Worst-case diagnostics over every output time.
  StateDiagnostics worst() const {
    StateDiagnostics w{0.0, 0.0, std::numeric_limits<double>::infinity()};
    for (const auto& d : diagnostics) {
      w.trace_error = std::max(w.trace_error, d.trace_error);
      w.hermiticity_error = std::max(w.hermiticity_error, d.hermiticity_error);
      w.min_eigenvalue = std::min(w.min_eigenvalue, d.min_eigenvalue);
    }
    if (diagnostics.empty()) w.min_eigenvalue = 0.0;
    return w;
  }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

/// Adaptive DOPRI5 with PI step-size control; lands exactly on every output time.
class AdaptiveStepper {
 public:
  AdaptiveStepper(const Liouvillian& l, const IntegratorSettings& s, IntegratorStats& stats)
      : l_(l), s_(s), stats_(stats) {
    const auto n = static_cast<Eigen::Index>(l.dimension());
    for (Vector* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &ynew_}) v->resize(n);
  }

  void advance(Vector& y, double t, double t_out) {
    using T = DormandPrince;
    constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
    constexpr double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
    constexpr std::size_t max_steps = 50'000'000;
    const double eps = std::numeric_limits<double>::epsilon();

    eval(y, k1_);
    if (h_ <= 0.0) h_ = initial_step(y, t_out - t);
    while (t < t_out) {
      double h = std::min(h_, t_out - t);
      if (s_.max_step > 0) h = std::min(h, s_.max_step);
      const bool last = h >= t_out - t;
      if (h < 16 * eps * std::max(1.0, std::abs(t)) || stats_.accepted + stats_.rejected > max_steps)
        throw StiffnessError("step size underflow at t = " + std::to_string(t) +
                             " us; the problem is too stiff for the explicit integrator, use --method expm or chebyshev");

      tmp_ = y + h * T::a21 * k1_;
      eval(tmp_, k2_);
      tmp_ = y + h * (T::a31 * k1_ + T::a32 * k2_);
      eval(tmp_, k3_);
      tmp_ = y + h * (T::a41 * k1_ + T::a42 * k2_ + T::a43 * k3_);
      eval(tmp_, k4_);
      tmp_ = y + h * (T::a51 * k1_ + T::a52 * k2_ + T::a53 * k3_ + T::a54 * k4_);
      eval(tmp_, k5_);
      tmp_ = y + h * (T::a61 * k1_ + T::a62 * k2_ + T::a63 * k3_ + T::a64 * k4_ + T::a65 * k5_);
      eval(tmp_, k6_);
      ynew_ = y + h * (T::a71 * k1_ + T::a73 * k3_ + T::a74 * k4_ + T::a75 * k5_ + T::a76 * k6_);
      eval(ynew_, k7_);
      tmp_ = h * (T::e1 * k1_ + T::e3 * k3_ + T::e4 * k4_ + T::e5 * k5_ + T::e6 * k6_ + T::e7 * k7_);

      double err = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double sc = s_.atol + s_.rtol * std::max(std::abs(y(i)), std::abs(ynew_(i)));
        const double q = std::abs(tmp_(i)) / sc;
        err += q * q;
      }
      err = std::sqrt(err / static_cast<double>(y.size()));

      const double fac11 = std::pow(std::max(err, 1e-300), expo1);
      if (err <= 1.0) {
        double fac = fac11 / std::pow(facold_, beta);
        fac = std::clamp(fac / safe, facc2, facc1);
        facold_ = std::max(err, 1e-4);
        ++stats_.accepted;
        y.swap(ynew_);
        k1_.swap(k7_);
        t = last ? t_out : t + h;
        // Keep the controller's proposal when the step was clipped to hit t_out.
        const double hnew = h / fac;
        if (!last || hnew > h_) h_ = hnew;
      } else {
        ++stats_.rejected;
        h_ = h / std::min(facc1, fac11 / safe);
      }
    }
  }

 private:
  void eval(const Vector& x, Vector& out) {
    l_.apply(x, out);
    ++stats_.rhs_evaluations;
  }

  double initial_step(const Vector& y, double span) {
    const double d0 = y.norm();
    const double d1 = k1_.norm();
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, span);
    if (s_.max_step > 0) h = std::min(h, s_.max_step);
    return std::max(h, 1e-12);
  }

  const Liouvillian& l_;
  const IntegratorSettings& s_;
  IntegratorStats& stats_;
  Vector k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_;
  double h_ = 0.0;
  double facold_ = 1e-4;
};

inline void rk4_advance(const Liouvillian& l, Vector& y, double t, double t_out, double step, IntegratorStats& stats) {
  const auto n_sub = static_cast<std::size_t>(std::max(1.0, std::ceil((t_out - t) / step - 1e-9)));
  const double h = (t_out - t) / static_cast<double>(n_sub);
  Vector k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
  for (std::size_t i = 0; i < n_sub; ++i) {
    l.apply(y, k1);
    tmp = y + 0.5 * h * k1;
    l.apply(tmp, k2);
    tmp = y + 0.5 * h * k2;
    l.apply(tmp, k3);
    tmp = y + h * k3;
    l.apply(tmp, k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    stats.rhs_evaluations += 4;
    ++stats.accepted;
  }
}

/// J_0(x) .. J_kmax(x) by Miller's backward recurrence, normalized with
/// J_0 + 2 sum J_2k = 1.
inline std::vector<double> bessel_j_sequence(double x, std::size_t kmax) {
  std::vector<double> j(kmax + 1, 0.0);
  if (x == 0.0) {
    j[0] = 1.0;
    return j;
  }
  std::size_t m = kmax + 20 + static_cast<std::size_t>(std::sqrt(40.0 * std::max(x, 1.0)));
  if (m % 2) ++m;
  double next = 0.0, cur = 1e-300, norm = 0.0;
  for (std::size_t k = m; k > 0; --k) {
    const double prev = 2.0 * static_cast<double>(k) / x * cur - next;
    next = cur;
    cur = prev;  // J_{k-1}
    if (k - 1 <= kmax) j[k - 1] = cur;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
    if (std::abs(cur) > 1e250) {
      next *= 1e-250;
      cur *= 1e-250;
      norm *= 1e-250;
      for (auto& v : j) v *= 1e-250;
    }
  }
  norm += cur;
  for (auto& v : j) v /= norm;
  return j;
}

/// exp(h L) v by a Chebyshev expansion on a box containing the numerical range
/// of L. Exact to roundoff for any stiffness; the cost is about a*h sparse
/// products per step, a being half the imaginary extent of the range.
class ChebyshevPropagator {
 public:
  explicit ChebyshevPropagator(const Liouvillian& l) : rows_(l.sparse()) {
    rows_.makeCompressed();
    const SparseMatrix& m = l.sparse();
    const SparseMatrix adj = m.adjoint();
    const SparseMatrix herm = 0.5 * (m + adj);
    const SparseMatrix skew = cplx(0.0, -0.5) * (m - adj);  // Hermitian
    auto bounds = [](const SparseMatrix& a) {
      std::vector<double> centre(static_cast<std::size_t>(a.rows()), 0.0), radius(centre.size(), 0.0);
      for (Eigen::Index k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
          const auto r = static_cast<std::size_t>(it.row());
          if (it.row() == it.col()) centre[r] = it.value().real();
          else radius[r] += std::abs(it.value());
        }
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t i = 0; i < centre.size(); ++i) {
        lo = std::min(lo, centre[i] - radius[i]);
        hi = std::max(hi, centre[i] + radius[i]);
      }
      return std::pair{lo, hi};
    };
    const auto [re_lo, re_hi] = bounds(herm);
    const auto [im_lo, im_hi] = bounds(skew);
    centre_ = cplx(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi));
    half_width_ = std::max(0.5 * (im_hi - im_lo), 1e-12);
    real_radius_ = 0.5 * (re_hi - re_lo);
  }

  /// Longest substep that keeps the growth of T_k(Z) below e^2.
  double max_step() const { return real_radius_ > 0.0 ? 2.0 / real_radius_ : std::numeric_limits<double>::infinity(); }

  void advance(Vector& y, double dt, IntegratorStats& stats) {
    const auto n_sub = static_cast<std::size_t>(std::max(1.0, std::ceil(dt / max_step() - 1e-9)));
    const double h = dt / static_cast<double>(n_sub);
    const std::vector<cplx>& c = coefficients(h);
    const auto n = y.size();
    t_prev_.resize(n);
    t_cur_.resize(n);
    t_next_.resize(n);
    acc_.resize(n);
    for (std::size_t s = 0; s < n_sub; ++s) {
      // T_0 = y, T_1 = Z y
      t_prev_ = y;
      step(t_prev_, nullptr, cplx(1.0), t_cur_);
      acc_ = c[0] * t_prev_;
      if (c.size() > 1) acc_ += c[1] * t_cur_;
      ++stats.rhs_evaluations;
      for (std::size_t k = 2; k < c.size(); ++k) {
        step(t_cur_, &t_prev_, cplx(2.0), t_next_, c[k]);
        ++stats.rhs_evaluations;
        t_prev_.swap(t_cur_);
        t_cur_.swap(t_next_);
      }
      y.swap(acc_);
      ++stats.accepted;
    }
  }

 private:
  // out = w Z x - prev (prev optional), acc_ += ck out, in one pass over the
  // rows of L. Z = -i (L - centre) / a has its numerical range in
  // [-1, 1] x [-r/a, r/a].
  void step(const Vector& x, const Vector* prev, cplx w, Vector& out, cplx ck = cplx(0.0)) {
    const cplx scale = w * cplx(0.0, -1.0 / half_width_);
    const cplx* xv = x.data();
    const int* outer = rows_.outerIndexPtr();
    const int* inner = rows_.innerIndexPtr();
    const cplx* val = rows_.valuePtr();
    for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
      // Real arithmetic: std::complex products go through the slow
      // Annex G path without -fcx-limited-range.
      double re = 0.0, im = 0.0;
      for (int p = outer[i]; p < outer[i + 1]; ++p) {
        const double a = val[p].real(), b = val[p].imag();
        const double c = xv[inner[p]].real(), d = xv[inner[p]].imag();
        re += a * c - b * d;
        im += a * d + b * c;
      }
      cplx v = scale * (cplx(re, im) - centre_ * xv[i]);
      if (prev) v -= (*prev)[i];
      out[i] = v;
      acc_[i] += ck * v;
    }
  }

  const std::vector<cplx>& coefficients(double h) {
    auto it = cache_.lower_bound(h * (1.0 - 1e-12));
    if (it != cache_.end() && it->first <= h * (1.0 + 1e-12)) return it->second;
    const double x = half_width_ * h;
    const double growth = 1.0 + real_radius_ / half_width_;
    const auto kmax = static_cast<std::size_t>(std::ceil(x + 15.0 * std::cbrt(x) + 40.0));
    const std::vector<double> j = bessel_j_sequence(x, kmax);
    // exp(h L) = e^{h centre} sum_k eps_k i^k J_k(a h) T_k(Z)
    std::size_t last = 0;
    for (std::size_t k = 0; k <= kmax; ++k)
      if (std::abs(j[k]) * std::pow(growth, static_cast<double>(k)) > 1e-18) last = k;
    std::vector<cplx> c(last + 1);
    const cplx scale = std::exp(h * centre_);
    cplx ik(1.0, 0.0);
    for (std::size_t k = 0; k <= last; ++k) {
      c[k] = scale * (k == 0 ? 1.0 : 2.0) * ik * j[k];
      ik *= cplx(0.0, 1.0);
    }
    return cache_.emplace(h, std::move(c)).first->second;
  }

  Eigen::SparseMatrix<cplx, Eigen::RowMajor> rows_;
  cplx centre_;
  double half_width_ = 0.0;
  double real_radius_ = 0.0;
  std::map<double, std::vector<cplx>> cache_;
  Vector t_prev_, t_cur_, t_next_, acc_;
};

}  // namespace detail

inline constexpr std::size_t kDenseSuperoperatorCap = 4096;

/// Integrates d/dt vec(rho) = L vec(rho) and samples observables on the grid.
/// At every output time the state is symmetrized, rho <- (rho + rho^dag)/2,
/// after the Hermiticity defect has been recorded; positivity is only monitored.
inline Trajectory evolve(const Liouvillian& l, const DensityMatrix& rho0, const TimeGrid& grid,
                         const IntegratorSettings& settings, std::span<const Observable> observables,
                         bool store_states = false) {
  settings.validate();
  grid.validate();
  const std::size_t d = l.hilbert_dimension();
  if (rho0.dimension() != d) throw DimensionError("initial state dimension does not match the Liouvillian");
  if (rho0.space && !same_space(rho0.space, l.space()))
    throw DimensionError("initial state lives on a different space than the Liouvillian");
  {
    const StateDiagnostics d0 = validate_state(rho0.rho);
    if (d0.trace_error > 1e-9 || d0.hermiticity_error > 1e-10 || d0.min_eigenvalue < -1e-9)
      throw ValidationError("initial", "rho0 is not a valid density matrix");
  }

  Trajectory out;
  out.stats.method = settings.method;
  for (const auto& o : observables) out.names.push_back(o.name);

  Vector y = vectorize(rho0.rho);
  detail::AdaptiveStepper adaptive(l, settings, out.stats);
  std::optional<detail::ChebyshevPropagator> chebyshev;
  if (settings.method == Method::chebyshev) chebyshev.emplace(l);
  std::map<double, Matrix> propagators;
  if (settings.method == Method::expm && l.dimension() > kDenseSuperoperatorCap)
    throw ResourceError("matrix-exponential stepping needs a dense " + std::to_string(l.dimension()) +
                        "^2 superoperator, above the cap of " + std::to_string(kDenseSuperoperatorCap));
  const Matrix dense_l = settings.method == Method::expm ? l.to_dense() : Matrix();

  double t = 0.0;
  for (double t_out : grid.times) {
    if (t_out > t) {
      switch (settings.method) {
        case Method::adaptive: adaptive.advance(y, t, t_out); break;
        case Method::rk4: detail::rk4_advance(l, y, t, t_out, settings.fixed_step, out.stats); break;
        case Method::chebyshev: chebyshev->advance(y, t_out - t, out.stats); break;
        case Method::expm: {
          const double dt = t_out - t;
          // Grid spacings equal up to rounding share one propagator.
          auto it = propagators.lower_bound(dt * (1.0 - 1e-12));
          if (it == propagators.end() || it->first > dt * (1.0 + 1e-12)) {
            it = propagators.emplace(dt, Matrix((dense_l * cplx(dt, 0.0)).exp())).first;
            ++out.stats.exponentials;
          }
          y = it->second * y;
          ++out.stats.accepted;
          break;
        }
      }
      t = t_out;
    }
    Matrix rho = unvectorize(y, d);
    StateDiagnostics diag;
    if (settings.diagnostics) diag.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    y = vectorize(rho);
    if (settings.diagnostics) {
      const StateDiagnostics after = validate_state(rho);
      diag.trace_error = after.trace_error;
      diag.min_eigenvalue = after.min_eigenvalue;
    }
    std::vector<double> row;
    row.reserve(observables.size());
    for (const auto& o : observables) {
      const double v = o.eval(rho);
      if (!std::isfinite(v)) throw NumericalError("observable " + o.name + " is not finite at t = " + std::to_string(t));
      row.push_back(v);
    }
    out.times.push_back(t_out);
    out.values.push_back(std::move(row));
    out.diagnostics.push_back(diag);
    if (store_states) out.states.push_back(rho);
  }
  return out;
}

struct SteadyState {
  DensityMatrix state;
  std::size_t kernel_dimension = 0;
  bool degenerate = false;
  double residual = 0.0;  // max |L vec(rho)|
  StateDiagnostics diagnostics;
};

struct SteadyStateOptions {
  double rank_tolerance = 1e-9;  // relative pivot threshold for the kernel dimension
  std::size_t dense_cap = kDenseSuperoperatorCap;
  double residual_tolerance = 1e-10;
};

/// Null vector of L normalized to unit trace. The kernel dimension comes
/// from a rank-revealing QR of L^dagger. A unique kernel is solved by LU with
/// one row replaced by the trace functional; a degenerate kernel returns the
/// orthogonal projection of the maximally mixed state onto it.
inline SteadyState steady_state(const Liouvillian& l, const SteadyStateOptions& opt = {}) {
  const std::size_t n = l.dimension();
  const std::size_t d = l.hilbert_dimension();
  if (n != d * d) throw DimensionError("Liouvillian is not d^2 x d^2");
  if (n > opt.dense_cap)
    throw ResourceError("steady-state solve needs a dense " + std::to_string(n) + "^2 system, above the cap of " +
                        std::to_string(opt.dense_cap));
  const Matrix a = l.to_dense();
  const auto ni = static_cast<Eigen::Index>(n);

  Eigen::ColPivHouseholderQR<Matrix> qr(a.adjoint());
  qr.setThreshold(opt.rank_tolerance);
  const auto rank = static_cast<std::size_t>(qr.rank());
  SteadyState out;
  out.kernel_dimension = n - rank;
  if (out.kernel_dimension == 0)
    throw NumericalError("Liouvillian has no null vector within the rank tolerance");
  out.degenerate = out.kernel_dimension > 1;

  Vector x(ni);
  if (!out.degenerate) {
    Matrix sys = a;
    sys.row(0).setZero();
    for (std::size_t i = 0; i < d; ++i) sys(0, static_cast<Eigen::Index>(i * d + i)) = 1.0;
    Vector rhs = Vector::Zero(ni);
    rhs(0) = 1.0;
    x = sys.partialPivLu().solve(rhs);
  } else {
    const Matrix q = qr.householderQ();
    const Matrix kernel = q.rightCols(static_cast<Eigen::Index>(out.kernel_dimension));
    const Vector mixed = vectorize(Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) /
                                   static_cast<double>(d));
    x = kernel * (kernel.adjoint() * mixed);
  }
  Matrix rho = unvectorize(x, d);
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const Vector v = vectorize(rho);
  out.residual = (a * v).cwiseAbs().maxCoeff();
  if (!out.degenerate && out.residual > opt.residual_tolerance * std::max(1.0, a.cwiseAbs().maxCoeff()))
    throw NumericalError("steady-state residual " + std::to_string(out.residual) + " above tolerance");
  out.state = DensityMatrix{l.space(), rho};
  out.diagnostics = validate_state(rho);
  return out;
}

struct DecayFit {
  double fitted_rate = 0.0;    // 1/us, from the survival curve
  double analytic_rate = 0.0;  // omega^2 kappa / (omega^2 + kappa^2 / 4)
  double fit_residual = 0.0;   // rms of log-survival residuals inside the window
  bool flagged = false;        // residual above threshold: not a clean exponential
};

inline double adiabatic_decay_estimate(double omega_E, double kappa) {
  const double w2 = omega_E * omega_E;
  return w2 * kappa / (w2 + 0.25 * kappa * kappa);
}

/// Coupling that makes adiabatic_decay_estimate(omega, kappa) == gamma.
inline double coupling_for_decay(double gamma, double kappa) {
  if (!(gamma >= 0.0 && gamma < kappa)) throw ValidationError("gamma", "effective rate must lie in [0, kappa)");
  return std::sqrt(gamma * kappa * kappa / (4.0 * (kappa - gamma)));
}

/// Simulates an atom prepared in r with H = omega_E (|r><e| + h.c.) and the
/// jump sqrt(kappa)|g><e|, and fits exp(-gamma t) to the excited-manifold
/// survival P_r + P_e = 1 - P_g between the 0.9 and 0.1 crossings.
inline DecayFit fit_effective_decay(double omega_E, double kappa, double residual_threshold = 0.05) {
  if (!(omega_E >= 0.0)) throw ValidationError("omega_E", "must be >= 0");
  if (!(kappa > 0.0)) throw ValidationError("kappa", "must be > 0");
  DecayFit fit;
  fit.analytic_rate = adiabatic_decay_estimate(omega_E, kappa);
  if (omega_E == 0.0) return fit;

  auto space = std::make_shared<HilbertSpace>(
      SpaceKind::custom, 1, 4, std::vector<Configuration>{{Level::g}, {Level::r}, {Level::e}});
  AtomScheme scheme;
  scheme.engineered = EngineeredDecay{omega_E, kappa};
  const Liouvillian l = liouvillian(hamiltonian_full(scheme, PairCouplings::zero(1), space),
                                    collapse_operators(scheme, space));
  const auto g_index = static_cast<Eigen::Index>(space->index_of({Level::g}));
  const Observable survival{"survival", [g_index](const Matrix& rho) { return 1.0 - rho(g_index, g_index).real(); }};
  IntegratorSettings settings;
  settings.method = Method::expm;
  settings.diagnostics = false;

  double horizon = 3.0 / std::min(fit.analytic_rate, 0.5 * kappa);
  constexpr std::size_t samples = 4000;
  for (int attempt = 0; attempt < 8; ++attempt, horizon *= 2.0) {
    const Trajectory tr = evolve(l, DensityMatrix::basis_state(space, space->index_of({Level::r})),
                                 TimeGrid::uniform(horizon, horizon / samples), settings,
                                 std::span<const Observable>(&survival, 1));
    const std::vector<double> s = tr.series("survival");
    if (s.back() >= 0.1) continue;
    std::size_t i0 = 0;
    while (s[i0] > 0.9) ++i0;
    std::size_t i1 = i0;
    while (s[i1] >= 0.1) ++i1;
    if (i1 < i0 + 3) {
      // Window thinner than the sampling; refine by shortening the horizon.
      horizon = tr.times[std::min(i1 + 1, s.size() - 1)] / 4.0;
      continue;
    }
    // Least-squares line through (t, ln S).
    double st = 0, sy = 0, stt = 0, sty = 0;
    const double m = static_cast<double>(i1 - i0);
    for (std::size_t i = i0; i < i1; ++i) {
      const double tt = tr.times[i], yy = std::log(s[i]);
      st += tt;
      sy += yy;
      stt += tt * tt;
      sty += tt * yy;
    }
    const double slope = (m * sty - st * sy) / (m * stt - st * st);
    const double intercept = (sy - slope * st) / m;
    double res = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
      const double e = std::log(s[i]) - (intercept + slope * tr.times[i]);
      res += e * e;
    }
    fit.fitted_rate = -slope;
    fit.fit_residual = std::sqrt(res / m);
    fit.flagged = fit.fit_residual > residual_threshold;
    return fit;
  }
  throw NumericalError("survival did not fall below 0.1 within the simulated horizon");
}

}  // namespace rydark
