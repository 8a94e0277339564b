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

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rydark/core.hpp"

namespace rydark {

/// Which Rydberg levels the dephasing channels act on.
enum class DephasingTarget { both, r_only, s_only };

/// Independent per-atom noise, or one common-mode operator for the whole
/// ensemble (a global field fluctuation shifts every atom identically).
enum class DephasingMode { per_atom, collective };

struct EngineeredDecay {
  double omega_E = 0.0;  // r <-> e coupling, rad/us
  double kappa = 0.0;    // e -> g decay, 1/us
};

/// Per-atom level scheme g, r, s (and optionally e) with drives and rates.
/// Everything is stored in rad/us or 1/us.
struct AtomScheme {
  double omega_R = 0.0;
  double omega_M = 0.0;
  std::optional<EngineeredDecay> engineered;  // selects the 4-level model
  std::optional<double> gamma_r;              // direct effective r -> g decay
  std::vector<double> gamma_r_per_atom;       // overrides gamma_r per atom when non-empty
  double gamma_s = 0.0;
  double gamma_r_intrinsic = 0.0;
  double gamma_d = 0.0;
  DephasingTarget dephasing_target = DephasingTarget::both;
  DephasingMode dephasing_mode = DephasingMode::per_atom;

  bool four_level() const { return engineered.has_value(); }

  /// Effective r -> g rate of atom k in the 3-level description.
  double decay_rate(std::size_t k) const {
    if (!gamma_r_per_atom.empty()) {
      if (k >= gamma_r_per_atom.size())
        throw DimensionError("gamma_r_per_atom has no entry for atom " + std::to_string(k));
      return gamma_r_per_atom[k];
    }
    return gamma_r.value_or(0.0);
  }

  void validate() const {
    auto nonneg = [](const char* name, double v) {
      if (!std::isfinite(v) || v < 0.0) throw ValidationError(name, "must be finite and >= 0");
    };
    nonneg("omega_R", omega_R);
    nonneg("omega_M", omega_M);
    nonneg("gamma_s", gamma_s);
    nonneg("gamma_r_intrinsic", gamma_r_intrinsic);
    nonneg("gamma_d", gamma_d);
    if (gamma_r) nonneg("gamma_r", *gamma_r);
    for (double g : gamma_r_per_atom) nonneg("gamma_r_per_atom", g);
    if (engineered) {
      nonneg("omega_E", engineered->omega_E);
      nonneg("kappa", engineered->kappa);
      if (gamma_r || !gamma_r_per_atom.empty())
        throw ValidationError("gamma_r", "set either the engineered {omega_E, kappa} block or a direct gamma_r, not both");
    }
  }
};

/// Copy of `scheme` with the engineered block replaced by a direct decay rate.
inline AtomScheme with_effective_decay(AtomScheme scheme, double gamma) {
  scheme.engineered.reset();
  scheme.gamma_r_per_atom.clear();
  scheme.gamma_r = gamma;
  return scheme;
}

using Position = std::array<double, 3>;

/// Power-law coefficients, stored as rad/us * um^n.
struct CouplingCoefficients {
  double C6_rr = 0.0;
  double C6_ss = 0.0;
  double C3_rs = 0.0;
};

/// Pairwise interaction strengths (rad/us); symmetric with zero diagonal.
/// Pairs flagged `perfect` are infinitely blockaded: their doubly excited
/// states are removed from the basis instead of carrying a number.
struct PairCouplings {
  RealMatrix V_rr;
  RealMatrix V_ss;
  RealMatrix V_rs;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> perfect;

  std::size_t size() const { return static_cast<std::size_t>(V_rr.rows()); }
  bool is_perfect(std::size_t i, std::size_t j) const { return perfect(i, j); }

  std::vector<std::pair<std::size_t, std::size_t>> perfect_pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j)
        if (perfect(i, j)) out.emplace_back(i, j);
    return out;
  }

  static PairCouplings zero(std::size_t n) {
    PairCouplings c;
    const auto m = static_cast<Eigen::Index>(n);
    c.V_rr = RealMatrix::Zero(m, m);
    c.V_ss = RealMatrix::Zero(m, m);
    c.V_rs = RealMatrix::Zero(m, m);
    c.perfect.setConstant(m, m, false);
    return c;
  }

  /// Same finite strengths on every pair.
  static PairCouplings uniform(std::size_t n, double v_rr, double v_ss, double v_rs) {
    PairCouplings c = zero(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) {
          c.V_rr(i, j) = v_rr;
          c.V_ss(i, j) = v_ss;
          c.V_rs(i, j) = v_rs;
        }
    return c;
  }

  /// Every pair perfectly blockaded.
  static PairCouplings perfect_blockade(std::size_t n) {
    PairCouplings c = zero(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c.perfect(i, j) = i != j;
    return c;
  }
};

struct EnsembleGeometry {
  std::vector<Position> positions;  // um
  std::optional<CouplingCoefficients> coefficients;
  std::optional<PairCouplings> explicit_couplings;
  std::vector<std::pair<std::size_t, std::size_t>> perfect_pairs;

  std::size_t size() const {
    if (!positions.empty()) return positions.size();
    if (explicit_couplings) return explicit_couplings->size();
    return 0;
  }
};

inline double distance(const Position& a, const Position& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// V_rr = C6_rr / r^6, V_ss = C6_ss / r^6, V_rs = C3_rs / r^3 per pair, or the
/// explicit matrices when given. Override pairs are flagged, not valued.
inline PairCouplings pairwise_couplings(const EnsembleGeometry& geometry) {
  const std::size_t n = geometry.size();
  PairCouplings out;
  if (geometry.explicit_couplings) {
    out = *geometry.explicit_couplings;
    const auto m = static_cast<Eigen::Index>(n);
    if (out.V_ss.rows() != m || out.V_rs.rows() != m || out.V_rr.cols() != m)
      throw ValidationError("geometry", "explicit coupling matrices must all be " + std::to_string(n) + "x" + std::to_string(n));
    if (out.perfect.rows() != m) out.perfect.setConstant(m, m, false);
    for (const RealMatrix* v : {&out.V_rr, &out.V_ss, &out.V_rs}) {
      if (((*v) - v->transpose()).cwiseAbs().maxCoeff() > 0.0)
        throw ValidationError("geometry", "explicit coupling matrices must be symmetric");
      if (v->diagonal().cwiseAbs().maxCoeff() > 0.0)
        throw ValidationError("geometry", "explicit coupling matrices must have a zero diagonal");
    }
  } else {
    if (!geometry.coefficients)
      throw ValidationError("geometry", "need either coupling coefficients or explicit matrices");
    const auto& c = *geometry.coefficients;
    if (c.C6_rr < 0 || c.C6_ss < 0 || c.C3_rs < 0)
      throw ValidationError("geometry", "coupling coefficients must be >= 0");
    out = PairCouplings::zero(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double r = distance(geometry.positions[i], geometry.positions[j]);
        if (!(r > 0.0))
          throw ValidationError("positions_um", "atoms " + std::to_string(i) + " and " + std::to_string(j) +
                                                    " coincide (singular coupling)");
        const double r3 = r * r * r;
        const double r6 = r3 * r3;
        out.V_rr(i, j) = out.V_rr(j, i) = c.C6_rr / r6;
        out.V_ss(i, j) = out.V_ss(j, i) = c.C6_ss / r6;
        out.V_rs(i, j) = out.V_rs(j, i) = c.C3_rs / r3;
      }
    }
  }
  for (auto [i, j] : geometry.perfect_pairs) {
    if (i >= n || j >= n || i == j)
      throw ValidationError("blockade_override", "invalid pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    out.perfect(i, j) = out.perfect(j, i) = true;
    out.V_rr(i, j) = out.V_rr(j, i) = 0.0;
    out.V_ss(i, j) = out.V_ss(j, i) = 0.0;
    out.V_rs(i, j) = out.V_rs(j, i) = 0.0;
  }
  return out;
}

/// Distance at which the same-level s-s van der Waals shift equals omega_R.
inline double blockade_radius(double C6_ss, double omega_R) {
  if (!(C6_ss > 0.0)) throw ValidationError("C6_ss", "must be > 0");
  if (!(omega_R > 0.0)) throw ValidationError("omega_R", "must be > 0");
  return std::pow(C6_ss / omega_R, 1.0 / 6.0);
}

}  // namespace rydark
