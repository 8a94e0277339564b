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
#include <string>
#include <vector>

#include "rydark/core.hpp"
#include "rydark/dynamics.hpp"
#include "rydark/hilbert.hpp"
#include "rydark/operators.hpp"

namespace rydark {

namespace detail {

inline void check_state_dim(const Matrix& rho, const Vector& psi, const char* what) {
  if (rho.rows() != psi.size() || rho.cols() != psi.size())
    throw DimensionError(std::string(what) + ": state of dimension " + std::to_string(psi.size()) +
                         " against a density matrix of dimension " + std::to_string(rho.rows()));
}

}  // namespace detail

/// <psi|rho|psi>, real part.
inline double expectation(const Matrix& rho, const Vector& psi) {
  detail::check_state_dim(rho, psi, "projector population");
  return (psi.adjoint() * rho * psi)(0, 0).real();
}

inline double dark_state_population(const DensityMatrix& rho, const StateVector& psi_d) {
  if (rho.space && psi_d.space && !same_space(rho.space, psi_d.space))
    throw DimensionError("dark state and density matrix live on different spaces");
  return expectation(rho.rho, psi_d.amplitudes);
}

/// Tr[rho^2].
inline double purity(const Matrix& rho) { return (rho.array() * rho.transpose().array()).sum().real(); }
inline double purity(const DensityMatrix& rho) { return purity(rho.rho); }

/// Population of the symmetric single-s state (1/sqrt N) sum_k |S_k>.
inline double w_state_population(const DensityMatrix& rho, const HilbertSpace& space) {
  if (rho.dimension() != space.dimension()) throw DimensionError("w_state_population: dimension mismatch");
  return expectation(rho.rho, symmetric_states(space).s_sym);
}

/// Overlap with the dark state of both ensembles taken as one 2N-atom ensemble.
inline double composite_dark_population(const DensityMatrix& rho, const SpacePtr& space, double omega_R,
                                        double omega_M) {
  if (space->kind() != SpaceKind::composite)
    throw ValidationError("space", "composite_dark_population needs a composite space");
  if (rho.dimension() != space->dimension()) throw DimensionError("composite_dark_population: dimension mismatch");
  return expectation(rho.rho, dark_state(space->atoms(), omega_R, omega_M, space).amplitudes);
}

/// Mean number of atoms in `level`.
inline double level_population(const Matrix& rho, const HilbertSpace& space, Level level) {
  if (static_cast<std::size_t>(rho.rows()) != space.dimension())
    throw DimensionError("level_population: dimension mismatch");
  double p = 0.0;
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const auto& c = space.configuration(i);
    const auto n = std::count(c.begin(), c.end(), level);
    if (n) p += static_cast<double>(n) * rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
  }
  return p;
}

enum class ObservableKind { projector_population, purity, fidelity, level_population };

struct ObservableSpec {
  std::string name;
  ObservableKind kind = ObservableKind::projector_population;
  Vector target;  // projector_population / fidelity
  Level level = Level::g;

  static ObservableSpec projector(std::string name, Vector psi) {
    return {std::move(name), ObservableKind::projector_population, std::move(psi), Level::g};
  }
  static ObservableSpec state_purity(std::string name = "purity") {
    return {std::move(name), ObservableKind::purity, {}, Level::g};
  }
  static ObservableSpec level_count(std::string name, Level l) {
    return {std::move(name), ObservableKind::level_population, {}, l};
  }
};

/// Binds a spec to a space, checking target dimensions once up front.
inline Observable make_observable(const ObservableSpec& spec, const HilbertSpace& space) {
  switch (spec.kind) {
    case ObservableKind::projector_population:
    case ObservableKind::fidelity: {
      if (static_cast<std::size_t>(spec.target.size()) != space.dimension())
        throw DimensionError("observable " + spec.name + ": target has dimension " +
                             std::to_string(spec.target.size()) + ", space has " + std::to_string(space.dimension()));
      // Fidelity with a pure target is the same number; no square root anywhere.
      Vector psi = spec.target / spec.target.norm();
      return {spec.name, [psi](const Matrix& rho) { return expectation(rho, psi); }};
    }
    case ObservableKind::purity: return {spec.name, [](const Matrix& rho) { return purity(rho); }};
    case ObservableKind::level_population: {
      std::vector<double> weight(space.dimension(), 0.0);
      for (std::size_t i = 0; i < space.dimension(); ++i) {
        const auto& c = space.configuration(i);
        weight[i] = static_cast<double>(std::count(c.begin(), c.end(), spec.level));
      }
      return {spec.name, [weight](const Matrix& rho) {
                double p = 0.0;
                for (std::size_t i = 0; i < weight.size(); ++i)
                  if (weight[i] != 0.0) p += weight[i] * rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
                return p;
              }};
    }
  }
  throw ValidationError("observable", "unknown kind");
}

/// Standard observables by name: P_D (dark state), P_W (symmetric S state),
/// P_G (ground), purity, n_g / n_r / n_s / n_e (mean level occupation).
inline ObservableSpec standard_observable(const std::string& name, const SpacePtr& space, double omega_R,
                                          double omega_M) {
  const HilbertSpace& sp = *space;
  if (name == "P_D") return ObservableSpec::projector(name, dark_state(sp.atoms(), omega_R, omega_M, space).amplitudes);
  if (name == "P_W") return ObservableSpec::projector(name, symmetric_states(sp).s_sym);
  if (name == "P_G") {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(sp.dimension()));
    g(static_cast<Eigen::Index>(sp.index_of(sp.ground()))) = 1.0;
    return ObservableSpec::projector(name, g);
  }
  if (name == "purity") return ObservableSpec::state_purity();
  if (name == "n_g") return ObservableSpec::level_count(name, Level::g);
  if (name == "n_r") return ObservableSpec::level_count(name, Level::r);
  if (name == "n_s") return ObservableSpec::level_count(name, Level::s);
  if (name == "n_e") {
    if (sp.levels() != 4) throw ValidationError("observables", "n_e needs a 4-level model");
    return ObservableSpec::level_count(name, Level::e);
  }
  throw ValidationError("observables", "unknown observable '" + name +
                                           "' (expected P_D, P_W, P_G, purity, n_g, n_r, n_s or n_e)");
}

}  // namespace rydark
