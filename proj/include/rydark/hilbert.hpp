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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rydark/core.hpp"

namespace rydark {

enum class Level : std::uint8_t { g = 0, r = 1, s = 2, e = 3 };

inline char level_char(Level l) { return "grse"[static_cast<int>(l)]; }

/// Per-atom level assignment; every basis state of every space is one.
using Configuration = std::vector<Level>;

enum class SpaceKind { full3, full4, restricted, restricted_excited, composite, custom };

inline const char* to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::full3: return "full-3";
    case SpaceKind::full4: return "full-4";
    case SpaceKind::restricted: return "restricted";
    case SpaceKind::restricted_excited: return "restricted-e";
    case SpaceKind::composite: return "composite";
    case SpaceKind::custom: return "custom";
  }
  return "?";
}

inline constexpr std::size_t kDefaultDimensionCap = 4096;  // 4^6

class HilbertSpace;
using SpacePtr = std::shared_ptr<const HilbertSpace>;

/// An ordered set of product-basis configurations with a label <-> index map.
/// Every basis family (full, restricted, composite, hybrid) is a subset of the
/// full product basis, so operator assembly works on all of them alike.
class HilbertSpace {
 public:
  HilbertSpace(SpaceKind kind, std::size_t atoms, int levels, std::vector<Configuration> basis,
               std::size_t ensemble_atoms = 0)
      : kind_(kind), atoms_(atoms), levels_(levels), ensemble_atoms_(ensemble_atoms), basis_(std::move(basis)) {
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (basis_[i].size() != atoms_) throw DimensionError("configuration length differs from atom count");
      if (!index_.emplace(basis_[i], i).second) throw DimensionError("duplicate configuration in basis");
    }
  }

  SpaceKind kind() const { return kind_; }
  std::size_t atoms() const { return atoms_; }
  int levels() const { return levels_; }
  /// Atoms per ensemble for composite spaces, else atoms().
  std::size_t ensemble_atoms() const { return ensemble_atoms_ ? ensemble_atoms_ : atoms_; }
  std::size_t dimension() const { return basis_.size(); }
  const Configuration& configuration(std::size_t i) const { return basis_.at(i); }
  const std::vector<Configuration>& basis() const { return basis_; }

  std::optional<std::size_t> find(const Configuration& c) const {
    auto it = index_.find(c);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const Configuration& c) const {
    if (auto i = find(c)) return *i;
    throw DimensionError("configuration " + config_string(c) + " is not in the " + to_string(kind_) + " basis");
  }

  /// Human-readable label: "ggrs" for product spaces, "G"/"R_k"/"S_k"/"E_k"
  /// for restricted ones and "(S_1,G)" for composites. Atom indices are 1-based.
  std::string label(std::size_t i) const {
    const Configuration& c = configuration(i);
    switch (kind_) {
      case SpaceKind::restricted:
      case SpaceKind::restricted_excited: return symbolic(c, 0, atoms_);
      case SpaceKind::composite:
        return "(" + symbolic(c, 0, ensemble_atoms_) + "," + symbolic(c, ensemble_atoms_, atoms_) + ")";
      default: return config_string(c);
    }
  }

  /// Parses any label form accepted by label(), plus a bare product string.
  std::size_t index_of_label(std::string_view text) const {
    for (std::size_t i = 0; i < dimension(); ++i)
      if (label(i) == text) return i;
    if (text.size() == atoms_) {
      Configuration c;
      for (char ch : text) {
        switch (ch) {
          case 'g': c.push_back(Level::g); break;
          case 'r': c.push_back(Level::r); break;
          case 's': c.push_back(Level::s); break;
          case 'e': c.push_back(Level::e); break;
          default: c.clear(); break;
        }
        if (c.empty()) break;
      }
      if (c.size() == atoms_)
        if (auto idx = find(c)) return *idx;
    }
    throw ValidationError("initial", "label '" + std::string(text) + "' does not exist in the " + to_string(kind_) +
                                         " space of dimension " + std::to_string(dimension()));
  }

  /// Ground configuration |gg...g>.
  Configuration ground() const { return Configuration(atoms_, Level::g); }

  /// Configuration with a single atom k in level l, all others in g.
  Configuration single(std::size_t k, Level l) const {
    Configuration c = ground();
    c.at(k) = l;
    return c;
  }

  static std::string config_string(const Configuration& c) {
    std::string s;
    for (Level l : c) s += level_char(l);
    return s;
  }

  bool operator==(const HilbertSpace& other) const {
    return kind_ == other.kind_ && atoms_ == other.atoms_ && ensemble_atoms() == other.ensemble_atoms() &&
           basis_ == other.basis_;
  }

 private:
  static std::string symbolic(const Configuration& c, std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      if (c[k] != Level::g) return std::string(1, "GRSE"[static_cast<int>(c[k])]) + "_" + std::to_string(k - begin + 1);
    }
    return "G";
  }

  SpaceKind kind_;
  std::size_t atoms_;
  int levels_;
  std::size_t ensemble_atoms_;
  std::vector<Configuration> basis_;
  std::map<Configuration, std::size_t> index_;
};

inline bool same_space(const SpacePtr& a, const SpacePtr& b) { return a == b || (a && b && *a == *b); }

/// Lexicographic product basis, atom 0 most significant (base-`levels` digits).
/// Configurations doubly exciting a pair in `perfect_pairs` are dropped.
inline SpacePtr full_space(std::size_t atoms, int levels,
                           const std::vector<std::pair<std::size_t, std::size_t>>& perfect_pairs = {},
                           std::size_t cap = kDefaultDimensionCap) {
  if (atoms < 1) throw ValidationError("N", "need at least one atom");
  if (levels != 3 && levels != 4) throw ValidationError("levels", "must be 3 or 4");
  const double raw = std::pow(static_cast<double>(levels), static_cast<double>(atoms));
  if (perfect_pairs.empty() && raw > static_cast<double>(cap))
    throw ResourceError("full " + std::to_string(levels) + "-level space for N=" + std::to_string(atoms) +
                        " has dimension " + std::to_string(static_cast<long long>(raw)) + ", above the cap of " +
                        std::to_string(cap));
  if (raw > 2e7) throw ResourceError("product basis too large to enumerate: " + std::to_string(raw));

  std::vector<Configuration> basis;
  Configuration c(atoms, Level::g);
  const auto total = static_cast<std::size_t>(raw);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rest = n;
    for (std::size_t k = atoms; k-- > 0;) {
      c[k] = static_cast<Level>(rest % static_cast<std::size_t>(levels));
      rest /= static_cast<std::size_t>(levels);
    }
    bool keep = true;
    for (auto [i, j] : perfect_pairs)
      if (c[i] != Level::g && c[j] != Level::g) keep = false;
    if (keep) basis.push_back(c);
  }
  if (basis.size() > cap)
    throw ResourceError("space dimension " + std::to_string(basis.size()) + " exceeds the cap of " + std::to_string(cap));
  return std::make_shared<HilbertSpace>(levels == 3 ? SpaceKind::full3 : SpaceKind::full4, atoms, levels,
                                        std::move(basis));
}

/// Single-excitation space [G, R_1..R_N, S_1..S_N] of a perfectly blockaded ensemble.
inline SpacePtr restricted_space(std::size_t atoms) {
  if (atoms < 1) throw ValidationError("N", "need at least one atom");
  std::vector<Configuration> basis;
  basis.emplace_back(atoms, Level::g);
  for (Level l : {Level::r, Level::s})
    for (std::size_t k = 0; k < atoms; ++k) {
      Configuration c(atoms, Level::g);
      c[k] = l;
      basis.push_back(std::move(c));
    }
  return std::make_shared<HilbertSpace>(SpaceKind::restricted, atoms, 3, std::move(basis));
}

/// Restricted space augmented with the short-lived level: [G, R_k, S_k, E_k], 3N+1.
inline SpacePtr restricted_excited_space(std::size_t atoms) {
  if (atoms < 1) throw ValidationError("N", "need at least one atom");
  std::vector<Configuration> basis;
  basis.emplace_back(atoms, Level::g);
  for (Level l : {Level::r, Level::s, Level::e})
    for (std::size_t k = 0; k < atoms; ++k) {
      Configuration c(atoms, Level::g);
      c[k] = l;
      basis.push_back(std::move(c));
    }
  return std::make_shared<HilbertSpace>(SpaceKind::restricted_excited, atoms, 4, std::move(basis));
}

/// Two restricted ensembles, left-major: index(l, r) = l * dim(right) + r.
/// Atoms of `left` come first in every configuration.
inline SpacePtr composite_space(const HilbertSpace& left, const HilbertSpace& right) {
  if (left.kind() != SpaceKind::restricted || right.kind() != SpaceKind::restricted)
    throw ValidationError("composite", "both factors must be restricted spaces");
  if (left.atoms() != right.atoms())
    throw ValidationError("composite", "both ensembles must have the same atom count");
  std::vector<Configuration> basis;
  basis.reserve(left.dimension() * right.dimension());
  for (const auto& l : left.basis())
    for (const auto& r : right.basis()) {
      Configuration c = l;
      c.insert(c.end(), r.begin(), r.end());
      basis.push_back(std::move(c));
    }
  return std::make_shared<HilbertSpace>(SpaceKind::composite, left.atoms() + right.atoms(), 3, std::move(basis),
                                        left.atoms());
}

struct SymmetricStates {
  Vector r_sym;  // (1/sqrt N) sum_k |R_k>
  Vector s_sym;  // (1/sqrt N) sum_k |S_k>, the W state
};

/// Uniform superpositions over the single-r and single-s configurations.
inline SymmetricStates symmetric_states(const HilbertSpace& space) {
  const auto d = static_cast<Eigen::Index>(space.dimension());
  SymmetricStates out{Vector::Zero(d), Vector::Zero(d)};
  const double amp = 1.0 / std::sqrt(static_cast<double>(space.atoms()));
  for (std::size_t k = 0; k < space.atoms(); ++k) {
    out.r_sym(static_cast<Eigen::Index>(space.index_of(space.single(k, Level::r)))) = amp;
    out.s_sym(static_cast<Eigen::Index>(space.index_of(space.single(k, Level::s)))) = amp;
  }
  return out;
}

}  // namespace rydark
