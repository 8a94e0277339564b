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
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rydark/core.hpp"
#include "rydark/hilbert.hpp"
#include "rydark/model.hpp"

namespace rydark {

struct QOperator {
  SpacePtr space;
  SparseMatrix matrix;
  bool hermitian = false;

  std::size_t dimension() const { return static_cast<std::size_t>(matrix.rows()); }
  Matrix dense() const { return Matrix(matrix); }
};

/// Largest entry of A - A^dagger.
inline double hermiticity_defect(const SparseMatrix& a) {
  const SparseMatrix diff = a - SparseMatrix(a.adjoint());
  double m = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

struct StateVector {
  SpacePtr space;
  Vector amplitudes;
};

struct DensityMatrix {
  SpacePtr space;
  Matrix rho;

  std::size_t dimension() const { return static_cast<std::size_t>(rho.rows()); }

  static DensityMatrix pure(const StateVector& psi) {
    return {psi.space, psi.amplitudes * psi.amplitudes.adjoint()};
  }

  /// |i><i| for basis index i.
  static DensityMatrix basis_state(SpacePtr space, std::size_t i) {
    const auto d = static_cast<Eigen::Index>(space->dimension());
    DensityMatrix out{std::move(space), Matrix::Zero(d, d)};
    out.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    return out;
  }

  static DensityMatrix maximally_mixed(SpacePtr space) {
    const auto d = static_cast<Eigen::Index>(space->dimension());
    return {std::move(space), Matrix::Identity(d, d) / static_cast<double>(d)};
  }
};

/// A jump operator with its rate folded in: operator = sqrt(rate) * structure.
struct LindbladChannel {
  std::string name;
  QOperator op;
};

/// Interaction strengths between the two ensembles of a composite space,
/// indexed [left atom][right atom].
struct CrossCouplings {
  RealMatrix V_rr;
  RealMatrix V_ss;
  RealMatrix V_rs;
};

namespace detail {

struct PairTerm {
  double rr = 0.0;
  double ss = 0.0;
  double rs = 0.0;
  bool excluded = false;
};

inline bool is_rydberg(Level l) { return l == Level::r || l == Level::s; }

/// Generic rotating-frame Hamiltonian on any product-basis subspace:
/// single-atom drives g<->r (omega_R), r<->s (omega_M), r<->e (omega_E), the
/// van der Waals shifts on rr / ss pairs and the rs <-> sr exchange.
/// Transitions leaving the space are dropped, which is exactly the
/// projection onto the subspace.
template <class PairFn>
SparseMatrix assemble_hamiltonian(const HilbertSpace& space, const AtomScheme& scheme, PairFn&& pair) {
  const std::size_t d = space.dimension();
  const std::size_t n = space.atoms();
  const double omega_E = scheme.engineered ? scheme.engineered->omega_E : 0.0;
  std::vector<Triplet> triplets;
  triplets.reserve(d * (2 * n + 1));

  auto couple = [&](std::size_t col, Configuration& c, std::size_t k, Level to, double w) {
    if (w == 0.0) return;
    const Level from = c[k];
    c[k] = to;
    if (auto row = space.find(c))
      triplets.emplace_back(static_cast<int>(*row), static_cast<int>(col), cplx(w, 0.0));
    c[k] = from;
  };

  for (std::size_t col = 0; col < d; ++col) {
    Configuration c = space.configuration(col);
    for (std::size_t k = 0; k < n; ++k) {
      switch (c[k]) {
        case Level::g: couple(col, c, k, Level::r, scheme.omega_R); break;
        case Level::r:
          couple(col, c, k, Level::g, scheme.omega_R);
          couple(col, c, k, Level::s, scheme.omega_M);
          couple(col, c, k, Level::e, omega_E);
          break;
        case Level::s: couple(col, c, k, Level::r, scheme.omega_M); break;
        case Level::e: couple(col, c, k, Level::r, omega_E); break;
      }
    }
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_rydberg(c[i])) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!is_rydberg(c[j])) continue;
        const PairTerm t = pair(i, j);
        if (t.excluded)
          throw DimensionError("basis state " + HilbertSpace::config_string(c) +
                               " doubly excites a perfectly blockaded pair");
        if (c[i] == Level::r && c[j] == Level::r) diag += t.rr;
        else if (c[i] == Level::s && c[j] == Level::s) diag += t.ss;
        else if (t.rs != 0.0) {
          std::swap(c[i], c[j]);
          if (auto row = space.find(c))
            triplets.emplace_back(static_cast<int>(*row), static_cast<int>(col), cplx(t.rs, 0.0));
          std::swap(c[i], c[j]);
        }
      }
    }
    if (diag != 0.0) triplets.emplace_back(static_cast<int>(col), static_cast<int>(col), cplx(diag, 0.0));
  }
  SparseMatrix h(static_cast<int>(d), static_cast<int>(d));
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

inline void check_levels(const HilbertSpace& space, const AtomScheme& scheme) {
  if (space.levels() == 4 && !scheme.four_level())
    throw ValidationError("model", "a 4-level space needs the engineered {omega_E, kappa} block");
  if (space.levels() == 3 && scheme.four_level())
    throw ValidationError("model", "the engineered {omega_E, kappa} block needs a 4-level space");
}

/// |to><from| acting on atom k, restricted to the space.
inline SparseMatrix site_operator(const HilbertSpace& space, std::size_t k, Level to, Level from, double amplitude) {
  const std::size_t d = space.dimension();
  std::vector<Triplet> triplets;
  for (std::size_t col = 0; col < d; ++col) {
    Configuration c = space.configuration(col);
    if (c[k] != from) continue;
    c[k] = to;
    if (auto row = space.find(c))
      triplets.emplace_back(static_cast<int>(*row), static_cast<int>(col), cplx(amplitude, 0.0));
  }
  SparseMatrix m(static_cast<int>(d), static_cast<int>(d));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

/// amplitude * sum_k |l_k><l_k|, i.e. the number of atoms in level l.
inline SparseMatrix level_number(const HilbertSpace& space, Level l, double amplitude) {
  const std::size_t d = space.dimension();
  std::vector<Triplet> triplets;
  for (std::size_t i = 0; i < d; ++i) {
    const auto count = std::count(space.configuration(i).begin(), space.configuration(i).end(), l);
    if (count) triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), cplx(amplitude * double(count), 0.0));
  }
  SparseMatrix m(static_cast<int>(d), static_cast<int>(d));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace detail

/// Full N-atom Hamiltonian: sum_k H_k + van der Waals shifts + rs exchange.
/// Also accepts custom (hybrid) spaces built from product configurations.
inline QOperator hamiltonian_full(const AtomScheme& scheme, const PairCouplings& couplings, const SpacePtr& space) {
  scheme.validate();
  if (space->kind() != SpaceKind::full3 && space->kind() != SpaceKind::full4 && space->kind() != SpaceKind::custom)
    throw ValidationError("model", std::string("hamiltonian_full needs a product space, got ") + to_string(space->kind()));
  detail::check_levels(*space, scheme);
  if (couplings.size() != space->atoms())
    throw DimensionError("coupling matrices are " + std::to_string(couplings.size()) + "x" +
                         std::to_string(couplings.size()) + " but the space has " + std::to_string(space->atoms()) +
                         " atoms");
  auto pair = [&](std::size_t i, std::size_t j) {
    return detail::PairTerm{couplings.V_rr(i, j), couplings.V_ss(i, j), couplings.V_rs(i, j),
                            couplings.is_perfect(i, j)};
  };
  return {space, detail::assemble_hamiltonian(*space, scheme, pair), true};
}

/// Blockade-restricted Hamiltonian sum_k (omega_R |G><R_k| + omega_M |R_k><S_k| + h.c.),
/// plus omega_E |R_k><E_k| on the 3N+1 space. On a composite space each
/// ensemble carries its own restricted Hamiltonian and `cross` adds the finite
/// inter-ensemble terms.
inline QOperator hamiltonian_restricted(const AtomScheme& scheme, const SpacePtr& space,
                                        const std::optional<CrossCouplings>& cross = std::nullopt) {
  scheme.validate();
  detail::check_levels(*space, scheme);
  switch (space->kind()) {
    case SpaceKind::restricted:
    case SpaceKind::restricted_excited: {
      auto none = [](std::size_t, std::size_t) { return detail::PairTerm{}; };
      return {space, detail::assemble_hamiltonian(*space, scheme, none), true};
    }
    case SpaceKind::composite: {
      if (!cross) throw ValidationError("cross_couplings", "a composite space needs inter-ensemble couplings");
      const std::size_t nl = space->ensemble_atoms();
      const std::size_t nr = space->atoms() - nl;
      for (const RealMatrix* m : {&cross->V_rr, &cross->V_ss, &cross->V_rs})
        if (static_cast<std::size_t>(m->rows()) != nl || static_cast<std::size_t>(m->cols()) != nr)
          throw DimensionError("cross couplings must be " + std::to_string(nl) + "x" + std::to_string(nr));
      auto pair = [&](std::size_t i, std::size_t j) {
        if (i < nl && j >= nl)
          return detail::PairTerm{cross->V_rr(i, j - nl), cross->V_ss(i, j - nl), cross->V_rs(i, j - nl), false};
        return detail::PairTerm{};
      };
      return {space, detail::assemble_hamiltonian(*space, scheme, pair), true};
    }
    default:
      throw ValidationError("model", std::string("hamiltonian_restricted needs a restricted or composite space, got ") +
                                         to_string(space->kind()));
  }
}

/// (omega_M |G> - omega_R sum_k |S_k>) / sqrt(omega_M^2 + N omega_R^2), the
/// zero-energy eigenstate of the restricted Hamiltonian without R components.
/// Works on any space holding G and every S_k (restricted, composite as a
/// single 2N-atom ensemble, hybrid, full).
inline StateVector dark_state(std::size_t atoms, double omega_R, double omega_M, const SpacePtr& space) {
  if (atoms != space->atoms())
    throw DimensionError("dark state for N=" + std::to_string(atoms) + " requested on a space with " +
                         std::to_string(space->atoms()) + " atoms");
  if (omega_R == 0.0 && omega_M == 0.0) throw ValidationError("omega_R", "dark state undefined when both drives vanish");
  const double omega_n = std::sqrt(omega_M * omega_M + static_cast<double>(atoms) * omega_R * omega_R);
  StateVector psi{space, Vector::Zero(static_cast<Eigen::Index>(space->dimension()))};
  psi.amplitudes(static_cast<Eigen::Index>(space->index_of(space->ground()))) = omega_M / omega_n;
  for (std::size_t k = 0; k < atoms; ++k)
    psi.amplitudes(static_cast<Eigen::Index>(space->index_of(space->single(k, Level::s)))) = -omega_R / omega_n;
  return psi;
}

/// Jump operators for `scheme` on `space`; zero-rate channels are omitted.
///  - 3-level spaces: sqrt(gamma_k) |g_k><r_k| (engineered effective decay)
///  - 4-level spaces: sqrt(kappa) |g_k><e_k| (omega_E lives in the Hamiltonian)
///  - intrinsic sqrt(gamma_s) |g_k><s_k|, sqrt(gamma_r_intrinsic) |g_k><r_k|
///  - dephasing sqrt(2 gamma_d) P_s, sqrt(2 gamma_d) P_r per atom, or one
///    common-mode operator per level in collective mode.
inline std::vector<LindbladChannel> collapse_operators(const AtomScheme& scheme, const SpacePtr& space) {
  scheme.validate();
  detail::check_levels(*space, scheme);
  const HilbertSpace& sp = *space;
  const std::size_t n = sp.atoms();
  std::vector<LindbladChannel> out;
  auto push = [&](std::string name, SparseMatrix m) {
    if (m.nonZeros() == 0) return;
    out.push_back({std::move(name), QOperator{space, std::move(m), false}});
  };
  for (std::size_t k = 0; k < n; ++k) {
    const std::string site = std::to_string(k + 1);
    if (scheme.four_level()) {
      const double kappa = scheme.engineered->kappa;
      if (kappa > 0) push("kappa_" + site, detail::site_operator(sp, k, Level::g, Level::e, std::sqrt(kappa)));
    } else {
      const double g = scheme.decay_rate(k);
      if (g > 0) push("gamma_" + site, detail::site_operator(sp, k, Level::g, Level::r, std::sqrt(g)));
    }
    if (scheme.gamma_s > 0)
      push("gamma_s_" + site, detail::site_operator(sp, k, Level::g, Level::s, std::sqrt(scheme.gamma_s)));
    if (scheme.gamma_r_intrinsic > 0)
      push("gamma_r_intr_" + site,
           detail::site_operator(sp, k, Level::g, Level::r, std::sqrt(scheme.gamma_r_intrinsic)));
  }
  if (scheme.gamma_d > 0) {
    const double amp = std::sqrt(2.0 * scheme.gamma_d);
    std::vector<Level> targets;
    if (scheme.dephasing_target != DephasingTarget::r_only) targets.push_back(Level::s);
    if (scheme.dephasing_target != DephasingTarget::s_only) targets.push_back(Level::r);
    for (Level l : targets) {
      const std::string lname(1, level_char(l));
      if (scheme.dephasing_mode == DephasingMode::collective) {
        push("dephase_" + lname, detail::level_number(sp, l, amp));
      } else {
        for (std::size_t k = 0; k < n; ++k)
          push("dephase_" + lname + "_" + std::to_string(k + 1), detail::site_operator(sp, k, l, l, amp));
      }
    }
  }
  return out;
}

/// Linear generator of the master equation on column-stacked density
/// matrices, vec(rho)[i + j d] = rho(i, j):
///   L = -i (1 (x) H - H^T (x) 1) + sum_k [conj(C_k) (x) C_k
///        - 1/2 (1 (x) C_k^dag C_k) - 1/2 ((C_k^dag C_k)^T (x) 1)].
/// A dense copy is kept when d^2 is below the threshold.
class Liouvillian {
 public:
  static constexpr std::size_t kDefaultDenseThreshold = 256;

  Liouvillian(SpacePtr space, SparseMatrix matrix, std::size_t dense_threshold = kDefaultDenseThreshold)
      : space_(std::move(space)), matrix_(std::move(matrix)) {
    matrix_.makeCompressed();
    if (static_cast<std::size_t>(matrix_.rows()) < dense_threshold) dense_ = Matrix(matrix_);
  }

  const SpacePtr& space() const { return space_; }
  std::size_t hilbert_dimension() const { return space_->dimension(); }
  std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }
  const SparseMatrix& sparse() const { return matrix_; }
  bool is_dense() const { return dense_.has_value(); }
  Matrix to_dense() const { return dense_ ? *dense_ : Matrix(matrix_); }

  void apply(const Vector& x, Vector& y) const {
    if (dense_) y.noalias() = (*dense_) * x;
    else y.noalias() = matrix_ * x;
  }

 private:
  SpacePtr space_;
  SparseMatrix matrix_;
  std::optional<Matrix> dense_;
};

inline Liouvillian liouvillian(const QOperator& h, const std::vector<LindbladChannel>& channels,
                               std::size_t dense_threshold = Liouvillian::kDefaultDenseThreshold) {
  const std::size_t d = h.dimension();
  for (const auto& c : channels) {
    if (c.op.dimension() != d) throw DimensionError("channel " + c.name + " has a different dimension than H");
    if (h.space && c.op.space && !same_space(h.space, c.op.space))
      throw DimensionError("channel " + c.name + " lives on a different space than H");
  }
  const int di = static_cast<int>(d);
  std::vector<Triplet> t;

  // A (x) 1 and 1 (x) B in column-stacking index arithmetic.
  auto add_right = [&](const SparseMatrix& a, cplx scale) {  // a^T acting from the right: (a^T (x) 1)
    for (int k = 0; k < a.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
        // (a^T)(col,row) = a(row,col); block (col,row) of the identity pattern.
        const int ar = static_cast<int>(it.row()), ac = static_cast<int>(it.col());
        for (int i = 0; i < di; ++i) t.emplace_back(i + ac * di, i + ar * di, scale * it.value());
      }
  };
  auto add_left = [&](const SparseMatrix& a, cplx scale) {  // 1 (x) a
    for (int k = 0; k < a.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
        const int ar = static_cast<int>(it.row()), ac = static_cast<int>(it.col());
        for (int j = 0; j < di; ++j) t.emplace_back(ar + j * di, ac + j * di, scale * it.value());
      }
  };

  const cplx minus_i(0.0, -1.0);
  add_left(h.matrix, minus_i);
  add_right(h.matrix, -minus_i);
  for (const auto& ch : channels) {
    const SparseMatrix& c = ch.op.matrix;
    const SparseMatrix cdc = SparseMatrix(c.adjoint()) * c;
    add_left(cdc, -0.5);
    add_right(cdc, -0.5);
    // conj(C) (x) C
    for (int k1 = 0; k1 < c.outerSize(); ++k1)
      for (SparseMatrix::InnerIterator a(c, k1); a; ++a)
        for (int k2 = 0; k2 < c.outerSize(); ++k2)
          for (SparseMatrix::InnerIterator b(c, k2); b; ++b)
            t.emplace_back(static_cast<int>(a.row()) * di + static_cast<int>(b.row()),
                           static_cast<int>(a.col()) * di + static_cast<int>(b.col()),
                           std::conj(a.value()) * b.value());
  }
  SparseMatrix l(di * di, di * di);
  l.setFromTriplets(t.begin(), t.end());
  l.prune(cplx(0.0, 0.0));
  return Liouvillian(h.space, std::move(l), dense_threshold);
}

/// Column-stacked view helpers.
inline Vector vectorize(const Matrix& rho) { return Eigen::Map<const Vector>(rho.data(), rho.size()); }
inline Matrix unvectorize(const Vector& v, std::size_t d) {
  return Eigen::Map<const Matrix>(v.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

/// Debug dump: one "row col real imag" line per stored nonzero, row-major,
/// zero-based indices, 17 significant digits.
inline void write_operator_dump(std::ostream& os, const SparseMatrix& m) {
  std::vector<std::tuple<int, int, cplx>> entries;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  char buf[128];
  for (const auto& [r, c, v] : entries) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", r, c, v.real(), v.imag());
    os << buf;
  }
}

}  // namespace rydark
