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

#include <gtest/gtest.h>

#include <random>

#include "rydark/observables.hpp"

using namespace rydark;

namespace {

Matrix random_state(Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(nd(rng), nd(rng));
  Matrix rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST(Populations, DarkStateOnItself) {
  auto sp = restricted_space(4);
  const auto d = dark_state(4, 1.0, 2.0, sp);
  EXPECT_NEAR(dark_state_population(DensityMatrix::pure(d), d), 1.0, 1e-15);
  EXPECT_NEAR(dark_state_population(DensityMatrix::basis_state(sp, 0), d), 0.5, 1e-15);  // 4 / (4 + 4)
}

TEST(Populations, SpaceMismatchThrows) {
  const auto d = dark_state(2, 1.0, 1.0, restricted_space(2));
  EXPECT_THROW(dark_state_population(DensityMatrix::basis_state(restricted_space(3), 0), d), DimensionError);
}

TEST(Purity, PureAndMixed) {
  auto sp = restricted_space(3);
  EXPECT_NEAR(purity(DensityMatrix::basis_state(sp, 2)), 1.0, 1e-15);
  EXPECT_NEAR(purity(DensityMatrix::maximally_mixed(sp)), 1.0 / 7.0, 1e-15);
  const Matrix rho = random_state(7, 4);
  EXPECT_NEAR(purity(rho), (rho * rho).trace().real(), 1e-14);
  EXPECT_LE(purity(rho), 1.0 + 1e-14);
  EXPECT_GE(purity(rho), 1.0 / 7.0 - 1e-14);
}

TEST(Populations, WState) {
  auto sp = restricted_space(3);
  const auto st = symmetric_states(*sp);
  const DensityMatrix w = DensityMatrix::pure(StateVector{sp, st.s_sym});
  EXPECT_NEAR(w_state_population(w, *sp), 1.0, 1e-15);
  EXPECT_NEAR(w_state_population(DensityMatrix::basis_state(sp, 4), *sp), 1.0 / 3.0, 1e-15);
}

TEST(Populations, CompositeDarkState) {
  auto half = restricted_space(2);
  auto c = composite_space(*half, *half);
  const auto d = dark_state(4, 1.0, 1.0, c);
  EXPECT_NEAR(composite_dark_population(DensityMatrix::pure(d), c, 1.0, 1.0), 1.0, 1e-15);
  // (G,G) has weight 1 / (1 + 2N) in the joint dark state
  EXPECT_NEAR(composite_dark_population(DensityMatrix::basis_state(c, 0), c, 1.0, 1.0), 0.2, 1e-15);
  EXPECT_THROW(composite_dark_population(DensityMatrix::basis_state(half, 0), half, 1.0, 1.0), ValidationError);
}

TEST(Populations, LevelCounts) {
  auto sp = full_space(2, 3);
  const auto rs = sp->index_of({Level::r, Level::s});
  const DensityMatrix rho = DensityMatrix::basis_state(sp, rs);
  EXPECT_EQ(level_population(rho.rho, *sp, Level::r), 1.0);
  EXPECT_EQ(level_population(rho.rho, *sp, Level::g), 0.0);
  const Matrix mixed = DensityMatrix::maximally_mixed(sp).rho;
  double total = 0.0;
  for (Level l : {Level::g, Level::r, Level::s}) total += level_population(mixed, *sp, l);
  EXPECT_NEAR(total, 2.0, 1e-15);
}

TEST(ObservableSpecs, StandardNamesEvaluate) {
  auto sp = restricted_excited_space(2);
  const Matrix rho = random_state(static_cast<Eigen::Index>(sp->dimension()), 8);
  for (const char* name : {"P_D", "P_W", "P_G", "purity", "n_g", "n_r", "n_s", "n_e"}) {
    const Observable o = make_observable(standard_observable(name, sp, 1.0, 1.0), *sp);
    EXPECT_EQ(o.name, name);
    EXPECT_TRUE(std::isfinite(o.eval(rho)));
  }
  const Observable pg = make_observable(standard_observable("P_G", sp, 1.0, 1.0), *sp);
  EXPECT_NEAR(pg.eval(rho), rho(0, 0).real(), 1e-15);
}

TEST(ObservableSpecs, FidelityEqualsPopulation) {
  auto sp = restricted_space(2);
  const auto d = dark_state(2, 1.0, 3.0, sp);
  ObservableSpec f = ObservableSpec::projector("F", d.amplitudes * 2.0);  // normalized on binding
  f.kind = ObservableKind::fidelity;
  const Matrix rho = random_state(5, 2);
  EXPECT_NEAR(make_observable(f, *sp).eval(rho), expectation(rho, d.amplitudes), 1e-14);
}

TEST(ObservableSpecs, Errors) {
  auto sp = restricted_space(2);
  EXPECT_THROW(standard_observable("n_e", sp, 1, 1), ValidationError);
  try {
    standard_observable("bogus", sp, 1, 1);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "observables");
  }
  EXPECT_THROW(make_observable(ObservableSpec::projector("x", Vector::Ones(3)), *sp), DimensionError);
}
