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

#include <set>

#include "rydark/hilbert.hpp"

using namespace rydark;

TEST(FullSpace, Dimensions) {
  EXPECT_EQ(full_space(3, 3)->dimension(), 27u);
  EXPECT_EQ(full_space(2, 4)->dimension(), 16u);
  EXPECT_EQ(full_space(6, 3)->dimension(), 729u);
  EXPECT_EQ(full_space(6, 4)->dimension(), 4096u);
}

TEST(FullSpace, CapIsAResourceError) {
  EXPECT_THROW(full_space(7, 4), ResourceError);
  EXPECT_THROW(full_space(8, 3), ResourceError);
  EXPECT_NO_THROW(full_space(8, 3, {}, 10000));
  EXPECT_THROW(full_space(0, 3), ValidationError);
  EXPECT_THROW(full_space(2, 5), ValidationError);
}

TEST(FullSpace, LexicographicPositionalOrder) {
  auto sp = full_space(3, 3);
  for (std::size_t i = 0; i < sp->dimension(); ++i) {
    const auto& c = sp->configuration(i);
    const std::size_t index = static_cast<std::size_t>(c[0]) * 9 + static_cast<std::size_t>(c[1]) * 3 +
                              static_cast<std::size_t>(c[2]);
    EXPECT_EQ(index, i);
  }
  EXPECT_EQ(sp->label(0), "ggg");
  EXPECT_EQ(sp->label(26), "sss");
  EXPECT_EQ(sp->label(5), "grs");
}

TEST(RestrictedSpace, OrderAndDimension) {
  EXPECT_EQ(restricted_space(10)->dimension(), 21u);
  EXPECT_EQ(restricted_space(20)->dimension(), 41u);
  auto sp = restricted_space(1);
  ASSERT_EQ(sp->dimension(), 3u);
  EXPECT_EQ(sp->label(0), "G");
  EXPECT_EQ(sp->label(1), "R_1");
  EXPECT_EQ(sp->label(2), "S_1");
  auto sp3 = restricted_space(3);
  EXPECT_EQ(sp3->label(3), "R_3");
  EXPECT_EQ(sp3->label(4), "S_1");
  EXPECT_EQ(restricted_excited_space(10)->dimension(), 31u);
  EXPECT_EQ(restricted_excited_space(2)->label(6), "E_2");
}

TEST(RestrictedSpace, AtMostOneExcitation) {
  auto sp = restricted_excited_space(5);
  for (const auto& c : sp->basis()) EXPECT_LE(std::count_if(c.begin(), c.end(), [](Level l) { return l != Level::g; }), 1);
}

TEST(CompositeSpace, DimensionsAndIndexArithmetic) {
  auto a = restricted_space(3), b = restricted_space(3);
  auto c = composite_space(*a, *b);
  EXPECT_EQ(c->dimension(), 49u);
  EXPECT_EQ(composite_space(*restricted_space(1), *restricted_space(1))->dimension(), 9u);
  EXPECT_EQ(c->label(0), "(G,G)");
  EXPECT_EQ(c->index_of(c->ground()), 0u);
  for (std::size_t l = 0; l < a->dimension(); ++l)
    for (std::size_t r = 0; r < b->dimension(); ++r) {
      Configuration cfg = a->configuration(l);
      cfg.insert(cfg.end(), b->configuration(r).begin(), b->configuration(r).end());
      EXPECT_EQ(c->index_of(cfg), l * b->dimension() + r);
      EXPECT_EQ(c->label(l * b->dimension() + r), "(" + a->label(l) + "," + b->label(r) + ")");
    }
}

TEST(CompositeSpace, RejectsNonRestrictedFactors) {
  EXPECT_THROW(composite_space(*full_space(2, 3), *restricted_space(2)), ValidationError);
  EXPECT_THROW(composite_space(*restricted_space(2), *restricted_space(3)), ValidationError);
}

TEST(Labels, BijectionOnEverySpace) {
  std::vector<SpacePtr> spaces = {full_space(3, 3), full_space(2, 4), restricted_space(4),
                                  restricted_excited_space(3),
                                  composite_space(*restricted_space(2), *restricted_space(2)),
                                  full_space(4, 3, {{0, 1}, {2, 3}})};
  for (const auto& sp : spaces) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < sp->dimension(); ++i) {
      EXPECT_EQ(sp->index_of_label(sp->label(i)), i) << sp->label(i);
      EXPECT_EQ(sp->index_of(sp->configuration(i)), i);
      seen.insert(sp->label(i));
    }
    EXPECT_EQ(seen.size(), sp->dimension());
  }
}

TEST(Labels, UnknownLabelNamesInitial) {
  auto sp = restricted_space(2);
  try {
    sp->index_of_label("R_3");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "initial");
  }
  EXPECT_EQ(sp->index_of_label("gs"), 4u);  // product form of S_2
  EXPECT_THROW(sp->index_of_label("rs"), ValidationError);
}

TEST(Embedding, RestrictedMapsInjectivelyIntoFull) {
  for (std::size_t n = 1; n <= 4; ++n) {
    auto full = full_space(n, 3);
    auto res = restricted_space(n);
    std::set<std::size_t> image;
    for (std::size_t i = 0; i < res->dimension(); ++i) image.insert(full->index_of(res->configuration(i)));
    EXPECT_EQ(image.size(), res->dimension());
    EXPECT_EQ(full->index_of(res->configuration(0)), 0u);
  }
}

TEST(Embedding, PerfectPairsReproduceRestricted) {
  for (std::size_t n = 1; n <= 4; ++n) {
    std::vector<std::pair<std::size_t, std::size_t>> all;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) all.emplace_back(i, j);
    EXPECT_EQ(full_space(n, 3, all)->dimension(), 2 * n + 1);
    EXPECT_EQ(full_space(n, 4, all)->dimension(), 3 * n + 1);
  }
}

TEST(SymmetricStates, UniformAndNormalized) {
  for (std::size_t n : {1u, 4u, 7u}) {
    auto sp = restricted_space(n);
    const auto st = symmetric_states(*sp);
    EXPECT_NEAR(st.s_sym.norm(), 1.0, 1e-15);
    EXPECT_NEAR(st.r_sym.norm(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(st.r_sym.dot(st.s_sym)), 0.0, 1e-15);
    for (std::size_t k = 0; k < n; ++k)
      EXPECT_NEAR(st.s_sym(static_cast<Eigen::Index>(1 + n + k)).real(), 1.0 / std::sqrt(double(n)), 1e-15);
  }
  const auto st1 = symmetric_states(*restricted_space(1));
  EXPECT_EQ(st1.s_sym(2), cplx(1.0, 0.0));
  const auto st4 = symmetric_states(*restricted_space(4));
  EXPECT_NEAR(st4.s_sym(5).real(), 0.5, 1e-15);
}
