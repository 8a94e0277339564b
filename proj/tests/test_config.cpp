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

#include "rydark/config.hpp"

using namespace rydark;

namespace {

const char* kBasic = R"(# restricted ensemble
[atom]
omega_R_MHz = 1
omega_M_MHz = 1.5
gamma_r_MHz = 2   # effective decay
; full-line comment
gamma_d_kHz = 10

[geometry]
N = 4

[run]
model = restricted
t_end_us = 5
dt_out_us = 0.05
observables = P_D, purity, P_W
)";

std::string error_field(const std::string& text) {
  try {
    normalize_units(parse_config_string(text));
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(ConfigParse, SectionsKeysLines) {
  const ConfigDocument doc = parse_config_string(kBasic);
  ASSERT_TRUE(doc.has("atom", "omega_M_MHz"));
  EXPECT_EQ(doc.find("atom", "omega_M_MHz")->value, "1.5");
  EXPECT_EQ(doc.find("atom", "gamma_r_MHz")->value, "2");
  EXPECT_EQ(doc.find("atom", "omega_R_MHz")->line, 3);
  EXPECT_EQ(doc.find("run", "observables")->value, "P_D, purity, P_W");
}

TEST(ConfigParse, SyntaxErrorsCarryLines) {
  try {
    parse_config_string("[atom]\nomega_R_MHz = 1\nomega_R_MHz = 2\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.field(), "omega_R_MHz");
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(parse_config_string("[bogus]\n"), ConfigError);
  EXPECT_THROW(parse_config_string("[atom]\n[atom]\n"), ConfigError);
  EXPECT_THROW(parse_config_string("omega_R_MHz = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_string("[atom]\njust words\n"), ConfigError);
  EXPECT_THROW(parse_config_string("[atom\n"), ConfigError);
}

TEST(ConfigNormalize, UnitsAndDefaults) {
  const ScenarioConfig c = normalize_units(parse_config_string(kBasic));
  EXPECT_DOUBLE_EQ(c.scheme.omega_R, kTwoPi);
  EXPECT_DOUBLE_EQ(c.scheme.omega_M, 1.5 * kTwoPi);
  EXPECT_DOUBLE_EQ(*c.scheme.gamma_r, 2 * kTwoPi);
  EXPECT_DOUBLE_EQ(c.scheme.gamma_d, 0.01 * kTwoPi);
  EXPECT_EQ(c.geometry.N, 4u);
  EXPECT_EQ(c.geometry.blockade, BlockadeMode::perfect);
  EXPECT_EQ(c.model, ModelKind::restricted);
  EXPECT_EQ(c.observables, (std::vector<std::string>{"P_D", "purity", "P_W"}));
  EXPECT_EQ(c.initial, "G");
  EXPECT_FALSE(c.method.has_value());
}

TEST(ConfigNormalize, RoundTripThroughDenormalize) {
  const std::string text = R"([atom]
omega_R_MHz = 1.2345678901234
omega_M_MHz = 4.47213595499958
omega_E_MHz = 24
kappa_MHz = 6
gamma_s_kHz = 5
gamma_r_intr_kHz = 5
gamma_d_kHz = 10
dephasing = s
dephasing_mode = collective
[geometry]
positions_um = 0,0,0; 3.3,0,0; 0,4.1,0.5
C6_rr = 140000
C6_ss = 90000
C3_rs = 3000
perfect_pairs = 1-2
[run]
model = full-4
t_end_us = 7.5
dt_out_us = 0.025
observables = P_D, n_e
initial = ggg
method = rk4
rtol = 1e-7
[sweep]
axis = kappa_MHz
values = 4, 5, 6
axis_2 = C3_rs
values_2 = 100, 1000
)";
  const ScenarioConfig a = normalize_units(parse_config_string(text));
  const ScenarioConfig b = normalize_units(denormalize(a));
  EXPECT_NEAR(a.scheme.omega_R, b.scheme.omega_R, 1e-12 * a.scheme.omega_R);
  EXPECT_NEAR(to_mhz(a.scheme.omega_R), 1.2345678901234, 1e-12);
  EXPECT_NEAR(to_khz(b.scheme.gamma_d), 10.0, 1e-12);
  EXPECT_NEAR(to_mhz(b.scheme.engineered->kappa), 6.0, 1e-12);
  EXPECT_NEAR(to_mhz(b.geometry.coefficients->C6_rr), 140000.0, 1e-12 * 140000.0);
  EXPECT_EQ(b.geometry.positions, a.geometry.positions);
  EXPECT_EQ(b.geometry.perfect_pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}}));
  EXPECT_EQ(b.scheme.dephasing_target, DephasingTarget::s_only);
  EXPECT_EQ(b.scheme.dephasing_mode, DephasingMode::collective);
  EXPECT_EQ(b.model, ModelKind::full4);
  EXPECT_EQ(b.initial, "ggg");
  EXPECT_EQ(*b.method, Method::rk4);
  EXPECT_EQ(*b.rtol, 1e-7);
  ASSERT_EQ(b.sweep.size(), 2u);
  EXPECT_EQ(b.sweep[1].key, "C3_rs");
  EXPECT_EQ(b.sweep[1].section, "geometry");
  EXPECT_EQ(b.sweep[0].values, (std::vector<double>{4, 5, 6}));
  // A second pass is a fixed point of the text form.
  EXPECT_EQ(denormalize(b).dump(), denormalize(a).dump());
}

TEST(ConfigNormalize, MissingSectionIsNamed) {
  try {
    normalize_units(parse_config_string("[geometry]\nN = 2\n[run]\nmodel = restricted\n"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "[atom]");
    EXPECT_NE(std::string(e.what()).find("[atom]"), std::string::npos);
  }
}

TEST(ConfigNormalize, RejectsInconsistentInput) {
  const std::string atom = "[atom]\nomega_R_MHz = 1\nomega_M_MHz = 1\ngamma_r_MHz = 2\n";
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 2\nfoo = 1\n[run]\nmodel = restricted\n"), "foo");
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 2\nmodel = restricted\n[run]\n"), "model");
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 2\n[run]\nmodel = nope\n"), "model");
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 2.5\n[run]\nmodel = restricted\n"), "N");
  EXPECT_EQ(error_field(atom + "[geometry]\n[run]\nmodel = restricted\n"), "N");
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 2\n[run]\nmodel = restricted\nt_end_us = -1\n"), "t_end_us");
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 2\n[run]\nmodel = restricted\ndt_out_us = 0\n"), "dt_out_us");
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 2\n[run]\nmodel = restricted\nmethod = euler\n"), "method");
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 2\n[run]\nmodel = restricted-e\n"), "model");
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 2\nV_rs_MHz = 1\n[run]\nmodel = restricted\n"), "geometry");
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 2\n[run]\nmodel = full-3\n"), "geometry");
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 2\nC6_ss = 5\n[run]\nmodel = full-3\n"), "positions_um");
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 2\nV_ss_MHz = 1\n[run]\nmodel = hybrid\n"), "geometry");
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 2\nV_ss_MHz = 1\n[run]\nmodel = composite\n"), "separation_um");
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 3\nperfect_pairs = 1-4\n[run]\nmodel = full-3\nV_rr_MHz = 1\n"),
            "V_rr_MHz");  // wrong section is reported before the pair
  EXPECT_EQ(error_field(atom + "[geometry]\nN = 3\nV_rr_MHz = 1\nperfect_pairs = 1-4\n[run]\nmodel = full-3\n"),
            "perfect_pairs");
  EXPECT_EQ(error_field(atom + "[geometry]\npositions_um = 0,0,0; 1,0,0\nN = 3\nV_rr_MHz = 1\n[run]\nmodel = full-3\n"),
            "positions_um");
  EXPECT_EQ(error_field("[atom]\nomega_R_MHz = 1\nomega_E_MHz = 3\n[geometry]\nN = 2\n[run]\nmodel = restricted-e\n"),
            "kappa_MHz");
  EXPECT_EQ(error_field("[atom]\nomega_R_MHz = 1\nomega_E_MHz = 3\nkappa_MHz = 2\ngamma_r_MHz = 1\n[geometry]\n"
                        "N = 2\n[run]\nmodel = restricted-e\n"),
            "gamma_r_MHz");
  EXPECT_EQ(error_field("[atom]\nomega_R_MHz = x\n[geometry]\nN = 2\n[run]\nmodel = restricted\n"), "omega_R_MHz");
}

TEST(ConfigNormalize, SweepValidation) {
  const std::string base =
      "[atom]\nomega_R_MHz = 1\nomega_M_MHz = 1\ngamma_r_MHz = 2\n[geometry]\nN = 4\n[run]\nmodel = hybrid\n";
  EXPECT_EQ(error_field(base + "[sweep]\naxis = V_rs_MHz\nvalues =\n"), "values");
  EXPECT_EQ(error_field(base + "[sweep]\naxis = V_rs_MHz\n"), "values");
  EXPECT_EQ(error_field(base + "[sweep]\nvalues = 1, 2\n"), "axis");
  EXPECT_EQ(error_field(base + "[sweep]\naxis = t_end_us\nvalues = 1\n"), "axis");
  EXPECT_EQ(error_field(base + "[sweep]\naxis = blockade\nvalues = 1\n"), "axis");
  EXPECT_EQ(error_field(base + "[sweep]\naxis = nope\nvalues = 1\n"), "axis");
  EXPECT_EQ(error_field(base + "[sweep]\naxis = V_rs_MHz\nvalues = 1\naxis_2 = V_rs_MHz\nvalues_2 = 2\n"), "axis_2");
  EXPECT_EQ(error_field(base + "[sweep]\naxis = V_rs_MHz\nvalues = 1\nextra = 2\n"), "extra");
  EXPECT_EQ(error_field(base + "[sweep]\n"), "axis");
  const ScenarioConfig ok =
      normalize_units(parse_config_string(base + "[sweep]\naxis = V_rs_MHz\nvalues = 0, 1, 3\n"));
  ASSERT_EQ(ok.sweep.size(), 1u);
  EXPECT_EQ(ok.sweep[0].values.size(), 3u);
}

TEST(ConfigNormalize, FullModelDefaultsToFiniteBlockade) {
  const ScenarioConfig c = normalize_units(parse_config_string(
      "[atom]\nomega_R_MHz = 1\nomega_M_MHz = 1\ngamma_r_MHz = 2\n[geometry]\nN = 3\nV_rr_MHz = 500\n"
      "V_ss_MHz = 500\nV_rs_MHz = 500\n[run]\nmodel = full-3\n"));
  EXPECT_EQ(c.geometry.blockade, BlockadeMode::finite);
  EXPECT_DOUBLE_EQ(*c.geometry.V_rs, 500 * kTwoPi);
}
