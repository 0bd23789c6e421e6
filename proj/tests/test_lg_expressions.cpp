#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lglab/lg_expressions.hpp"
#include "lglab/verification.hpp"

using namespace lglab;
using std::numbers::pi;

namespace {

ScenarioConfig unitary_cfg(double th, double ph, double eta, double g1, double g2) {
  ScenarioConfig c;
  c.state = {th, ph};
  c.measurement.eta = eta;
  c.dynamics = UnitaryDyn{g1, g2};
  return c;
}

ScenarioConfig channel_cfg(double th, double eta, double p, double g12, double g23, double g13) {
  ScenarioConfig c;
  c.state = {th, 0.0};
  c.measurement.eta = eta;
  c.dynamics = ChannelDyn{p, g12, g23, g13};
  return c;
}

}  // namespace

TEST(LgExpressions, LudersPointOfStandardExpression) {
  const LgValues v = evaluate_numeric(unitary_cfg(0.0, 0.0, 1.0, 2 * pi / 3, pi / 6));
  EXPECT_NEAR(v.L, 1.5, 1e-12);
  EXPECT_NEAR(closed_form::unitary_unbiased_L(1.0, 2 * pi / 3, pi / 6), 1.5, 1e-12);
}

TEST(LgExpressions, LudersPointOfThirdOrderExpression) {
  const LgValues v = evaluate_numeric(unitary_cfg(pi / 4, pi / 2, 1.0, 3 * pi / 4, pi / 4));
  EXPECT_NEAR(v.V, 2.0, 1e-12);
}

TEST(LgExpressions, AlgebraicMaximumUnderDamping) {
  const LgValues v = evaluate_numeric(channel_cfg(0.0, 1.0, 0.0, 1.0, 0.0, 0.0));
  EXPECT_NEAR(v.L, 3.0, 1e-12);
  EXPECT_NEAR(v.V, 3.0, 1e-12);
  EXPECT_NEAR(v.correlators.m1m2, -1.0, 1e-12);
  EXPECT_NEAR(v.correlators.m2m3, 1.0, 1e-12);
  EXPECT_NEAR(v.correlators.m1m3, 1.0, 1e-12);
  EXPECT_NEAR(v.correlators.m1m2m3, 1.0, 1e-12);
  EXPECT_NEAR(v.correlators.m2, -1.0, 1e-12);
}

TEST(LgExpressions, ClosedFormsAgreeWithSequentialPipeline) {
  ConfigSampler rng(99);
  for (Regime r : ConfigSampler::kCoveredRegimes) {
    for (int t = 0; t < 300; ++t) {
      const ScenarioConfig cfg = rng.sample(r);
      const LgValues v = evaluate_numeric(cfg);
      ASSERT_NEAR(closed_form_L(cfg), v.L, 1e-9) << regime_name(r);
      ASSERT_NEAR(closed_form_V(cfg), v.V, 1e-9) << regime_name(r);
    }
  }
}

TEST(LgExpressions, UnitaryCorrelatorFormsAtArbitraryBias) {
  ConfigSampler rng(7);
  for (int t = 0; t < 300; ++t) {
    const ScenarioConfig cfg = rng.sample(Regime::unitary_free);
    const Correlators c = measure_correlators(cfg);
    const double th = cfg.state.theta, ph = cfg.state.phi, a = cfg.measurement.alpha, e = cfg.measurement.eta;
    const double g1 = cfg.unitary().g1, g2 = cfg.unitary().g2;
    EXPECT_NEAR(closed_form::unitary_m1m2(th, ph, a, e, g1), c.m1m2, 1e-10);
    EXPECT_NEAR(closed_form::unitary_m2m3(th, ph, a, e, g1, g2), c.m2m3, 1e-10);
    EXPECT_NEAR(closed_form::unitary_m1m3(th, ph, a, e, g1, g2), c.m1m3, 1e-10);
    EXPECT_NEAR(closed_form::unitary_m1m2m3(th, ph, a, e, g1, g2), c.m1m2m3, 1e-10);
    EXPECT_NEAR(closed_form::unitary_m2(th, ph, a, e, g1), c.m2, 1e-10);
  }
}

TEST(LgExpressions, ChannelCorrelatorFormsAtArbitraryBias) {
  ConfigSampler rng(8);
  for (int t = 0; t < 300; ++t) {
    const ScenarioConfig cfg = rng.sample(Regime::channel_free);
    const Correlators c = measure_correlators(cfg);
    const ChannelDyn& d = cfg.channel();
    const double z = std::cos(2 * cfg.state.theta), a = cfg.measurement.alpha, e = cfg.measurement.eta;
    EXPECT_NEAR(closed_form::channel_m1m2(z, a, e, d.p, d.gamma12), c.m1m2, 1e-12);
    EXPECT_NEAR(closed_form::channel_m2m3(z, a, e, d.p, d.gamma12, d.gamma23), c.m2m3, 1e-12);
    EXPECT_NEAR(closed_form::channel_m1m3(z, a, e, d.p, d.effective_gamma13()), c.m1m3, 1e-12);
    EXPECT_NEAR(closed_form::channel_m1m2m3(z, a, e, d.p, d.gamma12, d.gamma23), c.m1m2m3, 1e-12);
    EXPECT_NEAR(closed_form::channel_m2(z, a, e, d.p, d.gamma12), c.m2, 1e-12);
  }
}

TEST(LgExpressions, ChannelFormsTakeBlochPolarAngle) {
  // The channel forms agree with the pipeline when fed cos(2 theta) and not
  // when fed cos(theta); at theta = 0 the two coincide.
  const ScenarioConfig cfg = channel_cfg(0.7, 0.9, 0.3, 0.6, 0.2, 0.4);
  const double L = evaluate_numeric(cfg).L;
  EXPECT_NEAR(closed_form::channel_unbiased_L(std::cos(1.4), 0.9, 0.3, 0.6, 0.2, 0.4), L, 1e-12);
  EXPECT_GT(std::abs(closed_form::channel_unbiased_L(std::cos(0.7), 0.9, 0.3, 0.6, 0.2, 0.4) - L), 1e-3);
  const ScenarioConfig at_zero = channel_cfg(0.0, 0.9, 0.3, 0.6, 0.2, 0.4);
  EXPECT_NEAR(closed_form::channel_unbiased_L(1.0, 0.9, 0.3, 0.6, 0.2, 0.4), evaluate_numeric(at_zero).L, 1e-12);
}

TEST(LgExpressions, ChannelStandardExpressionIsNotTheThirdOrderOne) {
  const ScenarioConfig cfg = channel_cfg(0.3, 0.8, 0.2, 0.7, 0.4, 0.1);
  const double z = std::cos(0.6);
  EXPECT_GT(std::abs(closed_form::channel_unbiased_L(z, 0.8, 0.2, 0.7, 0.4, 0.1) -
                     closed_form::channel_unbiased_V(z, 0.8, 0.2, 0.7, 0.4, 0.1)),
            1e-2);
  EXPECT_NEAR(closed_form_L(cfg), evaluate_numeric(cfg).L, 1e-12);
}

TEST(LgExpressions, ArbitraryBiasUnderDampingIsUncovered) {
  ScenarioConfig cfg = channel_cfg(0.0, 0.5, 0.1, 0.2, 0.3, 0.4);
  cfg.measurement.bias = BiasMode::free;
  cfg.measurement.alpha = 0.2;
  EXPECT_FALSE(closed_form_covers(cfg));
  EXPECT_THROW(closed_form_L(cfg), UncoveredRegime);
  EXPECT_THROW(closed_form_V(cfg), UncoveredRegime);
  EXPECT_NO_THROW(evaluate_numeric(cfg));
}

TEST(LgExpressions, StrictCompositionDerivesOverallDamping) {
  ChannelDyn d{0.3, 0.4, 0.5, 0.9, true};
  EXPECT_DOUBLE_EQ(d.effective_gamma13(), 0.4 + 0.5 - 0.2);
  d.strict_composition = false;
  EXPECT_DOUBLE_EQ(d.effective_gamma13(), 0.9);
  // Composition of two GAD steps with equal p is a GAD step with the combined damping.
  const Mat2 rho = make_state({0.4, 0.3});
  const Mat2 two = apply_evolution(apply_evolution(rho, Evolution::gad({0.3, 0.4})), Evolution::gad({0.3, 0.5}));
  const Mat2 one = apply_evolution(rho, Evolution::gad({0.3, 0.7}));
  EXPECT_LT(max_abs_diff(two, one), 1e-15);
}

TEST(LgExpressions, AlgebraicCeilingHolds) {
  ConfigSampler rng(5);
  for (int t = 0; t < 2000; ++t) {
    const LgValues v = evaluate_numeric(rng.sample_any());
    EXPECT_LE(std::abs(v.L), 3.0 + 1e-12);
    EXPECT_LE(std::abs(v.V), 3.0 + 1e-12);
    for (double x : v.L_variants) EXPECT_LE(std::abs(x), 3.0 + 1e-12);
    for (double x : v.V_variants) EXPECT_LE(std::abs(x), 3.0 + 1e-12);
  }
}

TEST(LgExpressions, StandardExpressionScalesWithSharpnessSquared) {
  for (double eta : {0.2, 0.5, 0.9}) {
    const double full = evaluate_numeric(unitary_cfg(0.3, 1.0, 1.0, 1.1, 0.4)).L;
    EXPECT_NEAR(evaluate_numeric(unitary_cfg(0.3, 1.0, eta, 1.1, 0.4)).L, eta * eta * full, 1e-12);
  }
}

TEST(LgExpressions, RelabelingsFlipTheRightCorrelators) {
  const Correlators c{0.1, 0.2, 0.3, 0.4, 0.5};
  const LgValues v = make_lg_values(c);
  EXPECT_DOUBLE_EQ(v.L_variants[0], v.L);
  EXPECT_DOUBLE_EQ(v.V_variants[0], v.V);
  EXPECT_DOUBLE_EQ(v.L_variants[1], 0.1 + 0.2 - 0.3);   // M1 -> -M1
  EXPECT_DOUBLE_EQ(v.L_variants[2], 0.1 - 0.2 + 0.3);   // M2 -> -M2
  EXPECT_DOUBLE_EQ(v.L_variants[3], -0.1 - 0.2 - 0.3);  // M3 -> -M3
  EXPECT_DOUBLE_EQ(v.V_variants[2], -0.4 + 0.3 + 0.5);
}

TEST(LgExpressions, PartialEvaluationMatchesFull) {
  ConfigSampler rng(6);
  for (int t = 0; t < 200; ++t) {
    const ScenarioConfig cfg = rng.sample_any();
    const LgValues v = evaluate_numeric(cfg);
    EXPECT_DOUBLE_EQ(evaluate_L(cfg), v.L);
    EXPECT_DOUBLE_EQ(evaluate_V(cfg), v.V);
  }
}

TEST(LgExpressions, InvalidConfigsAreRejectedWithFieldPath) {
  ScenarioConfig cfg = unitary_cfg(0.0, 0.0, 1.2, 0.0, 0.0);
  try {
    evaluate_numeric(cfg);
    FAIL() << "expected InvalidConfig";
  } catch (const InvalidConfig& e) {
    EXPECT_NE(std::string(e.what()).find("measurement.eta"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("sharpness"), std::string::npos);
  }
  cfg.measurement.eta = 0.8;
  cfg.measurement.bias = BiasMode::free;
  cfg.measurement.alpha = 0.5;
  EXPECT_THROW(evaluate_numeric(cfg), InvalidConfig);
  ScenarioConfig ch = channel_cfg(0.0, 1.0, 1.5, 0.0, 0.0, 0.0);
  try {
    evaluate_numeric(ch);
    FAIL() << "expected InvalidConfig";
  } catch (const InvalidConfig& e) {
    EXPECT_NE(std::string(e.what()).find("dynamics.channel.p"), std::string::npos);
  }
}
