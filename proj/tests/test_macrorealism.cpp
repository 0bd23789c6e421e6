#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "lglab/macrorealism.hpp"
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

double ud11(double g1, double g2) { return std::sin(2 * g1) * std::sin(2 * g2); }

double gd11(double bloch_polar, double p, double g12, double g23, double g13) {
  return 0.5 * (g12 * (g23 - 1) + g13 - g23) * (-1 - std::cos(bloch_polar) * (1 - 2 * p));
}

double ud1111(double th, double ph, double g1) {
  return std::sin(g1) * (2 * std::sin(g1) * std::cos(th) * std::cos(th) - std::cos(g1) * std::sin(2 * th) * std::sin(ph));
}

struct Candidate {
  std::string name;
  std::function<double(const DTable&)> reduce;
};

// Every scalar one might reasonably call "the" degree of violation of a
// two-outcome table.
std::vector<Candidate> table_candidates() {
  return {
      {"(+,+)", [](const DTable& t) { return t.values[0]; }},
      {"(+,-)", [](const DTable& t) { return t.values[1]; }},
      {"(-,+)", [](const DTable& t) { return t.values[2]; }},
      {"(-,-)", [](const DTable& t) { return t.values[3]; }},
      {"same", [](const DTable& t) { return t.same_sum(); }},
      {"differ", [](const DTable& t) { return t.differ_sum(); }},
      {"corr", [](const DTable& t) { return t.signed_sum(); }},
      {"anti", [](const DTable& t) { return -t.signed_sum(); }},
      {"total-variation", [](const DTable& t) {
         double s = 0;
         for (double v : t.values) s += std::abs(v);
         return 0.5 * s;
       }},
  };
}

}  // namespace

TEST(Macrorealism, UnitarySharpHasNoSignalingFromFirstMeasurement) {
  for (int i = 0; i <= 12; ++i)
    for (int j = 0; j <= 12; ++j) {
      const NsitReport r = analyze(unitary_cfg(0.0, 0.0, 1.0, i * pi / 12, j * pi / 12));
      EXPECT_LT(r.d_1_23.max_abs(), 1e-15);
    }
}

TEST(Macrorealism, DiscoveredReductionForUnitaryMiddleMeasurement) {
  // Exactly one candidate reproduces sin(2 g1) sin(2 g2) over the whole grid.
  std::vector<std::string> matches;
  for (const auto& c : table_candidates()) {
    bool all = true;
    for (int i = 0; i <= 24 && all; ++i)
      for (int j = 0; j <= 24 && all; ++j) {
        const double g1 = i * pi / 24, g2 = j * pi / 24;
        all = std::abs(c.reduce(analyze(unitary_cfg(0.0, 0.0, 1.0, g1, g2)).d1_2_3) - ud11(g1, g2)) < 1e-10;
      }
    if (all) matches.push_back(c.name);
  }
  ASSERT_EQ(matches, std::vector<std::string>{"anti"});
  for (int i = 0; i <= 24; ++i) {
    const double g1 = i * pi / 24;
    EXPECT_NEAR(analyze(unitary_cfg(0.0, 0.0, 1.0, g1, 0.37)).reductions.d13_anti, ud11(g1, 0.37), 1e-12);
  }
}

TEST(Macrorealism, DiscoveredReductionForDampedMiddleMeasurement) {
  auto discover = [](bool any_theta) {
    std::vector<std::string> matches;
    for (const auto& c : table_candidates()) {
      bool all = true;
      ConfigSampler rng(31);
      for (int t = 0; t < 200 && all; ++t) {
        const double th = any_theta ? rng.uniform(0, pi) : 0.0;
        const double p = rng.uniform(0, 1), a = rng.uniform(0, 1), b = rng.uniform(0, 1), d = rng.uniform(0, 1);
        // The printed angle is the Bloch polar angle 2 theta.
        all = std::abs(c.reduce(analyze(channel_cfg(th, 1.0, p, a, b, d)).d1_2_3) - gd11(2 * th, p, a, b, d)) < 1e-10;
      }
      if (all) matches.push_back(c.name);
    }
    return matches;
  };
  // At theta = 0 the first outcome is always +, so the (-,-) entry vanishes
  // and the single (+,+) entry cannot be told apart from the same-outcome sum.
  EXPECT_EQ(discover(false), (std::vector<std::string>{"(+,+)", "same"}));
  EXPECT_EQ(discover(true), std::vector<std::string>{"same"});
}

TEST(Macrorealism, DampedFigurePointHasUnitDegreeOfViolation) {
  EXPECT_NEAR(analyze(channel_cfg(0.0, 1.0, 0.0, 1.0, 0.0, 0.0)).reductions.d13_same, 1.0, 1e-15);
  EXPECT_NEAR(gd11(0.0, 0.0, 1.0, 0.0, 0.0), 1.0, 1e-15);
}

TEST(Macrorealism, DampingNeverSignalsFromFirstToSecond) {
  ConfigSampler rng(32);
  for (Regime r : {Regime::channel_unbiased, Regime::channel_complementary, Regime::channel_free}) {
    for (int t = 0; t < 200; ++t) {
      const ScenarioConfig cfg = rng.sample(r);
      EXPECT_LT(analyze(cfg).d_1_2.max_abs(), 1e-15);
      EXPECT_LT(two_time_nsit(cfg, 1, 2).max_abs(), 1e-15);
    }
  }
}

TEST(Macrorealism, FirstToSecondSignalingAtThirdOrderOptimum) {
  const double th = pi / 4, ph = pi / 2, g1 = 3 * pi / 4;
  const NsitReport r = analyze(unitary_cfg(th, ph, 1.0, g1, pi / 4));
  EXPECT_NEAR(r.reductions.d2_anti, ud1111(th, ph, g1), 1e-12);
  EXPECT_NEAR(r.reductions.d2_anti, 1.0, 1e-12);
}

TEST(Macrorealism, PrintedFirstToSecondFormIsNotGeneral) {
  // At g1 = pi/2 the rotation swaps the z eigenstates, so measuring at t1
  // cannot change P(m2); the printed expression is 2 cos^2(theta) there.
  const NsitReport r = analyze(unitary_cfg(0.3, 0.8, 1.0, pi / 2, 0.5));
  EXPECT_LT(r.d_1_2.max_abs(), 1e-15);
  EXPECT_GT(std::abs(ud1111(0.3, 0.8, pi / 2)), 1.0);
}

TEST(Macrorealism, TablesSumToZeroAndIdentitiesHold) {
  ConfigSampler rng(33);
  for (int t = 0; t < 1000; ++t) {
    const ScenarioConfig cfg = rng.sample_any();
    const NsitReport r = analyze(cfg);
    EXPECT_LT(std::abs(r.d_1_23.sum()), 1e-12);
    EXPECT_LT(std::abs(r.d1_2_3.sum()), 1e-12);
    EXPECT_LT(std::abs(r.d_1_2.sum()), 1e-12);
    EXPECT_GE(r.beta, 0.0);
    EXPECT_LE(r.beta, 1.0);
    EXPECT_GE(r.delta, 0.0);
    EXPECT_LE(r.delta, 1.0);
    EXPECT_NEAR(r.l123, 1 - 4 * r.beta, 1e-12);
    EXPECT_NEAR(r.v123, 1 - 4 * r.delta, 1e-12);
    EXPECT_LT(std::abs(decomposition_check_L(cfg).residual), 1e-10);
    EXPECT_LT(std::abs(decomposition_check_V(cfg).residual), 1e-10);
  }
}

TEST(Macrorealism, ViolationConditionsAtKnownPoints) {
  const DecompositionCheck at_optimum = decomposition_check_L(unitary_cfg(0.0, 0.0, 1.0, 2 * pi / 3, pi / 6));
  EXPECT_GT(at_optimum.lhs, at_optimum.rhs);

  const ScenarioConfig weak = unitary_cfg(0.0, 0.0, 0.5, 2 * pi / 3, pi / 6);
  EXPECT_LE(evaluate_numeric(weak).L, 1.0);
  const DecompositionCheck w = decomposition_check_L(weak);
  EXPECT_LE(w.lhs, w.rhs);
  EXPECT_FALSE(analyze(weak).L_condition_holds);

  const ScenarioConfig damped = channel_cfg(0.0, 1.0, 0.0, 1.0, 0.0, 0.0);
  const NsitReport r = analyze(damped);
  EXPECT_LT(r.d_1_2.max_abs(), 1e-15);
  const DecompositionCheck v = decomposition_check_V(damped);
  EXPECT_GE(v.lhs, v.rhs);
  EXPECT_TRUE(r.V_condition_holds);
}

TEST(Macrorealism, ConditionsMatchViolations) {
  // With the exact identities, L > 1 iff lhs > 2 beta and V > 1 iff lhs > 4 delta.
  ConfigSampler rng(34);
  for (int t = 0; t < 2000; ++t) {
    const ScenarioConfig cfg = rng.sample_any();
    const LgValues v = evaluate_numeric(cfg);
    const NsitReport r = analyze(cfg);
    if (std::abs(v.L - 1) > 1e-9) {
      EXPECT_EQ(v.L > 1, r.L_condition_holds);
    }
    if (std::abs(v.V - 1) > 1e-9) {
      EXPECT_EQ(v.V > 1, r.V_condition_holds);
    }
  }
}

TEST(Macrorealism, ViolationImpliesSignaling) {
  ConfigSampler rng(35);
  int violating = 0;
  for (int t = 0; t < 3000; ++t) {
    const ScenarioConfig cfg = rng.sample_any();
    const LgValues v = evaluate_numeric(cfg);
    if (v.L > 1 + 1e-6 || v.V > 1 + 1e-6) {
      ++violating;
      EXPECT_GT(analyze(cfg).max_abs_d(), 1e-10);
    }
  }
  EXPECT_GT(violating, 10);
}

TEST(Macrorealism, SignalingWithoutViolation) {
  const ScenarioConfig cfg = unitary_cfg(0.0, 0.0, 1.0, pi / 4, pi / 4);
  const LgValues v = evaluate_numeric(cfg);
  EXPECT_LE(v.L, 1.0);
  EXPECT_LE(v.V, 1.0);
  EXPECT_GT(analyze(cfg).max_abs_d(), 0.05);
}

TEST(Macrorealism, TwoTimeNsitTables) {
  const ScenarioConfig cfg = unitary_cfg(0.4, 1.2, 1.0, 0.9, 0.3);
  const NsitReport r = analyze(cfg);
  const DTable d12 = two_time_nsit(cfg, 1, 2);
  for (int i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(d12.values[i], r.d_1_2.values[i]);
  EXPECT_EQ(d12.arity, 1);

  ScenarioConfig trivial = cfg;
  trivial.measurement.eta = 0.0;
  for (auto [i, j] : {std::pair{1, 2}, {1, 3}, {2, 3}}) EXPECT_LT(two_time_nsit(trivial, i, j).max_abs(), 1e-15);

  EXPECT_THROW(two_time_nsit(cfg, 2, 1), BadPair);
  EXPECT_THROW(two_time_nsit(cfg, 1, 1), BadPair);
  EXPECT_THROW(two_time_nsit(cfg, 3, 4), BadPair);
}

TEST(Macrorealism, FirstMeasurementSignalingIsTheDroppedSlotDifference) {
  // Dropping slot 1 of the three-time table versus measuring (2,3) on the
  // unmeasured evolved state.
  ConfigSampler rng(36);
  for (int t = 0; t < 200; ++t) {
    const ScenarioConfig cfg = rng.sample_any();
    const IntervalEvolutions ev = interval_evolutions(cfg);
    const Mat2 rho = make_state(cfg.state);
    const PovmPair m = make_povm(cfg.measurement);
    const OutcomeDist direct = two_time_dist(rho, m, ev.e12, ev.e23);
    const OutcomeDist dropped = marginalize(three_time_dist(rho, m, ev.e12, ev.e23), 1);
    const NsitReport r = analyze(cfg);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(direct.prob(k) - dropped.prob(k), r.d_1_23.values[k], 1e-15);
  }
}

TEST(Macrorealism, ArrowOfTimeHoldsForPhysicalDynamics) {
  ConfigSampler rng(37);
  for (int t = 0; t < 500; ++t) EXPECT_LE(aot_check(rng.sample_any()), 1e-12);
}

TEST(Macrorealism, ArrowOfTimeCheckDetectsNonTracePreservingMap) {
  const Evolution leaky = Evolution::kraus({Mat2::diag(1.0, std::sqrt(0.6))});
  const Mat2 rho = make_state({0.6, 0.2});
  const PovmPair m = make_povm(0.0, 1.0);
  const Experiments x = run_experiments(rho, m, leaky, Evolution::unitary(0.3), leaky);
  EXPECT_GT(aot_residual(x), 0.05);
  const Experiments ok = run_experiments(rho, m, Evolution::gad({0.2, 0.4}), Evolution::unitary(0.3),
                                         Evolution::gad({0.2, 0.4}));
  EXPECT_LE(aot_residual(ok), 1e-12);
}

TEST(Macrorealism, ReductionBindingsNameRealQuantities) {
  for (const auto& b : kReductionBindings) {
    EXPECT_TRUE(b.reduction == "D13_anti" || b.reduction == "D13_same" || b.reduction == "D2_anti");
  }
}
