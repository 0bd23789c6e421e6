#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "config_io.hpp"
#include "lg_expressions.hpp"
#include "macrorealism.hpp"
#include "scenario.hpp"

namespace lglab {

/// Seeded random configurations. The same seed always yields the same
/// sequence on a given build.
class ConfigSampler {
 public:
  explicit ConfigSampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  ScenarioConfig sample(Regime regime) {
    using std::numbers::pi;
    ScenarioConfig cfg;
    cfg.state = {uniform(0.0, pi), uniform(0.0, 2 * pi)};
    cfg.measurement.eta = uniform(0.0, 1.0);
    const bool unitary = regime == Regime::unitary_unbiased || regime == Regime::unitary_complementary ||
                         regime == Regime::unitary_free;
    switch (regime) {
      case Regime::unitary_unbiased:
      case Regime::channel_unbiased:
        cfg.measurement.bias = BiasMode::unbiased;
        break;
      case Regime::unitary_complementary:
      case Regime::channel_complementary:
        cfg.measurement.bias = BiasMode::complementary;
        break;
      case Regime::unitary_free:
      case Regime::channel_free: {
        const double room = 1.0 - cfg.measurement.eta;
        cfg.measurement.bias = BiasMode::free;
        cfg.measurement.alpha = uniform(-room, room);
        break;
      }
    }
    if (unitary) {
      cfg.dynamics = UnitaryDyn{uniform(0.0, 2 * pi), uniform(0.0, 2 * pi)};
    } else {
      ChannelDyn c;
      c.p = uniform(0.0, 1.0);
      c.gamma12 = uniform(0.0, 1.0);
      c.gamma23 = uniform(0.0, 1.0);
      c.gamma13 = uniform(0.0, 1.0);
      c.strict_composition = uniform(0.0, 1.0) < 0.1;
      cfg.dynamics = c;
    }
    return cfg;
  }

  /// Any regime, uniformly.
  ScenarioConfig sample_any() { return sample(kAllRegimes[std::uniform_int_distribution<int>(0, 5)(rng_)]); }

  /// Mixed state with Bloch radius drawn in [0, 1].
  Mat2 sample_mixed_state() {
    const double r = uniform(0.0, 1.0);
    const double ct = uniform(-1.0, 1.0);
    const double st = std::sqrt(1.0 - ct * ct);
    const double ph = uniform(0.0, 2 * std::numbers::pi);
    return make_bloch_state(r * st * std::cos(ph), r * st * std::sin(ph), r * ct);
  }

  static constexpr std::array<Regime, 6> kAllRegimes{Regime::unitary_unbiased,     Regime::unitary_complementary,
                                                     Regime::unitary_free,         Regime::channel_unbiased,
                                                     Regime::channel_complementary, Regime::channel_free};
  static constexpr std::array<Regime, 5> kCoveredRegimes{Regime::unitary_unbiased, Regime::unitary_complementary,
                                                         Regime::unitary_free, Regime::channel_unbiased,
                                                         Regime::channel_complementary};

 private:
  std::mt19937_64 rng_;
};

struct CheckOutcome {
  std::string name;
  double tolerance = 0.0;
  int trials = 0;
  int failures = 0;
  double worst = 0.0;
  std::vector<std::string> failing_configs;  // replayable flags, capped

  bool passed() const { return failures == 0; }

  void record(double residual, const ScenarioConfig& cfg) {
    ++trials;
    worst = std::max(worst, std::isnan(residual) ? INFINITY : residual);
    if (!(residual <= tolerance)) {
      ++failures;
      if (failing_configs.size() < 5) failing_configs.push_back(to_flags(cfg));
    }
  }
};

struct VerifyReport {
  std::vector<CheckOutcome> checks;
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.passed(); });
  }
};

inline double distribution_defect(const OutcomeDist& d) {
  double worst = std::abs(d.total() - 1.0);
  for (std::size_t i = 0; i < d.size(); ++i) worst = std::max(worst, std::max(-d.prob(i), d.prob(i) - 1.0));
  return worst;
}

/// Worst violation of trace and positivity preservation of `ev` on `rho`,
/// plus the Kraus completeness defect.
inline double channel_defect(const Evolution& ev, const Mat2& rho) {
  const Mat2 out = apply_evolution(rho, ev);
  double worst = max_abs_diff(kraus_completeness(ev), Mat2::identity());
  worst = std::max(worst, std::abs(trace(out) - trace(rho)));
  worst = std::max(worst, -min_eigenvalue(out));
  worst = std::max(worst, max_abs_diff(out, adjoint(out)));
  return worst;
}

/// Closed-form versus numeric values, decomposition identities, physicality
/// and arrow-of-time checks over `trials` random configurations per regime.
inline VerifyReport run_verification(std::uint64_t seed, int trials) {
  ConfigSampler rng(seed);
  VerifyReport rep;
  rep.checks.reserve(16);
  auto check = [&](std::string name, double tol) -> CheckOutcome& {
    CheckOutcome& c = rep.checks.emplace_back();
    c.name = std::move(name);
    c.tolerance = tol;
    return c;
  };

  for (Regime r : ConfigSampler::kCoveredRegimes) {
    CheckOutcome& c = check(std::string("closed form vs numeric, ") + regime_name(r), 1e-9);
    for (int t = 0; t < trials; ++t) {
      const ScenarioConfig cfg = rng.sample(r);
      const LgValues v = evaluate_numeric(cfg);
      c.record(std::max(std::abs(v.L - closed_form_L(cfg)), std::abs(v.V - closed_form_V(cfg))), cfg);
    }
  }

  CheckOutcome& dec_L = check("L - L123 decomposition residual", 1e-10);
  CheckOutcome& dec_V = check("V - V123 decomposition residual", 1e-10);
  CheckOutcome& beta = check("L123 = 1 - 4 beta, V123 = 1 - 4 delta", 1e-12);
  CheckOutcome& zero_sum = check("D tables sum to zero", 1e-12);
  CheckOutcome& norm = check("distribution normalization", 1e-12);
  CheckOutcome& aot = check("arrow-of-time residual", 1e-12);
  CheckOutcome& cptp = check("Kraus completeness, trace and PSD preservation", 1e-12);
  for (int t = 0; t < trials; ++t) {
    const ScenarioConfig cfg = rng.sample_any();
    dec_L.record(std::abs(decomposition_check_L(cfg).residual), cfg);
    dec_V.record(std::abs(decomposition_check_V(cfg).residual), cfg);

    const Experiments x = run_experiments(cfg);
    const NsitReport r = analyze(x);
    beta.record(std::max(std::abs(r.l123 - (1 - 4 * r.beta)), std::abs(r.v123 - (1 - 4 * r.delta))), cfg);
    zero_sum.record(std::max({std::abs(r.d_1_23.sum()), std::abs(r.d1_2_3.sum()), std::abs(r.d_1_2.sum())}), cfg);
    double nd = 0.0;
    for (const OutcomeDist* d : {&x.p1, &x.p2, &x.p3_span, &x.p3_steps, &x.p12, &x.p13, &x.p23, &x.p123}) {
      nd = std::max(nd, distribution_defect(*d));
    }
    norm.record(nd, cfg);
    aot.record(aot_residual(x), cfg);

    const IntervalEvolutions ev = interval_evolutions(cfg);
    const Mat2 rho = rng.sample_mixed_state();
    cptp.record(std::max({channel_defect(ev.e12, rho), channel_defect(ev.e23, rho), channel_defect(ev.e13, rho)}),
                cfg);
  }
  return rep;
}

inline void print_verify_report(std::ostream& os, const VerifyReport& rep) {
  for (const auto& c : rep.checks) {
    os << (c.passed() ? "PASS " : "FAIL ") << c.name << "  trials=" << c.trials << " failures=" << c.failures
       << " worst=" << format_number(c.worst, 3) << " tol=" << format_number(c.tolerance, 3) << '\n';
    for (const auto& f : c.failing_configs) os << "  replay: evaluate " << f << '\n';
  }
  os << (rep.passed() ? "verify: all checks passed" : "verify: FAILED") << '\n';
}

}  // namespace lglab
