#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "errors.hpp"
#include "lg_protocol.hpp"
#include "scenario.hpp"

namespace lglab {

struct Correlators {
  double m1m2 = 0.0;
  double m2m3 = 0.0;
  double m1m3 = 0.0;
  double m1m2m3 = 0.0;
  double m2 = 0.0;
};

/// Standard LG expression  L = -<M1M2> + <M2M3> + <M1M3>.
constexpr double standard_lg(const Correlators& c) { return -c.m1m2 + c.m2m3 + c.m1m3; }

/// Third-order LG expression  V = <M1M2M3> + <M1M3> - <M2>.
constexpr double third_order_lg(const Correlators& c) { return c.m1m2m3 + c.m1m3 - c.m2; }

/// Sign patterns (s1, s2, s3) for relabeling none, M1, M2, M3.
inline constexpr std::array<std::array<int, 3>, 4> kRelabelings{{{1, 1, 1}, {-1, 1, 1}, {1, -1, 1}, {1, 1, -1}}};

constexpr Correlators relabel(const Correlators& c, const std::array<int, 3>& s) {
  return {s[0] * s[1] * c.m1m2, s[1] * s[2] * c.m2m3, s[0] * s[2] * c.m1m3, s[0] * s[1] * s[2] * c.m1m2m3,
          s[1] * c.m2};
}

struct LgValues {
  double L = 0.0;
  double V = 0.0;
  Correlators correlators;
  std::array<double, 4> L_variants{};
  std::array<double, 4> V_variants{};
};

inline LgValues make_lg_values(const Correlators& c) {
  LgValues out;
  out.correlators = c;
  out.L = standard_lg(c);
  out.V = third_order_lg(c);
  for (std::size_t k = 0; k < kRelabelings.size(); ++k) {
    const Correlators r = relabel(c, kRelabelings[k]);
    out.L_variants[k] = standard_lg(r);
    out.V_variants[k] = third_order_lg(r);
  }
  return out;
}

enum CorrelatorMask : unsigned {
  kM1M2 = 1U << 0,
  kM2M3 = 1U << 1,
  kM1M3 = 1U << 2,
  kM1M2M3 = 1U << 3,
  kM2 = 1U << 4,
  kAllCorrelators = 0x1FU,
  kForL = kM1M2 | kM2M3 | kM1M3,
  kForV = kM1M2M3 | kM1M3 | kM2,
};

/// The measured correlators, each from its own sequential experiment.
/// <M2M3> lets the state evolve unmeasured through t1->t2; <M1M3> uses the
/// single t1->t3 evolution. Entries outside `which` stay zero.
inline Correlators measure_correlators(const ScenarioConfig& cfg, unsigned which = kAllCorrelators) {
  const Mat2 rho = make_state(cfg.state);
  const PovmPair povm = make_povm(cfg.measurement);
  const IntervalEvolutions ev = interval_evolutions(cfg);
  const Evolution none = Evolution::identity();
  Correlators c;
  if (which & kM1M2) c.m1m2 = correlator(two_time_dist(rho, povm, none, ev.e12));
  if (which & kM2M3) c.m2m3 = correlator(two_time_dist(rho, povm, ev.e12, ev.e23));
  if (which & kM1M3) c.m1m3 = correlator(two_time_dist(rho, povm, none, ev.e13));
  if (which & kM1M2M3) c.m1m2m3 = correlator(three_time_dist(rho, povm, ev.e12, ev.e23));
  if (which & kM2) c.m2 = correlator(one_time_dist(rho, povm, ev.e12));
  return c;
}

/// L alone, skipping the experiments it does not use.
inline double evaluate_L(const ScenarioConfig& cfg) {
  validate(cfg);
  return standard_lg(measure_correlators(cfg, kForL));
}

/// V alone, skipping the experiments it does not use.
inline double evaluate_V(const ScenarioConfig& cfg) {
  validate(cfg);
  return third_order_lg(measure_correlators(cfg, kForV));
}

inline LgValues evaluate_numeric(const ScenarioConfig& cfg) {
  validate(cfg);
  return make_lg_values(measure_correlators(cfg));
}

/// Closed-form expressions for the LG values. These are independent of the
/// sequential-measurement pipeline and serve as its cross-check.
///
/// Unitary forms take the state angles directly. The channel forms are
/// written in the Bloch polar angle of the initial state, so they receive
/// `bloch_z = cos(2 theta)`.
namespace closed_form {

namespace detail {
inline double safe_sqrt(double x) { return std::sqrt(std::max(x, 0.0)); }

struct Chi {
  double chi1;
  double chi2;
  double chi3;
};
inline Chi chis(double a, double e) {
  return {safe_sqrt((1 + a) * (1 + a) - e * e), safe_sqrt((1 - a) * (1 - a) - e * e),
          safe_sqrt(1 - (a - e) * (a - e)) * safe_sqrt(1 - (a + e) * (a + e))};
}
}  // namespace detail

// ---- unitary dynamics, unbiased measurement ----

inline double unitary_unbiased_L(double eta, double g1, double g2) {
  return eta * eta * (-std::cos(2 * g1) + std::cos(2 * g2) + std::cos(2 * (g1 + g2)));
}

inline double unitary_unbiased_V(double th, double ph, double eta, double g1, double g2) {
  using std::cos, std::sin;
  return eta * (cos(2 * th) * (eta * eta * cos(2 * g2) - cos(2 * g1)) + eta * cos(2 * (g1 + g2)) -
                sin(2 * g1) * sin(2 * th) * sin(ph));
}

// ---- unitary dynamics, arbitrary bias ----

inline double unitary_m1m3(double th, double ph, double a, double e, double g1, double g2) {
  using std::cos, std::sin;
  const auto [c1, c2, c3] = detail::chis(a, e);
  const double g = g1 + g2;
  return a * a + e * e * cos(2 * g) +
         e * cos(g) * ((c1 - c2) * sin(2 * th) * sin(ph) * sin(g) + 2 * a * cos(2 * th) * cos(g));
}

inline double unitary_m1m2(double th, double ph, double a, double e, double g1) {
  using std::cos, std::sin;
  const auto [c1, c2, c3] = detail::chis(a, e);
  return a * a + e * e * cos(2 * g1) +
         e * cos(g1) * ((c1 - c2) * sin(g1) * sin(2 * th) * sin(ph) + 2 * a * cos(g1) * cos(2 * th));
}

inline double unitary_m2m3(double th, double ph, double a, double e, double g1, double g2) {
  using std::cos, std::sin;
  const auto [c1, c2, c3] = detail::chis(a, e);
  const double cg2 = cos(g2) * cos(g2);
  return 0.5 * (2 * a * a + 8 * a * e * sin(2 * g1) * cg2 * sin(th) * cos(th) * sin(ph) +
                4 * a * e * cos(2 * g1) * cg2 * cos(2 * th) + 2 * e * e * cos(2 * g2) +
                e * sin(2 * g2) * (c2 - c1) * (sin(2 * g1) * cos(2 * th) - cos(2 * g1) * sin(2 * th) * sin(ph)));
}

inline double unitary_m1m2m3(double th, double ph, double a, double e, double g1, double g2) {
  using std::cos, std::sin;
  using C = std::complex<double>;
  const auto [c1, c2, c3] = detail::chis(a, e);
  const C E = std::polar(1.0, ph);
  const C i{0.0, 1.0};
  const double c2t = cos(2 * th);
  const double s2g1 = sin(2 * g1);
  const C cos_part = a * E * (a * a + e * e) + 2 * a * e * e * E * cos(2 * g2) + 2 * a * a * e * E * c2t +
                     e * E * cos(2 * g2) * (a * a + e * e) * c2t +
                     i * e * (1 + a * a - e * e - c3) * sin(g2) * cos(g2) * sin(th) * cos(th) * (1.0 - E * E);
  const C sin_part =
      E * (a * (a * a - e * e) -
           2 * e * (-c3 + 1 + a * a - e * e) * sin(g2) * cos(g2) * sin(th) * cos(th) * sin(ph) -
           e * (a * a - e * e) * cos(2 * g2) * c2t);
  const C cross = e * E * s2g1 * cos(g2) * (sin(g2) * (a * c2t + e) - a * cos(g2) * sin(2 * th) * sin(ph)) * (c2 - c1);
  return (std::conj(E) * (cos(g1) * cos(g1) * cos_part + sin(g1) * sin(g1) * sin_part + cross)).real();
}

inline double unitary_m2(double th, double ph, double a, double e, double g1) {
  using std::cos, std::sin;
  return a + e * sin(2 * g1) * sin(2 * th) * sin(ph) + e * cos(2 * g1) * cos(2 * th);
}

// ---- unitary dynamics, alpha = 1 - eta ----

inline double unitary_complementary_L(double th, double ph, double e, double g1, double g2) {
  using std::cos, std::sin;
  const double s = detail::safe_sqrt(1 - e);
  const double T = 2 * th;
  const double S = sin(T) * sin(ph);
  return 0.5 *
         (2 * (e - 1) * (e - 1) +
          e * (S * (4 * s * sin(g2) * cos(2 * g1 + g2) - 4 * (e - 1) * sin(2 * g1) * cos(g2) * cos(g2)) +
               cos(T) * (4 * (e - 1) * sin(g2) * sin(2 * g1 + g2) - 2 * s * sin(2 * g1) * sin(2 * g2)) +
               4 * e * cos(g1) * cos(g1 + 2 * g2) +
               cos(2 * g1) * (-2 * e + 2 * s * sin(2 * g2) * S - 4 * (e - 1) * cos(g2) * cos(g2) * cos(T))));
}

inline double unitary_complementary_V(double th, double ph, double e, double g1, double g2) {
  using std::cos, std::sin;
  const double s = detail::safe_sqrt(1 - e);
  const double T = 2 * th;
  const double S = sin(T) * sin(ph);
  const double sg1 = sin(g1) * sin(g1);
  const double cg1 = cos(g1) * cos(g1);
  const double cg2 = cos(g2) * cos(g2);
  return e * (cos(T) * ((e - 1) * (e + (s + 1) * sin(2 * g1) * sin(2 * g2) - 2) +
                        (e - 2) * cos(2 * g1) * (e + (e - 1) * cos(2 * g2)) + e * e * cos(2 * g2)) +
              sg1 * (2 * e + (e - 1) * sin(2 * g2) * S - 3) + s * S * sin(2 * (g1 + g2)) -
              2 * s * e * sin(2 * g1) * cg2 * S + sin(2 * g1) * S * (2 * s * cg2 - 1) + e * cos(2 * (g1 + g2))) -
         (e - 1) * cg1 * (2 * (e - 1) * e + 2 * e * e * cos(2 * g2) + e * sin(2 * g2) * S + 1) + (e - 1) * e -
         4 * s * e * e * sin(g1) * cos(g1) * sin(g2) * cos(g2) + sg1;
}

// ---- GAD channel, correlators at arbitrary bias ----

inline double channel_m1m2(double z, double a, double e, double p, double g12) {
  return a * a - (g12 - 1) * e * e + a * g12 * e * (2 * p - 1) + e * z * (g12 * e * (2 * p - 1) - a * (g12 - 2));
}

inline double channel_m2m3(double z, double a, double e, double p, double g12, double g23) {
  return a * a + (g12 - 1) * e * z * (a * (g23 - 2) + g23 * e * (1 - 2 * p)) -
         a * e * (2 * p - 1) * ((g12 - 1) * g23 - 2 * g12) +
         e * e * (g23 * (g12 * (1 - 2 * p) * (1 - 2 * p) - 1) + 1);
}

inline double channel_m1m3(double z, double a, double e, double p, double g13) {
  return a * a - (g13 - 1) * e * e + e * z * (g13 * e * (2 * p - 1) - a * (g13 - 2)) + a * g13 * e * (2 * p - 1);
}

inline double channel_m1m2m3(double z, double a, double e, double p, double g12, double g23) {
  return a * a * a - a * a * e * (2 * p - 1) * ((g12 - 1) * g23 - 2 * g12) +
         a * e * e * (-2 * g12 + 2 * g23 * (g12 * (2 * (p - 1) * p + 1) - 1) + 3) +
         e * z *
             (a * a * ((g12 - 1) * g23 - 2 * g12 + 3) - 2 * a * e * (2 * p - 1) * ((g12 - 1) * g23 - g12) +
              e * e * (g23 * (g12 * (1 - 2 * p) * (1 - 2 * p) - 1) + 1)) +
         g23 * e * e * e * (g12 - 2 * g12 * p + 2 * p - 1);
}

inline double channel_m2(double z, double a, double e, double p, double g12) {
  return a - (g12 - 1) * e * z + g12 * e * (2 * p - 1);
}

// ---- GAD channel, assembled LG values ----

/// Unbiased channel L: every term carries eta^2.
inline double channel_unbiased_L(double z, double e, double p, double g12, double g23, double g13) {
  const double q = 1 - 2 * p;
  return e * e *
         (g12 - g13 + 1 + g23 * (g12 * q * q - 1) + z * ((2 * p - 1) * (g13 - g12) + (g12 - 1) * g23 * q));
}

inline double channel_unbiased_V(double z, double e, double p, double g12, double g23, double g13) {
  return e * (g12 - g13 * e + e + (g12 - 1) * g23 * e * e * (-(2 * p - 1)) - 2 * g12 * p +
              z * (g12 + e * e * (g23 * (g12 * (1 - 2 * p) * (1 - 2 * p) - 1) + 1) + g13 * e * (2 * p - 1) - 1));
}

inline double channel_complementary_L(double z, double e, double p, double g12, double g23, double g13) {
  const double mix = -g12 * g23 + g12 + g13 + g23;
  return (e - 1) * (e - 1) + e * e * (g12 - g13 - g23 + g12 * g23 * (1 - 2 * p) * (1 - 2 * p) + 1) -
         e * z * (mix + 2 * e * (g12 * (g23 * p + p - 1) - p * (g13 + g23) + 1) - 2) +
         (1 - e) * e * (2 * p - 1) * mix;
}

inline double channel_complementary_V(double z, double e, double p, double g12, double g23, double g13) {
  return 1 - 4 * e * e * e * (g12 * p - 1) * (g23 * p - 1) +
         e * z *
             (g12 * g23 - g12 - g13 - g23 + 2 * e * (g12 - 2 * (g12 - 1) * g23 * p + 2 * g12 * p + g13 * p - 4) +
              4 * e * e * (g12 * p - 1) * (g23 * p - 1) + 4) +
         2 * e * e * (g12 + 2 * g23 * p * (g12 * p - 1) - 4 * g12 * p - g13 * p + 4) -
         e * (g13 + g23 + g12 * (g23 - 1) * (2 * p - 1) - 2 * p * (g13 + g23) + 4);
}

}  // namespace closed_form

/// Which closed form covers a configuration.
enum class Regime { unitary_unbiased, unitary_complementary, unitary_free, channel_unbiased, channel_complementary, channel_free };

inline Regime regime_of(const ScenarioConfig& cfg) {
  const BiasMode b = cfg.measurement.bias;
  if (cfg.is_unitary()) {
    return b == BiasMode::unbiased        ? Regime::unitary_unbiased
           : b == BiasMode::complementary ? Regime::unitary_complementary
                                          : Regime::unitary_free;
  }
  return b == BiasMode::unbiased        ? Regime::channel_unbiased
         : b == BiasMode::complementary ? Regime::channel_complementary
                                        : Regime::channel_free;
}

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::unitary_unbiased:
      return "unitary-unbiased";
    case Regime::unitary_complementary:
      return "unitary-complementary";
    case Regime::unitary_free:
      return "unitary-free";
    case Regime::channel_unbiased:
      return "channel-unbiased";
    case Regime::channel_complementary:
      return "channel-complementary";
    case Regime::channel_free:
      return "channel-free";
  }
  return "?";
}

inline bool closed_form_covers(const ScenarioConfig& cfg) { return regime_of(cfg) != Regime::channel_free; }

namespace detail {
template <class Unitary, class Channel>
double closed_form_dispatch(const ScenarioConfig& cfg, Unitary&& on_unitary, Channel&& on_channel) {
  validate(cfg);
  const Regime r = regime_of(cfg);
  if (r == Regime::channel_free) {
    throw UncoveredRegime("closed form: GAD dynamics with arbitrary bias is not covered (use alpha = 0 or 1 - eta)");
  }
  if (cfg.is_unitary()) return on_unitary(r, cfg.unitary());
  return on_channel(r, cfg.channel(), std::cos(2 * cfg.state.theta));
}
}  // namespace detail

inline double closed_form_L(const ScenarioConfig& cfg) {
  const double th = cfg.state.theta;
  const double ph = cfg.state.phi;
  const double e = cfg.measurement.eta;
  const double a = cfg.measurement.effective_alpha();
  return detail::closed_form_dispatch(
      cfg,
      [&](Regime r, const UnitaryDyn& u) {
        namespace cf = closed_form;
        if (r == Regime::unitary_unbiased) return cf::unitary_unbiased_L(e, u.g1, u.g2);
        if (r == Regime::unitary_complementary) return cf::unitary_complementary_L(th, ph, e, u.g1, u.g2);
        return -cf::unitary_m1m2(th, ph, a, e, u.g1) + cf::unitary_m2m3(th, ph, a, e, u.g1, u.g2) +
               cf::unitary_m1m3(th, ph, a, e, u.g1, u.g2);
      },
      [&](Regime r, const ChannelDyn& c, double z) {
        namespace cf = closed_form;
        const double g13 = c.effective_gamma13();
        if (r == Regime::channel_unbiased) return cf::channel_unbiased_L(z, e, c.p, c.gamma12, c.gamma23, g13);
        return cf::channel_complementary_L(z, e, c.p, c.gamma12, c.gamma23, g13);
      });
}

inline double closed_form_V(const ScenarioConfig& cfg) {
  const double th = cfg.state.theta;
  const double ph = cfg.state.phi;
  const double e = cfg.measurement.eta;
  const double a = cfg.measurement.effective_alpha();
  return detail::closed_form_dispatch(
      cfg,
      [&](Regime r, const UnitaryDyn& u) {
        namespace cf = closed_form;
        if (r == Regime::unitary_unbiased) return cf::unitary_unbiased_V(th, ph, e, u.g1, u.g2);
        if (r == Regime::unitary_complementary) return cf::unitary_complementary_V(th, ph, e, u.g1, u.g2);
        return cf::unitary_m1m2m3(th, ph, a, e, u.g1, u.g2) + cf::unitary_m1m3(th, ph, a, e, u.g1, u.g2) -
               cf::unitary_m2(th, ph, a, e, u.g1);
      },
      [&](Regime r, const ChannelDyn& c, double z) {
        namespace cf = closed_form;
        const double g13 = c.effective_gamma13();
        if (r == Regime::channel_unbiased) return cf::channel_unbiased_V(z, e, c.p, c.gamma12, c.gamma23, g13);
        return cf::channel_complementary_V(z, e, c.p, c.gamma12, c.gamma23, g13);
      });
}

}  // namespace lglab
