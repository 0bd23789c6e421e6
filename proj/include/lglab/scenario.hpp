#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "errors.hpp"
#include "quantum_core.hpp"

namespace lglab {

/// How the biasedness alpha is tied to the sharpness eta. Closed-form regime
/// dispatch keys on this flag, never on comparing floats.
enum class BiasMode {
  unbiased,       // alpha = 0
  complementary,  // alpha = 1 - eta
  free,           // alpha given explicitly
};

struct Measurement {
  double eta = 1.0;
  BiasMode bias = BiasMode::unbiased;
  double alpha = 0.0;  // read only when bias == free

  double effective_alpha() const {
    switch (bias) {
      case BiasMode::unbiased:
        return 0.0;
      case BiasMode::complementary:
        return 1.0 - eta;
      case BiasMode::free:
        return alpha;
    }
    return alpha;
  }
};

struct UnitaryDyn {
  double g1 = 0.0;
  double g2 = 0.0;
};

/// GAD dynamics with independent per-interval damping. With
/// `strict_composition` the t1->t3 damping is derived from the other two.
struct ChannelDyn {
  double p = 0.0;
  double gamma12 = 0.0;
  double gamma23 = 0.0;
  double gamma13 = 0.0;
  bool strict_composition = false;

  double effective_gamma13() const {
    return strict_composition ? gamma12 + gamma23 - gamma12 * gamma23 : gamma13;
  }
};

using Dynamics = std::variant<UnitaryDyn, ChannelDyn>;

struct ScenarioConfig {
  PureStateParams state;
  Measurement measurement;
  Dynamics dynamics = UnitaryDyn{};

  bool is_unitary() const { return std::holds_alternative<UnitaryDyn>(dynamics); }
  bool is_channel() const { return std::holds_alternative<ChannelDyn>(dynamics); }
  const UnitaryDyn& unitary() const { return std::get<UnitaryDyn>(dynamics); }
  const ChannelDyn& channel() const { return std::get<ChannelDyn>(dynamics); }
  UnitaryDyn& unitary() { return std::get<UnitaryDyn>(dynamics); }
  ChannelDyn& channel() { return std::get<ChannelDyn>(dynamics); }
};

namespace detail {
inline void require_finite(double v, const char* path) {
  if (!std::isfinite(v)) throw InvalidConfig(std::string(path) + ": must be a finite number");
}
inline void require_unit(double v, const char* path) {
  require_finite(v, path);
  if (v < 0.0 || v > 1.0) throw InvalidConfig(std::string(path) + ": must lie in [0, 1]");
}
}  // namespace detail

/// Throws InvalidConfig naming the offending field.
inline void validate(const ScenarioConfig& cfg) {
  detail::require_finite(cfg.state.theta, "state.theta");
  detail::require_finite(cfg.state.phi, "state.phi");
  const Measurement& m = cfg.measurement;
  detail::require_finite(m.eta, "measurement.eta");
  if (m.eta < 0.0 || m.eta > 1.0) {
    throw InvalidConfig("measurement.eta: sharpness constraint violated, eta must lie in [0, 1] (got " +
                        std::to_string(m.eta) + ")");
  }
  if (m.bias == BiasMode::free) detail::require_finite(m.alpha, "measurement.alpha");
  if (std::abs(m.effective_alpha()) + m.eta > 1.0 + kPovmTolerance) {
    throw InvalidConfig("measurement.alpha: sharpness constraint |alpha| + eta <= 1 violated");
  }
  if (cfg.is_unitary()) {
    detail::require_finite(cfg.unitary().g1, "dynamics.unitary.g1");
    detail::require_finite(cfg.unitary().g2, "dynamics.unitary.g2");
  } else {
    const ChannelDyn& c = cfg.channel();
    detail::require_unit(c.p, "dynamics.channel.p");
    detail::require_unit(c.gamma12, "dynamics.channel.gamma12");
    detail::require_unit(c.gamma23, "dynamics.channel.gamma23");
    detail::require_unit(c.gamma13, "dynamics.channel.gamma13");
  }
}

inline PovmPair make_povm(const Measurement& m) {
  if (m.bias == BiasMode::complementary) return make_complementary_povm(m.eta, kAxisZ);
  return make_povm(m.effective_alpha(), m.eta, kAxisZ);
}

/// Evolutions for the intervals t1->t2, t2->t3 and the single span t1->t3.
struct IntervalEvolutions {
  Evolution e12;
  Evolution e23;
  Evolution e13;
};

inline IntervalEvolutions interval_evolutions(const ScenarioConfig& cfg) {
  if (cfg.is_unitary()) {
    const UnitaryDyn& u = cfg.unitary();
    return {Evolution::unitary(u.g1), Evolution::unitary(u.g2), Evolution::unitary(u.g1 + u.g2)};
  }
  const ChannelDyn& c = cfg.channel();
  return {Evolution::gad({c.p, c.gamma12}), Evolution::gad({c.p, c.gamma23}),
          Evolution::gad({c.p, c.effective_gamma13()})};
}

}  // namespace lglab
