#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "lg_expressions.hpp"
#include "macrorealism.hpp"
#include "scenario.hpp"

namespace lglab {

// ---------------------------------------------------------------------------
// Parallel evaluation

/// Worker count: LG_LAB_THREADS if set to a positive integer, else all cores.
inline unsigned worker_count() {
  if (const char* env = std::getenv("LG_LAB_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

/// Calls f(i) for every i in [0, n). Each index is handled exactly once, so
/// results written by index do not depend on the thread count.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t end = std::min(n, (w + 1) * chunk);
        for (std::size_t i = w * chunk; i < end; ++i) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Parameters

inline constexpr std::array<std::string_view, 10> kParameterNames{"theta", "phi",     "alpha",   "eta",     "g1",
                                                                  "g2",    "p",       "gamma12", "gamma23", "gamma13"};

inline bool is_parameter(std::string_view name) {
  return std::find(kParameterNames.begin(), kParameterNames.end(), name) != kParameterNames.end();
}

namespace detail {
inline UnitaryDyn& unitary_of(ScenarioConfig& cfg, std::string_view name) {
  if (!cfg.is_unitary()) throw InvalidConfig(std::string(name) + ": parameter requires unitary dynamics");
  return cfg.unitary();
}
inline ChannelDyn& channel_of(ScenarioConfig& cfg, std::string_view name) {
  if (!cfg.is_channel()) throw InvalidConfig(std::string(name) + ": parameter requires channel dynamics");
  return cfg.channel();
}
}  // namespace detail

/// Setting alpha switches the measurement to an explicit (free) bias.
inline void set_parameter(ScenarioConfig& cfg, std::string_view name, double v) {
  if (name == "theta") {
    cfg.state.theta = v;
  } else if (name == "phi") {
    cfg.state.phi = v;
  } else if (name == "alpha") {
    cfg.measurement.bias = BiasMode::free;
    cfg.measurement.alpha = v;
  } else if (name == "eta") {
    cfg.measurement.eta = v;
  } else if (name == "g1") {
    detail::unitary_of(cfg, name).g1 = v;
  } else if (name == "g2") {
    detail::unitary_of(cfg, name).g2 = v;
  } else if (name == "p") {
    detail::channel_of(cfg, name).p = v;
  } else if (name == "gamma12") {
    detail::channel_of(cfg, name).gamma12 = v;
  } else if (name == "gamma23") {
    detail::channel_of(cfg, name).gamma23 = v;
  } else if (name == "gamma13") {
    detail::channel_of(cfg, name).gamma13 = v;
  } else {
    throw UnknownParameter("unknown parameter '" + std::string(name) + "'");
  }
}

inline double get_parameter(const ScenarioConfig& cfg, std::string_view name) {
  if (name == "theta") return cfg.state.theta;
  if (name == "phi") return cfg.state.phi;
  if (name == "alpha") return cfg.measurement.effective_alpha();
  if (name == "eta") return cfg.measurement.eta;
  if (!is_parameter(name)) throw UnknownParameter("unknown parameter '" + std::string(name) + "'");
  if (cfg.is_unitary()) {
    if (name == "g1") return cfg.unitary().g1;
    if (name == "g2") return cfg.unitary().g2;
  } else {
    const ChannelDyn& c = cfg.channel();
    if (name == "p") return c.p;
    if (name == "gamma12") return c.gamma12;
    if (name == "gamma23") return c.gamma23;
    if (name == "gamma13") return c.effective_gamma13();
  }
  throw InvalidConfig(std::string(name) + ": parameter does not apply to these dynamics");
}

// ---------------------------------------------------------------------------
// Quantities

struct QuantityInputs {
  const ScenarioConfig& cfg;
  const LgValues& lg;
  const NsitReport* nsit;  // null unless a quantity asked for it
};

struct QuantityDef {
  std::string_view name;
  bool needs_nsit;
  double (*eval)(const QuantityInputs&);
};

inline const std::vector<QuantityDef>& quantity_registry() {
  using Q = QuantityInputs;
  static const std::vector<QuantityDef> reg{
      {"L", false, [](const Q& q) { return q.lg.L; }},
      {"V", false, [](const Q& q) { return q.lg.V; }},
      {"L_flip1", false, [](const Q& q) { return q.lg.L_variants[1]; }},
      {"L_flip2", false, [](const Q& q) { return q.lg.L_variants[2]; }},
      {"L_flip3", false, [](const Q& q) { return q.lg.L_variants[3]; }},
      {"V_flip1", false, [](const Q& q) { return q.lg.V_variants[1]; }},
      {"V_flip2", false, [](const Q& q) { return q.lg.V_variants[2]; }},
      {"V_flip3", false, [](const Q& q) { return q.lg.V_variants[3]; }},
      {"M1M2", false, [](const Q& q) { return q.lg.correlators.m1m2; }},
      {"M2M3", false, [](const Q& q) { return q.lg.correlators.m2m3; }},
      {"M1M3", false, [](const Q& q) { return q.lg.correlators.m1m3; }},
      {"M1M2M3", false, [](const Q& q) { return q.lg.correlators.m1m2m3; }},
      {"M2", false, [](const Q& q) { return q.lg.correlators.m2; }},
      {"L_closed", false, [](const Q& q) { return closed_form_L(q.cfg); }},
      {"V_closed", false, [](const Q& q) { return closed_form_V(q.cfg); }},
      {"beta", true, [](const Q& q) { return q.nsit->beta; }},
      {"delta", true, [](const Q& q) { return q.nsit->delta; }},
      {"L123", true, [](const Q& q) { return q.nsit->l123; }},
      {"V123", true, [](const Q& q) { return q.nsit->v123; }},
      {"lhs_L", true, [](const Q& q) { return q.nsit->lhs_L_condition; }},
      {"lhs_V", true, [](const Q& q) { return q.nsit->lhs_V_condition; }},
      {"D13_same", true, [](const Q& q) { return q.nsit->reductions.d13_same; }},
      {"D13_corr", true, [](const Q& q) { return q.nsit->reductions.d13_corr; }},
      {"D13_anti", true, [](const Q& q) { return q.nsit->reductions.d13_anti; }},
      {"D23_same", true, [](const Q& q) { return q.nsit->reductions.d23_same; }},
      {"D23_corr", true, [](const Q& q) { return q.nsit->reductions.d23_corr; }},
      {"D2_plus", true, [](const Q& q) { return q.nsit->reductions.d2_plus; }},
      {"D2_minus", true, [](const Q& q) { return q.nsit->reductions.d2_minus; }},
      {"D2_corr", true, [](const Q& q) { return q.nsit->reductions.d2_corr; }},
      {"D2_anti", true, [](const Q& q) { return q.nsit->reductions.d2_anti; }},
      {"Dmax", true, [](const Q& q) { return q.nsit->reductions.max_abs; }},
  };
  return reg;
}

inline const QuantityDef& find_quantity(std::string_view name) {
  for (const auto& q : quantity_registry())
    if (q.name == name) return q;
  throw UnknownQuantity("unknown quantity '" + std::string(name) + "'");
}

/// Evaluates a list of named quantities at one configuration, running the
/// NSIT experiments only when one of them needs it.
class QuantityEvaluator {
 public:
  explicit QuantityEvaluator(const std::vector<std::string>& names) {
    for (const auto& n : names) {
      defs_.push_back(&find_quantity(n));
      needs_nsit_ = needs_nsit_ || defs_.back()->needs_nsit;
    }
  }

  std::size_t size() const { return defs_.size(); }

  void operator()(const ScenarioConfig& cfg, double* out) const {
    const LgValues lg = evaluate_numeric(cfg);
    std::optional<NsitReport> nsit;
    if (needs_nsit_) nsit = analyze(cfg);
    const QuantityInputs in{cfg, lg, nsit ? &*nsit : nullptr};
    for (std::size_t k = 0; k < defs_.size(); ++k) out[k] = defs_[k]->eval(in);
  }

  double single(const ScenarioConfig& cfg) const {
    double v = 0.0;
    (*this)(cfg, &v);
    return v;
  }

 private:
  std::vector<const QuantityDef*> defs_;
  bool needs_nsit_ = false;
};

// ---------------------------------------------------------------------------
// Sweeps

struct SweepAxis {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  int steps = 2;

  double value(int i) const {
    if (steps == 1) return start;
    if (i == steps - 1) return stop;
    return start + (stop - start) * static_cast<double>(i) / (steps - 1);
  }
};

struct SweepSpec {
  ScenarioConfig base;
  std::vector<SweepAxis> axes;
  std::vector<std::string> quantities;
};

struct SweepTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw UnknownQuantity("no column '" + std::string(name) + "'");
  }
};

/// A single-point axis (steps = 1) is allowed only when start == stop.
inline void validate(const SweepSpec& spec) {
  if (spec.axes.empty() || spec.axes.size() > 3) throw InvalidConfig("sweep.axes: need between 1 and 3 axes");
  if (spec.quantities.empty()) throw InvalidConfig("sweep.quantities: at least one quantity is required");
  for (std::size_t i = 0; i < spec.axes.size(); ++i) {
    const SweepAxis& a = spec.axes[i];
    const std::string path = "sweep.axes[" + std::to_string(i) + "]";
    if (!is_parameter(a.name)) throw UnknownParameter(path + ".name: unknown parameter '" + a.name + "'");
    if (!std::isfinite(a.start) || !std::isfinite(a.stop)) throw InvalidConfig(path + ": start/stop must be finite");
    if (a.steps < 1 || (a.steps == 1 && a.start != a.stop)) {
      throw InvalidConfig(path + ".steps: need at least 2 steps (1 only when start == stop)");
    }
  }
  for (const auto& q : spec.quantities) find_quantity(q);
}

inline SweepTable sweep(const SweepSpec& spec) {
  validate(spec);
  const QuantityEvaluator eval(spec.quantities);

  SweepTable out;
  for (const auto& a : spec.axes) out.header.push_back(a.name);
  for (const auto& q : spec.quantities) out.header.push_back(q);

  std::size_t total = 1;
  for (const auto& a : spec.axes) total *= static_cast<std::size_t>(a.steps);
  out.rows.assign(total, std::vector<double>(out.header.size()));

  // Row order: first axis varies slowest.
  parallel_for(total, [&](std::size_t idx) {
    std::vector<double>& row = out.rows[idx];
    ScenarioConfig cfg = spec.base;
    std::size_t rest = idx;
    for (std::size_t k = spec.axes.size(); k-- > 0;) {
      const SweepAxis& a = spec.axes[k];
      const int i = static_cast<int>(rest % a.steps);
      rest /= a.steps;
      row[k] = a.value(i);
      set_parameter(cfg, a.name, row[k]);
    }
    eval(cfg, row.data() + spec.axes.size());
  });
  return out;
}

// ---------------------------------------------------------------------------
// Maximization

struct Bound {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

struct OptOptions {
  int grid_points = 25;
  int rounds = 8;
  double shrink = 0.25;
  int local_points = 9;
  int max_passes = 4;
};

struct TracePoint {
  int iteration = 0;
  double value = 0.0;
};

struct OptResult {
  double best_value = 0.0;
  ScenarioConfig best_config;
  std::vector<double> best_point;  // one entry per bound, in bound order
  std::vector<TracePoint> trace;
};

/// Improvement needed to replace the incumbent; keeps the first point found
/// on a plateau, which the grid order makes the lexicographically smallest.
inline constexpr double kTieTolerance = 1e-12;

using Objective = std::function<double(const ScenarioConfig&)>;

inline Objective quantity_objective(const std::string& name) {
  if (name == "L") return evaluate_L;
  if (name == "V") return evaluate_V;
  auto eval = std::make_shared<QuantityEvaluator>(std::vector<std::string>{name});
  return [eval](const ScenarioConfig& cfg) { return eval->single(cfg); };
}

namespace detail {
inline double safe_objective(const Objective& f, const ScenarioConfig& cfg) {
  try {
    return f(cfg);
  } catch (const InvalidConfig&) {
    return -std::numeric_limits<double>::infinity();
  } catch (const InvalidPovm&) {
    return -std::numeric_limits<double>::infinity();
  }
}
}  // namespace detail

/// Grid scan over the bounded axes followed by coordinate refinement with a
/// shrinking local window. Points outside the validity region score -inf.
inline OptResult maximize(const Objective& objective, const ScenarioConfig& frozen, const std::vector<Bound>& bounds,
                          const OptOptions& opt = {}) {
  if (bounds.empty()) throw EmptyFeasibleRegion("maximize: no free parameters");
  for (const auto& b : bounds) {
    if (!is_parameter(b.name)) throw UnknownParameter("unknown parameter '" + b.name + "'");
    if (!(b.lo <= b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi)) {
      throw EmptyFeasibleRegion("maximize: empty interval for " + b.name);
    }
  }
  {
    ScenarioConfig probe = frozen;
    for (const auto& b : bounds) set_parameter(probe, b.name, b.lo);
  }
  const std::size_t dims = bounds.size();
  const int n = std::max(2, opt.grid_points);

  auto grid_value = [&](std::size_t axis, int i) {
    const Bound& b = bounds[axis];
    if (b.lo == b.hi) return b.lo;
    if (i == n - 1) return b.hi;
    return b.lo + (b.hi - b.lo) * static_cast<double>(i) / (n - 1);
  };
  auto config_at = [&](const std::vector<double>& x) {
    ScenarioConfig cfg = frozen;
    for (std::size_t k = 0; k < dims; ++k) set_parameter(cfg, bounds[k].name, x[k]);
    return cfg;
  };

  std::size_t total = 1;
  for (std::size_t k = 0; k < dims; ++k) total *= static_cast<std::size_t>(n);
  std::vector<double> values(total);
  auto decode = [&](std::size_t idx) {
    std::vector<double> x(dims);
    for (std::size_t k = dims; k-- > 0;) {
      x[k] = grid_value(k, static_cast<int>(idx % n));
      idx /= n;
    }
    return x;
  };
  parallel_for(total, [&](std::size_t idx) { values[idx] = detail::safe_objective(objective, config_at(decode(idx))); });

  std::size_t best_idx = 0;
  for (std::size_t i = 1; i < total; ++i)
    if (values[i] > values[best_idx] + kTieTolerance) best_idx = i;
  if (!std::isfinite(values[best_idx])) throw EmptyFeasibleRegion("maximize: no valid configuration inside the bounds");

  OptResult res;
  res.best_point = decode(best_idx);
  res.best_value = values[best_idx];
  res.trace.push_back({0, res.best_value});

  std::vector<double> width(dims);
  for (std::size_t k = 0; k < dims; ++k) width[k] = (bounds[k].hi - bounds[k].lo) / (n - 1);

  const int m = std::max(3, opt.local_points);
  std::vector<double> local(m);
  for (int round = 1; round <= opt.rounds; ++round) {
    for (int pass = 0; pass < opt.max_passes; ++pass) {
      bool improved = false;
      for (std::size_t k = 0; k < dims; ++k) {
        if (width[k] == 0.0) continue;
        const double c = res.best_point[k];
        parallel_for(static_cast<std::size_t>(m), [&](std::size_t j) {
          std::vector<double> x = res.best_point;
          x[k] = std::clamp(c - width[k] + 2.0 * width[k] * static_cast<double>(j) / (m - 1), bounds[k].lo,
                            bounds[k].hi);
          local[j] = detail::safe_objective(objective, config_at(x));
        });
        for (int j = 0; j < m; ++j) {
          if (local[j] > res.best_value + kTieTolerance) {
            res.best_value = local[j];
            res.best_point[k] = std::clamp(c - width[k] + 2.0 * width[k] * j / (m - 1), bounds[k].lo, bounds[k].hi);
            improved = true;
          }
        }
      }
      if (!improved) break;
    }
    res.trace.push_back({round, res.best_value});
    for (auto& w : width) w *= opt.shrink;
  }
  res.best_config = config_at(res.best_point);
  return res;
}

inline OptResult maximize(const std::string& quantity, const ScenarioConfig& frozen, const std::vector<Bound>& bounds,
                          const OptOptions& opt = {}) {
  return maximize(quantity_objective(quantity), frozen, bounds, opt);
}

// ---------------------------------------------------------------------------
// Sharpness thresholds

enum class ThresholdRegime { unitary_unbiased, channel_unbiased, channel_biased };

inline const char* threshold_regime_name(ThresholdRegime r) {
  switch (r) {
    case ThresholdRegime::unitary_unbiased:
      return "unitary-unbiased";
    case ThresholdRegime::channel_unbiased:
      return "channel-unbiased";
    case ThresholdRegime::channel_biased:
      return "channel-biased";
  }
  return "?";
}

inline std::optional<ThresholdRegime> parse_threshold_regime(std::string_view s) {
  for (auto r : {ThresholdRegime::unitary_unbiased, ThresholdRegime::channel_unbiased, ThresholdRegime::channel_biased})
    if (s == threshold_regime_name(r)) return r;
  return std::nullopt;
}

/// Frozen configuration and free axes for the inner maximization. Under the
/// GAD channel with z-axis measurements phi never enters the statistics, and
/// theta in [0, pi/2] already covers every Bloch polar angle.
struct ThresholdSetup {
  ScenarioConfig base;
  std::vector<Bound> free;
};

inline ThresholdSetup threshold_setup(ThresholdRegime regime) {
  using std::numbers::pi;
  ThresholdSetup s;
  if (regime == ThresholdRegime::unitary_unbiased) {
    s.base.dynamics = UnitaryDyn{};
    s.free = {{"theta", 0.0, pi}, {"phi", 0.0, 2 * pi}, {"g1", 0.0, pi}, {"g2", 0.0, pi}};
  } else {
    s.base.dynamics = ChannelDyn{};
    s.free = {{"theta", 0.0, pi / 2}, {"p", 0.0, 1.0}, {"gamma12", 0.0, 1.0}, {"gamma23", 0.0, 1.0}, {"gamma13", 0.0, 1.0}};
  }
  s.base.measurement.bias = regime == ThresholdRegime::channel_biased ? BiasMode::complementary : BiasMode::unbiased;
  return s;
}

struct ThresholdOptions {
  OptOptions inner{15, 8, 0.25, 9, 4};
  double width = 1e-3;
  double violation_tolerance = 1e-9;
};

struct ThresholdResult {
  double eta = 0.0;
  double lo = 0.0;
  double hi = 1.0;
  int evaluations = 0;
};

/// max over the setup's free axes of the objective at sharpness eta.
inline OptResult max_at_eta(const Objective& objective, ThresholdSetup setup, double eta,
                            const OptOptions& inner = ThresholdOptions{}.inner) {
  setup.base.measurement.eta = eta;
  return maximize(objective, setup.base, setup.free, inner);
}

inline OptResult max_at_eta(const std::string& objective, ThresholdRegime regime, double eta,
                            const OptOptions& inner = ThresholdOptions{}.inner) {
  return max_at_eta(quantity_objective(objective), threshold_setup(regime), eta, inner);
}

/// Bisection on eta of f(eta) = max objective(eta) - 1; the returned eta is
/// the midpoint of the final bracket.
inline ThresholdResult eta_threshold(const Objective& objective, const ThresholdSetup& setup,
                                     const ThresholdOptions& opt = {}) {
  auto violated = [&](double eta) {
    return max_at_eta(objective, setup, eta, opt.inner).best_value - 1.0 > opt.violation_tolerance;
  };
  ThresholdResult r;
  r.evaluations = 1;
  if (!violated(1.0)) throw NoViolationAnywhere("no violation even with sharp measurements");
  while (r.hi - r.lo >= opt.width) {
    const double mid = 0.5 * (r.lo + r.hi);
    ++r.evaluations;
    (violated(mid) ? r.hi : r.lo) = mid;
  }
  r.eta = 0.5 * (r.lo + r.hi);
  return r;
}

inline ThresholdResult eta_threshold(const std::string& objective, ThresholdRegime regime,
                                     const ThresholdOptions& opt = {}) {
  if (objective != "L" && objective != "V") throw UnknownQuantity("threshold objective must be L or V");
  try {
    return eta_threshold(quantity_objective(objective), threshold_setup(regime), opt);
  } catch (const NoViolationAnywhere&) {
    throw NoViolationAnywhere(objective + " never exceeds 1 in regime " + threshold_regime_name(regime));
  }
}

}  // namespace lglab
