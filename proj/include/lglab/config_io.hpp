#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "explorer.hpp"
#include "lg_expressions.hpp"
#include "macrorealism.hpp"
#include "scenario.hpp"

namespace lglab {

inline constexpr std::string_view kSchemaVersion = "1";

// ---------------------------------------------------------------------------
// Number formatting

/// Shortest-free, locale-independent rendering with `digits` significant digits.
inline std::string format_number(double x, int digits = 12) {
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, digits);
  return std::string(buf.data(), res.ptr);
}

/// Round-trip exact rendering, used when a configuration must be replayed.
inline std::string format_exact(double x) {
  if (x == 0.0) x = 0.0;
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

inline void write_csv(std::ostream& os, const SweepTable& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Flag rendering

inline const char* bias_name(BiasMode b) {
  switch (b) {
    case BiasMode::unbiased:
      return "unbiased";
    case BiasMode::complementary:
      return "complementary";
    case BiasMode::free:
      return "free";
  }
  return "?";
}

inline std::optional<BiasMode> parse_bias(std::string_view s) {
  for (auto b : {BiasMode::unbiased, BiasMode::complementary, BiasMode::free})
    if (s == bias_name(b)) return b;
  return std::nullopt;
}

/// Command-line flags that reproduce `cfg` bit for bit under `evaluate`.
inline std::string to_flags(const ScenarioConfig& cfg) {
  std::string s = "--theta " + format_exact(cfg.state.theta) + " --phi " + format_exact(cfg.state.phi) + " --eta " +
                  format_exact(cfg.measurement.eta) + " --bias " + bias_name(cfg.measurement.bias);
  if (cfg.measurement.bias == BiasMode::free) s += " --alpha " + format_exact(cfg.measurement.alpha);
  if (cfg.is_unitary()) {
    s += " --unitary --g1 " + format_exact(cfg.unitary().g1) + " --g2 " + format_exact(cfg.unitary().g2);
  } else {
    const ChannelDyn& c = cfg.channel();
    s += " --channel --p " + format_exact(c.p) + " --gamma12 " + format_exact(c.gamma12) + " --gamma23 " +
         format_exact(c.gamma23) + " --gamma13 " + format_exact(c.gamma13);
    if (c.strict_composition) s += " --strict-composition";
  }
  return s;
}

// ---------------------------------------------------------------------------
// Config documents

using Json = nlohmann::ordered_json;

namespace detail {

inline void reject_unknown(const Json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw InvalidConfig(path + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) throw InvalidConfig(path + (path.empty() ? "" : ".") + it.key() + ": unknown key");
  }
}

inline std::string join_path(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline void read_number(const Json& obj, const std::string& path, std::string_view key, double& dst) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number()) throw InvalidConfig(join_path(path, key) + ": expected a number");
  dst = it->get<double>();
}

}  // namespace detail

/// Parses the state/measurement/dynamics sections of a config document.
inline ScenarioConfig scenario_from_json(const Json& doc) {
  using detail::read_number;
  ScenarioConfig cfg;
  if (const auto it = doc.find("state"); it != doc.end()) {
    detail::reject_unknown(*it, "state", {"theta", "phi"});
    read_number(*it, "state", "theta", cfg.state.theta);
    read_number(*it, "state", "phi", cfg.state.phi);
  }
  if (const auto it = doc.find("measurement"); it != doc.end()) {
    detail::reject_unknown(*it, "measurement", {"eta", "bias", "alpha"});
    read_number(*it, "measurement", "eta", cfg.measurement.eta);
    if (const auto b = it->find("bias"); b != it->end()) {
      const auto mode = b->is_string() ? parse_bias(b->get<std::string>()) : std::nullopt;
      if (!mode) throw InvalidConfig("measurement.bias: expected \"unbiased\", \"complementary\" or \"free\"");
      cfg.measurement.bias = *mode;
    }
    if (it->contains("alpha")) {
      if (!it->contains("bias")) cfg.measurement.bias = BiasMode::free;
      if (cfg.measurement.bias != BiasMode::free) {
        throw InvalidConfig("measurement.alpha: only allowed with bias \"free\"");
      }
      read_number(*it, "measurement", "alpha", cfg.measurement.alpha);
    }
  }
  if (const auto it = doc.find("dynamics"); it != doc.end()) {
    detail::reject_unknown(*it, "dynamics", {"unitary", "channel"});
    if (it->contains("unitary") == it->contains("channel")) {
      throw InvalidConfig("dynamics: exactly one of \"unitary\" or \"channel\" is required");
    }
    if (const auto u = it->find("unitary"); u != it->end()) {
      detail::reject_unknown(*u, "dynamics.unitary", {"g1", "g2"});
      UnitaryDyn d;
      read_number(*u, "dynamics.unitary", "g1", d.g1);
      read_number(*u, "dynamics.unitary", "g2", d.g2);
      cfg.dynamics = d;
    } else {
      const Json& c = (*it)["channel"];
      const std::string path = "dynamics.channel";
      detail::reject_unknown(c, path, {"p", "gamma12", "gamma23", "gamma13", "strict_composition"});
      ChannelDyn d;
      read_number(c, path, "p", d.p);
      read_number(c, path, "gamma12", d.gamma12);
      read_number(c, path, "gamma23", d.gamma23);
      read_number(c, path, "gamma13", d.gamma13);
      if (const auto s = c.find("strict_composition"); s != c.end()) {
        if (!s->is_boolean()) throw InvalidConfig(path + ".strict_composition: expected true or false");
        d.strict_composition = s->get<bool>();
      }
      cfg.dynamics = d;
    }
  }
  validate(cfg);
  return cfg;
}

struct OutputOptions {
  std::string format;  // "text", "json" or "csv"; empty means the command default
  std::string path;    // empty means stdout
};

struct RunConfigFile {
  ScenarioConfig scenario;
  std::optional<SweepSpec> sweep;
  OutputOptions output;
};

inline RunConfigFile parse_run_config(const Json& doc) {
  detail::reject_unknown(doc, "", {"schema", "state", "measurement", "dynamics", "sweep", "output"});
  if (const auto s = doc.find("schema"); s != doc.end()) {
    if (!s->is_string() || s->get<std::string>() != kSchemaVersion) {
      throw InvalidConfig("schema: unsupported version (expected \"1\")");
    }
  }
  RunConfigFile out;
  out.scenario = scenario_from_json(doc);

  if (const auto it = doc.find("sweep"); it != doc.end()) {
    detail::reject_unknown(*it, "sweep", {"axes", "quantities"});
    SweepSpec spec;
    spec.base = out.scenario;
    const auto axes = it->find("axes");
    if (axes == it->end() || !axes->is_array()) throw InvalidConfig("sweep.axes: expected an array");
    for (std::size_t i = 0; i < axes->size(); ++i) {
      const std::string path = "sweep.axes[" + std::to_string(i) + "]";
      const Json& a = (*axes)[i];
      detail::reject_unknown(a, path, {"name", "start", "stop", "steps"});
      SweepAxis axis;
      if (!a.contains("name") || !a["name"].is_string()) throw InvalidConfig(path + ".name: expected a string");
      axis.name = a["name"].get<std::string>();
      detail::read_number(a, path, "start", axis.start);
      axis.stop = axis.start;
      detail::read_number(a, path, "stop", axis.stop);
      if (const auto st = a.find("steps"); st != a.end()) {
        if (!st->is_number_integer()) throw InvalidConfig(path + ".steps: expected an integer");
        axis.steps = st->get<int>();
      }
      spec.axes.push_back(axis);
    }
    const auto qs = it->find("quantities");
    if (qs == it->end() || !qs->is_array()) throw InvalidConfig("sweep.quantities: expected an array");
    for (std::size_t i = 0; i < qs->size(); ++i) {
      if (!(*qs)[i].is_string()) throw InvalidConfig("sweep.quantities[" + std::to_string(i) + "]: expected a string");
      spec.quantities.push_back((*qs)[i].get<std::string>());
    }
    out.sweep = spec;
  }

  if (const auto it = doc.find("output"); it != doc.end()) {
    detail::reject_unknown(*it, "output", {"format", "path"});
    if (const auto f = it->find("format"); f != it->end()) {
      const std::string v = f->is_string() ? f->get<std::string>() : "";
      if (v != "text" && v != "json" && v != "csv") {
        throw InvalidConfig("output.format: expected \"text\", \"json\" or \"csv\"");
      }
      out.output.format = v;
    }
    if (const auto p = it->find("path"); p != it->end()) {
      if (!p->is_string()) throw InvalidConfig("output.path: expected a string");
      out.output.path = p->get<std::string>();
    }
  }
  return out;
}

inline RunConfigFile parse_run_config_text(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig(std::string("config: not valid JSON (") + e.what() + ")");
  }
  return parse_run_config(doc);
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const ScenarioConfig& cfg) {
  Json j;
  j["state"] = {{"theta", cfg.state.theta}, {"phi", cfg.state.phi}};
  j["measurement"] = {{"eta", cfg.measurement.eta},
                      {"bias", bias_name(cfg.measurement.bias)},
                      {"alpha", cfg.measurement.effective_alpha()}};
  if (cfg.is_unitary()) {
    j["dynamics"]["unitary"] = {{"g1", cfg.unitary().g1}, {"g2", cfg.unitary().g2}};
  } else {
    const ChannelDyn& c = cfg.channel();
    j["dynamics"]["channel"] = {{"p", c.p},
                                {"gamma12", c.gamma12},
                                {"gamma23", c.gamma23},
                                {"gamma13", c.effective_gamma13()},
                                {"strict_composition", c.strict_composition}};
  }
  return j;
}

inline Json to_json(const DTable& t) {
  Json j = Json::object();
  const char* s[2] = {"+", "-"};
  if (t.arity == 1) {
    for (int a = 0; a < 2; ++a) j[s[a]] = t.values[a];
  } else {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) j[std::string(s[a]) + s[b]] = t.values[2 * a + b];
  }
  return j;
}

inline Json evaluation_report(const ScenarioConfig& cfg) {
  const LgValues lg = evaluate_numeric(cfg);
  const NsitReport r = analyze(cfg);
  Json j;
  j["schema"] = kSchemaVersion;
  j["config"] = to_json(cfg);
  j["regime"] = regime_name(regime_of(cfg));
  j["lg"] = {{"L", lg.L},
             {"V", lg.V},
             {"correlators",
              {{"M1M2", lg.correlators.m1m2},
               {"M2M3", lg.correlators.m2m3},
               {"M1M3", lg.correlators.m1m3},
               {"M1M2M3", lg.correlators.m1m2m3},
               {"M2", lg.correlators.m2}}},
             {"L_relabelings", lg.L_variants},
             {"V_relabelings", lg.V_variants}};
  if (closed_form_covers(cfg)) {
    j["closed_form"] = {{"L", closed_form_L(cfg)}, {"V", closed_form_V(cfg)}};
  } else {
    j["closed_form"] = nullptr;
  }
  const NsitReductions& d = r.reductions;
  j["nsit"] = {{"D(1)23", to_json(r.d_1_23)},
               {"D1(2)3", to_json(r.d1_2_3)},
               {"D(1)2", to_json(r.d_1_2)},
               {"beta", r.beta},
               {"delta", r.delta},
               {"L123", r.l123},
               {"V123", r.v123},
               {"lhs_L_condition", r.lhs_L_condition},
               {"rhs_2beta", 2 * r.beta},
               {"lhs_V_condition", r.lhs_V_condition},
               {"rhs_4delta", 4 * r.delta},
               {"L_condition_holds", r.L_condition_holds},
               {"V_condition_holds", r.V_condition_holds},
               {"reductions",
                {{"D13_same", d.d13_same},
                 {"D13_corr", d.d13_corr},
                 {"D13_anti", d.d13_anti},
                 {"D23_same", d.d23_same},
                 {"D23_corr", d.d23_corr},
                 {"D2_plus", d.d2_plus},
                 {"D2_minus", d.d2_minus},
                 {"D2_corr", d.d2_corr},
                 {"D2_anti", d.d2_anti},
                 {"max_abs", d.max_abs}}}};
  Json bindings = Json::array();
  for (const auto& b : kReductionBindings) {
    bindings.push_back({{"printed", b.printed}, {"reduction", b.reduction}, {"note", b.note}});
  }
  j["nsit"]["reduction_bindings"] = bindings;
  j["aot_residual"] = aot_check(cfg);
  return j;
}

}  // namespace lglab
