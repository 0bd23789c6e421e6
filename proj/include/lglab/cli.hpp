#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config_io.hpp"
#include "errors.hpp"
#include "explorer.hpp"
#include "verification.hpp"

namespace lglab::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kInvalid = 2, kUnwritable = 3, kNoViolation = 4 };

class UnwritablePath : public Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Figures

struct FigureSpec {
  SweepSpec sweep;
  std::vector<std::string> header;  // column names written to the CSV
};

inline constexpr int kFigurePoints = 101;

inline FigureSpec figure_spec(int id) {
  using std::numbers::pi;
  FigureSpec f;
  ScenarioConfig& base = f.sweep.base;
  if (id == 1 || id == 2 || id == 4 || id == 6) {
    base.dynamics = ChannelDyn{};
  } else {
    base.dynamics = UnitaryDyn{};
  }
  switch (id) {
    case 1:
    case 2: {
      const char* q = id == 1 ? "L" : "V";
      f.sweep.axes = {{"p", 0.0, 1.0, kFigurePoints}, {"gamma12", 0.0, 1.0, kFigurePoints}};
      f.sweep.quantities = {q};
      f.header = {"p", "gamma12", q};
      break;
    }
    case 3:
      base.unitary().g2 = pi / 6;
      f.sweep.axes = {{"g1", 0.0, pi, kFigurePoints}};
      f.sweep.quantities = {"L", "D13_anti"};
      f.header = {"g1", "L", "D"};
      break;
    case 4:
      f.sweep.axes = {{"gamma12", 0.0, 1.0, kFigurePoints}};
      f.sweep.quantities = {"L", "D13_same"};
      f.header = {"gamma12", "L", "D"};
      break;
    case 5:
      base.state = {pi / 4, pi / 2};
      base.unitary().g2 = pi / 4;
      f.sweep.axes = {{"g1", 0.0, pi, kFigurePoints}};
      f.sweep.quantities = {"V", "D13_anti", "D2_anti"};
      f.header = {"g1", "V", "D13", "D2"};
      break;
    case 6:
      f.sweep.axes = {{"gamma12", 0.0, 1.0, kFigurePoints}};
      f.sweep.quantities = {"V", "D13_same"};
      f.header = {"gamma12", "V", "D"};
      break;
    default:
      throw InvalidConfig("figure.id: must be between 1 and 6 (got " + std::to_string(id) + ")");
  }
  return f;
}

inline SweepTable figure_table(int id) {
  FigureSpec f = figure_spec(id);
  SweepTable t = sweep(f.sweep);
  t.header = f.header;
  return t;
}

// ---------------------------------------------------------------------------
// Shared scenario flags

struct ScenarioFlags {
  std::string config_path;
  std::map<std::string, double> values;
  std::string bias;
  bool unitary = false;
  bool channel = false;
  bool strict = false;
  CLI::App* app = nullptr;

  bool given(const std::string& flag) const {
    const CLI::Option* o = app->get_option_no_throw("--" + flag);
    return o != nullptr && o->count() > 0;
  }
};

inline void add_scenario_flags(CLI::App* sub, ScenarioFlags& f) {
  f.app = sub;
  sub->add_option("--config", f.config_path, "JSON config document")->check(CLI::ExistingFile);
  auto num = [&](const std::string& name, const std::string& help) {
    return sub->add_option("--" + name, f.values[name], help);
  };
  for (const char* angle : {"theta", "phi", "g1", "g2"}) {
    const std::string a = angle;
    auto* rad = num(a, a + " in radians");
    auto* deg = num(a + "-deg", a + " in degrees");
    rad->excludes(deg);
  }
  num("eta", "measurement sharpness");
  num("alpha", "measurement bias (implies --bias free)");
  sub->add_option("--bias", f.bias, "unbiased | complementary | free")
      ->check(CLI::IsMember({"unbiased", "complementary", "free"}));
  auto* u = sub->add_flag("--unitary", f.unitary, "unitary dynamics (g1, g2)");
  auto* c = sub->add_flag("--channel", f.channel, "GAD channel dynamics (p, gamma12, gamma23, gamma13)");
  u->excludes(c);
  for (const char* k : {"p", "gamma12", "gamma23", "gamma13"}) num(k, std::string("channel ") + k);
  sub->add_flag("--strict-composition", f.strict, "derive gamma13 from gamma12 and gamma23");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidConfig("config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Config file first, then flags on top of it.
inline RunConfigFile build_run_config(const ScenarioFlags& f) {
  RunConfigFile run;
  if (!f.config_path.empty()) run = parse_run_config_text(read_file(f.config_path));
  ScenarioConfig& cfg = run.scenario;

  if (f.channel && !cfg.is_channel()) cfg.dynamics = ChannelDyn{};
  if (f.unitary && !cfg.is_unitary()) cfg.dynamics = UnitaryDyn{};

  auto value = [&](const std::string& name) -> std::optional<double> {
    if (f.given(name)) return f.values.at(name);
    if (f.given(name + "-deg")) return f.values.at(name + "-deg") * std::numbers::pi / 180.0;
    return std::nullopt;
  };
  if (auto v = value("theta")) cfg.state.theta = *v;
  if (auto v = value("phi")) cfg.state.phi = *v;
  if (auto v = value("eta")) cfg.measurement.eta = *v;
  if (!f.bias.empty()) cfg.measurement.bias = *parse_bias(f.bias);
  if (auto v = value("alpha")) {
    if (!f.bias.empty() && cfg.measurement.bias != BiasMode::free) {
      throw InvalidConfig("measurement.alpha: only allowed with --bias free");
    }
    cfg.measurement.bias = BiasMode::free;
    cfg.measurement.alpha = *v;
  }
  for (const char* k : {"g1", "g2"}) {
    if (auto v = value(k)) {
      if (!cfg.is_unitary()) throw InvalidConfig(std::string("dynamics.unitary.") + k + ": requires unitary dynamics");
      (std::string(k) == "g1" ? cfg.unitary().g1 : cfg.unitary().g2) = *v;
    }
  }
  for (const char* k : {"p", "gamma12", "gamma23", "gamma13"}) {
    if (auto v = value(k)) {
      if (!cfg.is_channel()) throw InvalidConfig(std::string("dynamics.channel.") + k + ": requires --channel");
      set_parameter(cfg, k, *v);
    }
  }
  if (f.strict) {
    if (!cfg.is_channel()) throw InvalidConfig("dynamics.channel.strict_composition: requires --channel");
    cfg.channel().strict_composition = true;
  }
  validate(cfg);
  if (run.sweep) run.sweep->base = cfg;
  return run;
}

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw UnwritablePath("cannot write '" + path + "'");
  file << content;
  file.flush();
  if (!file) throw UnwritablePath("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Text rendering

inline std::string table_text(const DTable& t) {
  std::ostringstream os;
  const char* s[2] = {"+", "-"};
  if (t.arity == 1) {
    for (int a = 0; a < 2; ++a) os << " (" << s[a] << ")=" << format_number(t.values[a]);
  } else {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) os << " (" << s[a] << s[b] << ")=" << format_number(t.values[2 * a + b]);
  }
  return os.str();
}

inline std::string evaluation_text(const ScenarioConfig& cfg) {
  const LgValues lg = evaluate_numeric(cfg);
  const NsitReport r = analyze(cfg);
  std::ostringstream os;
  os << "config: " << to_flags(cfg) << '\n';
  os << "regime: " << regime_name(regime_of(cfg)) << '\n';
  os << "L = " << format_number(lg.L) << '\n';
  os << "V = " << format_number(lg.V) << '\n';
  if (closed_form_covers(cfg)) {
    os << "closed form: L = " << format_number(closed_form_L(cfg)) << ", V = " << format_number(closed_form_V(cfg))
       << '\n';
  }
  const Correlators& c = lg.correlators;
  os << "<M1M2> = " << format_number(c.m1m2) << "  <M2M3> = " << format_number(c.m2m3)
     << "  <M1M3> = " << format_number(c.m1m3) << "  <M1M2M3> = " << format_number(c.m1m2m3)
     << "  <M2> = " << format_number(c.m2) << '\n';
  os << "D(1)23(m2,m3):" << table_text(r.d_1_23) << '\n';
  os << "D1(2)3(m1,m3):" << table_text(r.d1_2_3) << '\n';
  os << "D(1)2(m2):" << table_text(r.d_1_2) << '\n';
  os << "beta = " << format_number(r.beta) << "  delta = " << format_number(r.delta)
     << "  L123 = " << format_number(r.l123) << "  V123 = " << format_number(r.v123) << '\n';
  os << "L condition: " << format_number(r.lhs_L_condition) << (r.L_condition_holds ? " > " : " <= ")
     << format_number(2 * r.beta) << " (2 beta)\n";
  os << "V condition: " << format_number(r.lhs_V_condition) << (r.V_condition_holds ? " > " : " <= ")
     << format_number(4 * r.delta) << " (4 delta)\n";
  const NsitReductions& d = r.reductions;
  os << "D13_same = " << format_number(d.d13_same) << "  D13_anti = " << format_number(d.d13_anti)
     << "  D2_anti = " << format_number(d.d2_anti) << "  max|D| = " << format_number(d.max_abs) << '\n';
  os << "AOT residual = " << format_number(aot_check(cfg), 3) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Entry point

namespace detail {
/// Parses "name:lo:hi" or "name:start:stop:steps".
inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

inline double to_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw InvalidConfig(what + ": '" + s + "' is not a number");
  return v;
}
}  // namespace detail

/// Runs the command line `args` (without the program name). Output and
/// diagnostics go to the given streams; the return value is the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Leggett-Garg inequality laboratory: sequential qubit measurements under unitary and GAD dynamics", "lglab"};
  app.require_subcommand(1);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "evaluate L, V and the NSIT report for one configuration");
  ScenarioFlags eval_flags;
  bool eval_json = false;
  std::string eval_out;
  add_scenario_flags(eval, eval_flags);
  eval->add_flag("--json", eval_json, "machine-readable report");
  eval->add_option("--out", eval_out, "write the report to this file");

  // figure
  auto* fig = app.add_subcommand("figure", "write the CSV data behind figure 1..6");
  int fig_id = 0;
  std::string fig_out;
  fig->add_option("--id", fig_id, "figure number")->required();
  fig->add_option("--out", fig_out, "CSV path (stdout if omitted)");

  // sweep
  auto* sw = app.add_subcommand("sweep", "grid sweep over up to three parameters");
  ScenarioFlags sw_flags;
  std::vector<std::string> sw_axes;
  std::vector<std::string> sw_quantities;
  std::string sw_out;
  add_scenario_flags(sw, sw_flags);
  sw->add_option("--axis", sw_axes, "name:start:stop:steps (repeatable)");
  sw->add_option("--quantity", sw_quantities, "output quantity (repeatable)");
  sw->add_option("--out", sw_out, "CSV path (stdout if omitted)");

  // optimize
  auto* opt = app.add_subcommand("optimize", "maximize a quantity over free parameters");
  ScenarioFlags opt_flags;
  std::string opt_objective = "L";
  std::vector<std::string> opt_free;
  OptOptions opt_options;
  bool opt_json = false;
  add_scenario_flags(opt, opt_flags);
  opt->add_option("--objective", opt_objective, "quantity to maximize");
  opt->add_option("--free", opt_free, "name:lo:hi (repeatable)")->required();
  opt->add_option("--grid", opt_options.grid_points, "coarse grid points per axis")->check(CLI::Range(2, 1000));
  opt->add_option("--rounds", opt_options.rounds, "refinement rounds")->check(CLI::Range(0, 64));
  opt->add_flag("--json", opt_json, "machine-readable result");

  // threshold
  auto* thr = app.add_subcommand("threshold", "critical sharpness for a violation");
  std::string thr_objective = "L";
  std::string thr_regime = "unitary-unbiased";
  ThresholdOptions thr_options;
  bool thr_json = false;
  thr->add_option("--objective", thr_objective, "L or V")->check(CLI::IsMember({"L", "V"}));
  thr->add_option("--regime", thr_regime, "unitary-unbiased | channel-unbiased | channel-biased")
      ->check(CLI::IsMember({"unitary-unbiased", "channel-unbiased", "channel-biased"}));
  thr->add_option("--grid", thr_options.inner.grid_points, "inner grid points per axis")->check(CLI::Range(2, 200));
  thr->add_flag("--json", thr_json, "machine-readable result");

  // verify
  auto* ver = app.add_subcommand("verify", "closed-form, identity, physicality and AOT checks on random configs");
  std::uint64_t ver_seed = 1;
  int ver_trials = 500;
  ver->add_option("--seed", ver_seed, "random seed");
  ver->add_option("--trials", ver_trials, "configurations per check");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }

  try {
    if (*eval) {
      const RunConfigFile run = build_run_config(eval_flags);
      const bool json = eval_json || run.output.format == "json";
      const std::string path = eval_out.empty() ? run.output.path : eval_out;
      emit(path, json ? evaluation_report(run.scenario).dump(2) + "\n" : evaluation_text(run.scenario), out);
    } else if (*fig) {
      std::ostringstream csv;
      write_csv(csv, figure_table(fig_id));
      emit(fig_out, csv.str(), out);
    } else if (*sw) {
      RunConfigFile run = build_run_config(sw_flags);
      SweepSpec spec = run.sweep.value_or(SweepSpec{});
      spec.base = run.scenario;
      if (!sw_axes.empty()) spec.axes.clear();
      for (const auto& a : sw_axes) {
        const auto parts = detail::split(a, ':');
        if (parts.size() != 4) throw InvalidConfig("--axis: expected name:start:stop:steps, got '" + a + "'");
        spec.axes.push_back({parts[0], detail::to_double(parts[1], "--axis start"),
                             detail::to_double(parts[2], "--axis stop"),
                             static_cast<int>(detail::to_double(parts[3], "--axis steps"))});
      }
      if (!sw_quantities.empty()) spec.quantities = sw_quantities;
      std::ostringstream csv;
      write_csv(csv, sweep(spec));
      emit(sw_out.empty() ? run.output.path : sw_out, csv.str(), out);
    } else if (*opt) {
      const RunConfigFile run = build_run_config(opt_flags);
      std::vector<Bound> bounds;
      for (const auto& s : opt_free) {
        const auto parts = detail::split(s, ':');
        if (parts.size() != 3) throw InvalidConfig("--free: expected name:lo:hi, got '" + s + "'");
        bounds.push_back({parts[0], detail::to_double(parts[1], "--free lo"), detail::to_double(parts[2], "--free hi")});
      }
      const OptResult r = maximize(opt_objective, run.scenario, bounds, opt_options);
      if (opt_json) {
        Json j;
        j["schema"] = kSchemaVersion;
        j["objective"] = opt_objective;
        j["best_value"] = r.best_value;
        j["best_config"] = to_json(r.best_config);
        Json trace = Json::array();
        for (const auto& t : r.trace) trace.push_back({t.iteration, t.value});
        j["trace"] = trace;
        out << j.dump(2) << '\n';
      } else {
        out << "max " << opt_objective << " = " << format_number(r.best_value) << '\n';
        for (std::size_t k = 0; k < bounds.size(); ++k) {
          out << "  " << bounds[k].name << " = " << format_number(r.best_point[k]) << '\n';
        }
        out << "config: " << to_flags(r.best_config) << '\n';
      }
    } else if (*thr) {
      const ThresholdRegime regime = *parse_threshold_regime(thr_regime);
      const ThresholdResult r = eta_threshold(thr_objective, regime, thr_options);
      if (thr_json) {
        Json j;
        j["schema"] = kSchemaVersion;
        j["objective"] = thr_objective;
        j["regime"] = thr_regime;
        j["eta"] = r.eta;
        j["bracket"] = {r.lo, r.hi};
        out << j.dump(2) << '\n';
      } else {
        out << "critical eta (" << thr_objective << ", " << thr_regime << ") = " << format_number(r.eta, 6)
            << "  bracket [" << format_number(r.lo, 6) << ", " << format_number(r.hi, 6) << "]\n";
      }
    } else if (*ver) {
      if (ver_trials < 1) throw InvalidConfig("verify.trials: must be at least 1");
      const VerifyReport rep = run_verification(ver_seed, ver_trials);
      print_verify_report(out, rep);
      return rep.passed() ? kOk : kCheckFailed;
    }
  } catch (const UnwritablePath& e) {
    err << "error: " << e.what() << '\n';
    return kUnwritable;
  } catch (const NoViolationAnywhere& e) {
    err << "error: " << e.what() << '\n';
    return kNoViolation;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kOk;
}

}  // namespace lglab::cli
