#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <type_traits>
#include <vector>

#include "equilibria.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "lyapunov.hpp"
#include "model.hpp"
#include "params.hpp"
#include "solver.hpp"
#include "stability.hpp"

namespace hcvrd {

/// base + amplitude * cos(mode * pi * x / L); every profile has zero flux at both ends.
struct FieldProfile {
  double base = 0.0;
  double amplitude = 0.0;
  int mode = 0;

  double value(double x, double length) const {
    return base + amplitude * std::cos(mode * std::numbers::pi * x / length);
  }
  bool operator==(const FieldProfile&) const = default;
};

struct InitialCondition {
  FieldProfile H, I, V;
  bool operator==(const InitialCondition&) const = default;
};

struct Scenario {
  std::string name = "custom";
  ModelParams params;
  InitialCondition init;
  double length = 1.0;
  std::size_t n_cells = 101;
  SolverConfig solver;
  std::size_t l_max = 64;
  bool monitors = true;

  bool operator==(const Scenario&) const = default;
};

inline Grid1D scenario_grid(const Scenario& s) { return make_grid(s.length, s.n_cells); }

inline FieldState initial_state(const Scenario& s) {
  const auto g = scenario_grid(s);
  FieldState f = uniform_state(g, {});
  for (std::size_t i = 0; i < g.n_cells; ++i) {
    const double x = g.position(i);
    f.set(i, {s.init.H.value(x, s.length), s.init.I.value(x, s.length),
              s.init.V.value(x, s.length)});
  }
  return f;
}

inline const Scenario& validate(const Scenario& s) {
  validate(s.params);
  const std::pair<const char*, const FieldProfile*> fields[] = {
      {"H0", &s.init.H}, {"I0", &s.init.I}, {"V0", &s.init.V}};
  for (auto [key, f] : fields) {
    if (!std::isfinite(f->base) || !std::isfinite(f->amplitude))
      throw ConfigError(key, std::string("initial profile '") + key + "' must be finite");
    if (f->mode < 0) throw ConfigError(std::string(key) + "_mode", "mode must be >= 0");
    const double lowest = f->mode == 0 ? f->base + f->amplitude : f->base - std::abs(f->amplitude);
    if (lowest < 0.0)
      throw ConfigError(key, std::string("initial profile '") + key + "' must be nonnegative");
  }
  if (!(s.length > 0.0) || !std::isfinite(s.length))
    throw ConfigError("length", "length must be > 0");
  if (s.n_cells < 3) throw ConfigError("n_cells", "n_cells must be >= 3");
  if (!(s.solver.t_end > 0.0) || !std::isfinite(s.solver.t_end))
    throw ConfigError("t_end", "t_end must be > 0");
  if (s.solver.dt && !(*s.solver.dt > 0.0)) throw ConfigError("dt", "dt must be > 0 or 'auto'");
  if (!(s.solver.cfl_safety > 0.0 && s.solver.cfl_safety <= 1.0))
    throw ConfigError("cfl_safety", "cfl_safety must lie in (0, 1]");
  if (s.l_max < 1) throw ConfigError("l_max", "l_max must be >= 1");
  return s;
}

/// Model constants shared by the two built-in runs.
inline ModelParams reference_params(double mu) {
  ModelParams p;
  p.lambda = 50.0;
  p.d = 5.0;
  p.rho = 0.01;
  p.alpha = 0.05;
  p.D1 = p.D2 = p.D3 = 0.1;
  p.eta = 0.00004;
  p.alpha3 = 0.03;
  p.epsilon = 0.5;
  p.alpha2 = 0.02;
  p.k = 2.0;
  p.alpha1 = 0.1;
  p.mu = mu;
  p.alpha0 = 1.0;
  p.beta = 0.24;
  p.u = 1;
  return p;
}

inline std::vector<Scenario> builtin_scenarios() {
  Scenario s1;
  s1.name = "paper-set-1";
  s1.params = reference_params(20.0);
  s1.init = {{5.0}, {5.0}, {5.0}};
  s1.solver.t_end = 10.0;

  Scenario s2 = s1;
  s2.name = "paper-set-2";
  s2.params = reference_params(2.0);
  s2.init = {{15.0}, {5.0}, {5.0}};
  s2.solver.t_end = 100.0;

  // No absorption and Crowley-Martin incidence; heterogeneous healthy cells.
  Scenario s3 = s2;
  s3.name = "restricted-persistence";
  s3.params.u = 0;
  s3.params.alpha3 = s3.params.alpha1 * s3.params.alpha2;
  s3.init = {{15.0, 5.0, 1}, {5.0}, {5.0}};
  return {s1, s2, s3};
}

inline Scenario builtin_scenario(std::string_view name) {
  for (auto& s : builtin_scenarios())
    if (s.name == name) return s;
  throw ConfigError("scenario", "unknown scenario '" + std::string(name) + "'");
}

namespace detail {

inline bool parse_flag(std::string_view v, const std::string& key) {
  v = trim(v);
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ConfigError(key, "value for '" + key + "' must be 0/1/true/false");
}

inline std::size_t parse_count(std::string_view v, const std::string& key) {
  const double x = parse_double(v, key);
  if (!(x >= 0.0) || x != std::floor(x) || x > 1e15)
    throw ConfigError(key, "value for '" + key + "' must be a nonnegative integer");
  return static_cast<std::size_t>(x);
}

}  // namespace detail

/// Flat `key = value` text; '#' starts a comment. All model constants and H0, I0, V0
/// are required; grid and solver keys are optional. Unknown or repeated keys are errors.
inline Scenario parse_config(std::istream& in) {
  std::map<std::string, std::string, std::less<>> kv;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
    std::string key(trim(body.substr(0, eq)));
    std::string value(trim(body.substr(eq + 1)));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) throw ConfigError(key, "duplicate key '" + key + "'");
  }

  Scenario s;
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    auto v = it->second;
    kv.erase(it);
    return v;
  };
  auto require = [&](const std::string& key) {
    auto v = take(key);
    if (!v) throw ConfigError(key, "missing key '" + key + "'");
    return *v;
  };

  for (auto key : kParamKeys) {
    const std::string k(key);
    set_param(s.params, k, parse_double(require(k), k));
  }
  const std::pair<const char*, FieldProfile*> fields[] = {
      {"H0", &s.init.H}, {"I0", &s.init.I}, {"V0", &s.init.V}};
  for (auto [key, f] : fields) {
    const std::string k(key);
    f->base = parse_double(require(k), k);
    if (auto v = take(k + "_amp")) f->amplitude = parse_double(*v, k + "_amp");
    if (auto v = take(k + "_mode"))
      f->mode = static_cast<int>(detail::parse_count(*v, k + "_mode"));
  }
  if (auto v = take("name")) s.name = *v;
  if (auto v = take("length")) s.length = parse_double(*v, "length");
  if (auto v = take("n_cells")) s.n_cells = detail::parse_count(*v, "n_cells");
  if (auto v = take("dt")) {
    if (trim(*v) == "auto")
      s.solver.dt.reset();
    else
      s.solver.dt = parse_double(*v, "dt");
  }
  if (auto v = take("t_end")) s.solver.t_end = parse_double(*v, "t_end");
  if (auto v = take("snapshot_stride"))
    s.solver.snapshot_stride = detail::parse_count(*v, "snapshot_stride");
  if (auto v = take("cfl_safety")) s.solver.cfl_safety = parse_double(*v, "cfl_safety");
  if (auto v = take("positivity_clamp"))
    s.solver.positivity_clamp = detail::parse_flag(*v, "positivity_clamp");
  if (auto v = take("fail_on_violation"))
    s.solver.fail_on_violation = detail::parse_flag(*v, "fail_on_violation");
  if (auto v = take("l_max")) s.l_max = detail::parse_count(*v, "l_max");
  if (auto v = take("monitors")) s.monitors = detail::parse_flag(*v, "monitors");

  if (!kv.empty()) {
    const auto& key = kv.begin()->first;
    throw ConfigError(key, "unknown key '" + key + "'");
  }
  validate(s);
  return s;
}

inline Scenario parse_config(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_config(in);
}

inline Scenario load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path.string() + "'");
  return parse_config(in);
}

/// Text that parse_config() maps back to an identical Scenario.
inline std::string emit_config(const Scenario& s) {
  std::ostringstream os;
  os << "name = " << s.name << '\n';
  for (auto key : kParamKeys) os << key << " = " << format_double(get_param(s.params, key)) << '\n';
  const std::pair<const char*, const FieldProfile*> fields[] = {
      {"H0", &s.init.H}, {"I0", &s.init.I}, {"V0", &s.init.V}};
  for (auto [key, f] : fields) {
    os << key << " = " << format_double(f->base) << '\n';
    if (f->amplitude != 0.0 || f->mode != 0)
      os << key << "_amp = " << format_double(f->amplitude) << '\n'
         << key << "_mode = " << f->mode << '\n';
  }
  os << "length = " << format_double(s.length) << '\n'
     << "n_cells = " << s.n_cells << '\n'
     << "dt = " << (s.solver.dt ? format_double(*s.solver.dt) : std::string("auto")) << '\n'
     << "t_end = " << format_double(s.solver.t_end) << '\n'
     << "snapshot_stride = " << s.solver.snapshot_stride << '\n'
     << "cfl_safety = " << format_double(s.solver.cfl_safety) << '\n'
     << "positivity_clamp = " << (s.solver.positivity_clamp ? 1 : 0) << '\n'
     << "fail_on_violation = " << (s.solver.fail_on_violation ? 1 : 0) << '\n'
     << "l_max = " << s.l_max << '\n'
     << "monitors = " << (s.monitors ? 1 : 0) << '\n';
  return os.str();
}

struct FieldSummary {
  PointState min, mean, max;
};

inline FieldSummary summarize(const Grid1D& g, const FieldState& s) {
  FieldSummary r;
  const double h = g.spacing();
  r.min = {min_value(s.H), min_value(s.I), min_value(s.V)};
  r.max = {max_value(s.H), max_value(s.I), max_value(s.V)};
  r.mean = {trapezoid(s.H, h) / g.length, trapezoid(s.I, h) / g.length,
            trapezoid(s.V, h) / g.length};
  return r;
}

/// Sup-norm distance from a field to a homogeneous state.
inline double field_distance(const FieldState& s, const PointState& target) {
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) d = std::max(d, sup_norm(s.at(i) - target));
  return d;
}

struct MonitorVerdict {
  std::string name;
  bool ok = true;
  std::size_t violations = 0;
  double worst = 0.0;  ///< largest recorded value (smallest for min_value)
};

struct RunReport {
  std::string scenario;
  DerivedQuantities derived;
  InitialMaxima initial;
  EquilibriumReport equilibria;
  StabilityReport stability;
  bool completed = false;
  std::string failure;
  Trajectory trajectory;
  std::optional<FieldSummary> final_summary;
  double final_t = 0.0;
  double final_distance_e0 = 0.0;
  std::optional<double> final_distance_estar;
  std::vector<MonitorVerdict> monitor_verdicts;
  LyapunovTrace lyapunov;
  std::optional<DecayCheck> l1_decay;
  std::optional<DecayCheck> l2_decay;
  std::vector<std::filesystem::path> files;

  bool monitors_ok() const {
    return std::all_of(monitor_verdicts.begin(), monitor_verdicts.end(),
                       [](const MonitorVerdict& v) { return v.ok; });
  }
};

inline constexpr double kDecayTolerance = 1e-8;

inline std::vector<Monitor> standard_monitors(const Scenario& s, const DerivedQuantities& dq,
                                              const InitialMaxima& init,
                                              const EquilibriumReport& eq) {
  const auto g = scenario_grid(s);
  const double scale = std::max(dq.Hm, dq.Vm);
  std::vector<Monitor> m{positivity_monitor(scale), bounds_monitor(dq),
                         comparison_monitor(s.params, dq, init), l1_monitor(s.params, g)};
  if (restriction_holds(s.params) && eq.Estar)
    m.push_back(l2_monitor(s.params, g, *eq.Estar, scale));
  return m;
}

inline void write_fields_csv(std::ostream& os, const Grid1D& g, const Trajectory& traj) {
  os << "t,x,H,I,V\n";
  for (const auto& s : traj.snapshots)
    for (std::size_t i = 0; i < s.size(); ++i)
      os << format_double(s.t) << ',' << format_double(g.position(i)) << ','
         << format_double(s.H[i]) << ',' << format_double(s.I[i]) << ','
         << format_double(s.V[i]) << '\n';
}

inline void write_summary_csv(std::ostream& os, const Grid1D& g, const Trajectory& traj,
                              const LyapunovTrace& ly) {
  os << "t,H_min,H_mean,H_max,I_min,I_mean,I_max,V_min,V_mean,V_max";
  for (const auto& m : traj.monitors)
    if (m.name != "L1" && m.name != "L2") os << ',' << m.name;
  os << ",L1,L2,dL1dt,dL2dt\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto at = [nan](const std::vector<double>& v, std::size_t k) {
    return k < v.size() ? v[k] : nan;
  };
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto sm = summarize(g, traj.snapshots[k]);
    os << format_double(traj.snapshots[k].t);
    for (auto [lo, me, hi] : {std::tuple{sm.min.H, sm.mean.H, sm.max.H},
                              std::tuple{sm.min.I, sm.mean.I, sm.max.I},
                              std::tuple{sm.min.V, sm.mean.V, sm.max.V}})
      os << ',' << format_double(lo) << ',' << format_double(me) << ',' << format_double(hi);
    for (const auto& m : traj.monitors)
      if (m.name != "L1" && m.name != "L2") os << ',' << format_double(m.values[k]);
    os << ',' << format_double(at(ly.l1_values, k)) << ',' << format_double(at(ly.l2_values, k))
       << ',' << format_double(at(ly.dl1dt, k)) << ',' << format_double(at(ly.dl2dt, k)) << '\n';
  }
}

/// Flat key=value lines.
inline void write_report(std::ostream& os, const RunReport& r) {
  auto kv = [&os](const std::string& k, const auto& v) {
    os << k << '=';
    if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>)
      os << format_double(v);
    else
      os << v;
    os << '\n';
  };
  auto point = [&](const std::string& k, const PointState& s) {
    kv(k + ".H", s.H);
    kv(k + ".I", s.I);
    kv(k + ".V", s.V);
  };
  kv("scenario", r.scenario);
  const auto& d = r.derived;
  kv("derived.Lambda", d.Lambda);
  kv("derived.gamma", d.gamma);
  kv("derived.delta1", d.delta1);
  kv("derived.delta2", d.delta2);
  kv("derived.Hm", d.Hm);
  kv("derived.Vm", d.Vm);
  kv("derived.R0", d.R0);
  kv("derived.tau0", d.tau0);
  point("equilibria.E0", r.equilibria.E0);
  kv("equilibria.exists_Estar", r.equilibria.exists_Estar ? 1 : 0);
  kv("equilibria.absence_reason", to_string(r.equilibria.reason));
  if (r.equilibria.Estar) {
    point("equilibria.Estar", *r.equilibria.Estar);
    kv("equilibria.psi_root_residual", r.equilibria.psi_root_residual);
    kv("equilibria.reaction_residual", r.equilibria.reaction_residual);
    kv("equilibria.residual_scale", r.equilibria.residual_scale);
  }
  const auto& st = r.stability;
  kv("stability.modes", st.e0_modes.size());
  kv("stability.E0.verdict", to_string(st.e0_verdict));
  kv("stability.E0.first_unstable_mode", st.e0_first_unstable_mode);
  if (!st.e0_modes.empty()) kv("stability.E0.C_mode1", st.e0_modes.front().c_coef);
  kv("stability.Estar.verdict", st.estar_verdict ? to_string(*st.estar_verdict) : "absent");
  kv("stability.Estar.weak_condition", st.estar_weak_condition ? 1 : 0);
  kv("stability.E0.global_condition_tau0_lt_1", st.e0_global_condition ? 1 : 0);
  kv("stability.Estar.global_condition_restricted", st.estar_global_condition ? 1 : 0);
  kv("run.completed", r.completed ? 1 : 0);
  if (!r.failure.empty()) kv("run.failure", r.failure);
  kv("run.dt", r.trajectory.dt);
  kv("run.steps", r.trajectory.steps);
  kv("run.snapshots", r.trajectory.snapshots.size());
  kv("run.max_clamp", r.trajectory.max_clamp);
  if (r.final_summary) {
    kv("final.t", r.final_t);
    point("final.min", r.final_summary->min);
    point("final.mean", r.final_summary->mean);
    point("final.max", r.final_summary->max);
    kv("final.distance_E0", r.final_distance_e0);
    if (r.final_distance_estar) kv("final.distance_Estar", *r.final_distance_estar);
  }
  for (const auto& m : r.monitor_verdicts) {
    kv("monitor." + m.name + ".ok", m.ok ? 1 : 0);
    kv("monitor." + m.name + ".violations", m.violations);
    kv("monitor." + m.name + ".worst", m.worst);
  }
  if (r.l1_decay) {
    kv("lyapunov.L1.decay_ok", r.l1_decay->ok ? 1 : 0);
    if (r.l1_decay->first_violation) kv("lyapunov.L1.first_violation", *r.l1_decay->first_violation);
  }
  if (r.l2_decay) {
    kv("lyapunov.L2.decay_ok", r.l2_decay->ok ? 1 : 0);
    if (r.l2_decay->first_violation) kv("lyapunov.L2.first_violation", *r.l2_decay->first_violation);
  }
  for (const auto& f : r.files) kv("file", f.filename().string());
}

namespace detail {

inline MonitorVerdict verdict_of(const MonitorSeries& m) {
  MonitorVerdict v{m.name, m.violations.empty(), m.violations.size(), 0.0};
  const bool lower_is_worse = m.name == "min_value";
  bool first = true;
  for (double x : m.values) {
    if (std::isnan(x)) continue;
    if (first || (lower_is_worse ? x < v.worst : x > v.worst)) v.worst = x;
    first = false;
  }
  return v;
}

inline void finish_report(RunReport& r, const Scenario& s) {
  const auto g = scenario_grid(s);
  r.lyapunov = lyapunov_trace(s.params, r.trajectory);
  for (const auto& m : r.trajectory.monitors)
    if (m.name != "L1" && m.name != "L2") r.monitor_verdicts.push_back(verdict_of(m));
  if (r.lyapunov.l1_values.size() >= 2) r.l1_decay = decay_check(r.lyapunov.l1_values, kDecayTolerance);
  if (r.lyapunov.l2_values.size() >= 2) r.l2_decay = decay_check(r.lyapunov.l2_values, kDecayTolerance);
  if (!r.trajectory.snapshots.empty()) {
    const auto& last = r.trajectory.snapshots.back();
    r.final_t = last.t;
    r.final_summary = summarize(g, last);
    r.final_distance_e0 = field_distance(last, r.equilibria.E0);
    if (r.equilibria.Estar) r.final_distance_estar = field_distance(last, *r.equilibria.Estar);
  }
}

}  // namespace detail

/// derived -> equilibria -> stability -> PDE run with monitors -> Lyapunov traces.
/// When out_dir is non-empty, writes fields.csv, summary.csv, stability.csv and report.txt.
/// A solver failure yields a report with completed == false instead of an exception.
inline RunReport run_scenario(const Scenario& s, const std::filesystem::path& out_dir = {}) {
  validate(s);
  RunReport r;
  r.scenario = s.name;
  const auto g = scenario_grid(s);
  const auto init = initial_state(s);
  r.initial = initial_maxima(init);
  r.derived = derived(s.params, r.initial);
  r.equilibria = analyze_equilibria(s.params);
  r.stability = classify(s.params, neumann_spectrum(s.length, s.l_max), r.equilibria);

  const auto monitors = s.monitors ? standard_monitors(s, r.derived, r.initial, r.equilibria)
                                   : std::vector<Monitor>{};
  try {
    r.trajectory = run(s.params, g, init, s.solver, monitors);
    r.completed = true;
  } catch (const IntegrationError& e) {
    r.failure = e.what();
    if (e.partial()) r.trajectory = *e.partial();
  } catch (const MonitorViolation& e) {
    r.failure = e.what();
  }
  detail::finish_report(r, s);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    auto open = [&](const char* name) {
      auto path = out_dir / name;
      r.files.push_back(path);
      std::ofstream os(path, std::ios::binary);
      if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
      return os;
    };
    {
      auto os = open("fields.csv");
      write_fields_csv(os, g, r.trajectory);
    }
    {
      auto os = open("summary.csv");
      write_summary_csv(os, g, r.trajectory, r.lyapunov);
    }
    {
      auto os = open("stability.csv");
      write_stability_csv(os, r.stability);
    }
    r.files.push_back(out_dir / "report.txt");
    std::ofstream os(out_dir / "report.txt", std::ios::binary);
    write_report(os, r);
  }
  return r;
}

struct SweepRow {
  double value = 0.0;
  double R0 = 0.0;
  double tau0 = 0.0;
  double gamma = 0.0;
  Verdict e0_verdict = Verdict::stable;
  bool estar_exists = false;
  std::optional<Verdict> estar_verdict;
};

/// Threshold analysis (no PDE runs) with one parameter replaced by each value in turn.
inline std::vector<SweepRow> sweep(const Scenario& base, std::string_view key,
                                   std::span<const double> values) {
  if (!is_param_key(key))
    throw ConfigError(std::string(key), "cannot sweep unknown parameter '" + std::string(key) + "'");
  const auto spectrum = neumann_spectrum(base.length, base.l_max);
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double v : values) {
    ModelParams p = base.params;
    set_param(p, key, v);
    validate(p);
    const auto eq = analyze_equilibria(p);
    const auto st = classify(p, spectrum, eq);
    rows.push_back({v, st.R0, st.tau0, eq.gamma, st.e0_verdict, eq.exists_Estar,
                    st.estar_verdict});
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& os, std::string_view key,
                            std::span<const SweepRow> rows) {
  os << key << ",R0,tau0,gamma,E0_verdict,Estar_exists,Estar_verdict\n";
  for (const auto& r : rows)
    os << format_double(r.value) << ',' << format_double(r.R0) << ',' << format_double(r.tau0)
       << ',' << format_double(r.gamma) << ',' << to_string(r.e0_verdict) << ','
       << (r.estar_exists ? 1 : 0) << ','
       << (r.estar_verdict ? to_string(*r.estar_verdict) : "absent") << '\n';
}

}  // namespace hcvrd
