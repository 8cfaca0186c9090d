#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "params.hpp"

namespace hcvrd {

/// Uniform node grid on [0, length]; n_cells nodes including both ends.
struct Grid1D {
  double length = 1.0;
  std::size_t n_cells = 101;

  double spacing() const { return length / static_cast<double>(n_cells - 1); }
  double position(std::size_t i) const {
    return i + 1 == n_cells ? length : static_cast<double>(i) * spacing();
  }
};

inline Grid1D make_grid(double length, std::size_t n_cells) {
  if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("grid: length must be > 0");
  if (n_cells < 3) throw DomainError("grid: n_cells must be >= 3");
  return {length, n_cells};
}

/// (H, I, V) over the grid nodes at time t.
struct FieldState {
  double t = 0.0;
  std::vector<double> H, I, V;

  std::size_t size() const { return H.size(); }
  PointState at(std::size_t i) const { return {H[i], I[i], V[i]}; }
  void set(std::size_t i, const PointState& s) {
    H[i] = s.H;
    I[i] = s.I;
    V[i] = s.V;
  }
  std::array<std::span<const double>, 3> components() const { return {H, I, V}; }
  bool operator==(const FieldState&) const = default;
};

inline FieldState uniform_state(const Grid1D& g, const PointState& s, double t = 0.0) {
  return {t, std::vector<double>(g.n_cells, s.H), std::vector<double>(g.n_cells, s.I),
          std::vector<double>(g.n_cells, s.V)};
}

inline void check_field(const Grid1D& g, const FieldState& s) {
  if (s.H.size() != g.n_cells || s.I.size() != g.n_cells || s.V.size() != g.n_cells)
    throw DomainError("field state: array length differs from grid size");
  for (auto c : s.components())
    for (double v : c)
      if (!std::isfinite(v)) throw DomainError("field state: non-finite value");
}

/// Second-order Neumann Laplacian with mirror ghost nodes.
inline void laplacian_neumann(std::span<const double> f, double h, std::span<double> out) {
  const std::size_t n = f.size();
  if (n < 3) throw DomainError("laplacian_neumann: need at least 3 nodes");
  if (out.size() != n) throw DomainError("laplacian_neumann: output size mismatch");
  const double inv = 1.0 / (h * h);
  out[0] = 2.0 * (f[1] - f[0]) * inv;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * inv;
  out[n - 1] = 2.0 * (f[n - 2] - f[n - 1]) * inv;
}

inline std::vector<double> laplacian_neumann(std::span<const double> f, double h) {
  std::vector<double> out(f.size());
  laplacian_neumann(f, h, out);
  return out;
}

/// Trapezoid rule; the end weights h/2 make the discrete Laplacian sum to zero.
inline double trapezoid(std::span<const double> f, double h) {
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

struct SolverConfig {
  std::optional<double> dt;  ///< nullopt selects cfl_safety * stable bound
  double t_end = 10.0;
  std::size_t snapshot_stride = 0;  ///< steps between snapshots; 0 picks ~500 snapshots
  bool positivity_clamp = false;
  double cfl_safety = 0.5;
  bool fail_on_violation = false;

  bool operator==(const SolverConfig&) const = default;
};

/// Stiffest local reaction rate estimate over the invariant box.
inline double stiff_rate(const ModelParams& p, double Vm) {
  return p.d + p.alpha + p.rho + p.mu + (1.0 - p.eta) * p.beta * Vm / p.alpha0;
}

/// Largest explicit step before the safety factor: min(h^2 / (2 Dmax), 1 / stiff_rate).
inline double stable_step_bound(const ModelParams& p, const Grid1D& g, double Vm) {
  const double h = g.spacing();
  const double dmax = std::max({p.D1, p.D2, p.D3});
  return std::min(h * h / (2.0 * dmax), 1.0 / stiff_rate(p, Vm));
}

class IntegrationError;

/// Classical RK4 on the method-of-lines system, with reusable stage buffers.
class RdStepper {
 public:
  RdStepper(const ModelParams& p, const Grid1D& g) : p_(p), grid_(g) {
    for (auto* buf : {&k1_, &k2_, &k3_, &k4_, &tmp_})
      for (auto& c : *buf) c.assign(g.n_cells, 0.0);
    lap_.assign(g.n_cells, 0.0);
  }

  /// Advances `s` by dt in place. Returns the largest clamp applied (0 without clamping).
  double advance(FieldState& s, double dt, bool clamp);

 private:
  using Fields = std::array<std::vector<double>, 3>;

  /// Returns the first node holding a non-finite stage value, if any.
  std::optional<std::size_t> rhs(const std::array<std::span<const double>, 3>& y, Fields& out) {
    const std::array<double, 3> diff{p_.D1, p_.D2, p_.D3};
    const double h = grid_.spacing();
    for (std::size_t i = 0; i < grid_.n_cells; ++i) {
      if (!std::isfinite(y[0][i]) || !std::isfinite(y[1][i]) || !std::isfinite(y[2][i])) return i;
      const auto r = reaction(p_, {y[0][i], y[1][i], y[2][i]});
      out[0][i] = r.H;
      out[1][i] = r.I;
      out[2][i] = r.V;
    }
    for (std::size_t c = 0; c < 3; ++c) {
      laplacian_neumann(y[c], h, lap_);
      for (std::size_t i = 0; i < grid_.n_cells; ++i) out[c][i] = diff[c] * lap_[i] + out[c][i];
    }
    return std::nullopt;
  }

  static std::array<std::span<const double>, 3> view(const Fields& f) {
    return {f[0], f[1], f[2]};
  }

  ModelParams p_;
  Grid1D grid_;
  Fields k1_, k2_, k3_, k4_, tmp_;
  std::vector<double> lap_;
};

/// Non-finite value after a step. Carries the node and, when raised by run(), the
/// trajectory integrated so far.
struct Trajectory;

class IntegrationError : public SolverError {
 public:
  IntegrationError(std::size_t node, double t, std::shared_ptr<const Trajectory> partial = {})
      : SolverError("integration failure: non-finite value at node " + std::to_string(node) +
                    " near t=" + std::to_string(t)),
        node_(node),
        t_(t),
        partial_(std::move(partial)) {}
  std::size_t node() const noexcept { return node_; }
  double time() const noexcept { return t_; }
  const std::shared_ptr<const Trajectory>& partial() const noexcept { return partial_; }

 private:
  std::size_t node_;
  double t_;
  std::shared_ptr<const Trajectory> partial_;
};

inline double RdStepper::advance(FieldState& s, double dt, bool clamp) {
  const std::size_t n = grid_.n_cells;
  auto y = s.components();
  if (auto bad = rhs(y, k1_)) throw IntegrationError(*bad, s.t + dt);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < n; ++i) tmp_[c][i] = y[c][i] + 0.5 * dt * k1_[c][i];
  if (auto bad = rhs(view(tmp_), k2_)) throw IntegrationError(*bad, s.t + dt);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < n; ++i) tmp_[c][i] = y[c][i] + 0.5 * dt * k2_[c][i];
  if (auto bad = rhs(view(tmp_), k3_)) throw IntegrationError(*bad, s.t + dt);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < n; ++i) tmp_[c][i] = y[c][i] + dt * k3_[c][i];
  if (auto bad = rhs(view(tmp_), k4_)) throw IntegrationError(*bad, s.t + dt);

  std::array<std::vector<double>*, 3> dst{&s.H, &s.I, &s.V};
  double clamped = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    auto& out = *dst[c];
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = out[i] + dt / 6.0 * (k1_[c][i] + 2.0 * k2_[c][i] + 2.0 * k3_[c][i] + k4_[c][i]);
      if (!std::isfinite(out[i])) throw IntegrationError(i, s.t + dt);
      if (clamp && out[i] < 0.0) {
        clamped = std::max(clamped, -out[i]);
        out[i] = 0.0;
      }
    }
  }
  s.t += dt;
  return clamped;
}

/// One RK4 step of the semi-discrete system (allocates its own workspace).
inline FieldState step(const ModelParams& p, const Grid1D& g, FieldState s, double dt,
                       bool clamp = false) {
  RdStepper stepper(p, g);
  stepper.advance(s, dt, clamp);
  return s;
}

struct MonitorSample {
  double value = 0.0;
  bool ok = true;
};

/// Named scalar diagnostic evaluated at every snapshot.
struct Monitor {
  std::string name;
  std::function<MonitorSample(const FieldState&)> evaluate;
};

struct MonitorSeries {
  std::string name;
  std::vector<double> values;
  std::vector<std::size_t> violations;  ///< snapshot indices where ok == false
};

struct Trajectory {
  std::vector<FieldState> snapshots;
  std::vector<MonitorSeries> monitors;
  double dt = 0.0;
  std::size_t steps = 0;
  double max_clamp = 0.0;

  const MonitorSeries* find(std::string_view name) const {
    for (const auto& m : monitors)
      if (m.name == name) return &m;
    return nullptr;
  }
  bool any_violation() const {
    return std::any_of(monitors.begin(), monitors.end(),
                       [](const MonitorSeries& m) { return !m.violations.empty(); });
  }
};

class MonitorViolation : public SolverError {
 public:
  MonitorViolation(const std::string& monitor, double t)
      : SolverError("monitor '" + monitor + "' violated at t=" + std::to_string(t)),
        monitor_(monitor) {}
  const std::string& monitor() const noexcept { return monitor_; }

 private:
  std::string monitor_;
};

inline double max_value(std::span<const double> f) { return *std::max_element(f.begin(), f.end()); }
inline double min_value(std::span<const double> f) { return *std::min_element(f.begin(), f.end()); }

inline InitialMaxima initial_maxima(const FieldState& s) {
  InitialMaxima m;
  for (std::size_t i = 0; i < s.size(); ++i) m.s0_max = std::max(m.s0_max, s.H[i] + s.I[i]);
  m.v0_max = max_value(s.V);
  return m;
}

/// Integrates to cfg.t_end. Snapshots are taken at t = 0, every stride and at t_end.
inline Trajectory run(const ModelParams& p, const Grid1D& grid, const FieldState& init,
                      const SolverConfig& cfg, std::span<const Monitor> monitors = {}) {
  validate(p);
  check_field(grid, init);
  if (!(cfg.t_end > 0.0)) throw ConfigError("t_end", "t_end must be > 0");
  if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0))
    throw ConfigError("cfl_safety", "cfl_safety must lie in (0, 1]");
  const auto dq = derived(p, initial_maxima(init));
  const double limit = cfg.cfl_safety * stable_step_bound(p, grid, dq.Vm);
  double dt_target = limit;
  if (cfg.dt) {
    if (!(*cfg.dt > 0.0)) throw ConfigError("dt", "dt must be > 0");
    if (*cfg.dt > limit * (1.0 + 1e-12))
      throw ConfigError("dt", "dt exceeds the explicit stability limit " + std::to_string(limit));
    dt_target = *cfg.dt;
  }
  const auto n_steps = static_cast<std::size_t>(std::ceil(cfg.t_end / dt_target - 1e-9));
  const double dt = cfg.t_end / static_cast<double>(std::max<std::size_t>(n_steps, 1));
  const std::size_t stride =
      cfg.snapshot_stride > 0 ? cfg.snapshot_stride : std::max<std::size_t>(1, n_steps / 500);

  auto traj = std::make_shared<Trajectory>();
  traj->dt = dt;
  for (const auto& m : monitors) traj->monitors.push_back({m.name, {}, {}});

  auto record = [&](const FieldState& s) {
    const std::size_t idx = traj->snapshots.size();
    traj->snapshots.push_back(s);
    for (std::size_t j = 0; j < monitors.size(); ++j) {
      const auto sample = monitors[j].evaluate(s);
      traj->monitors[j].values.push_back(sample.value);
      if (!sample.ok) {
        traj->monitors[j].violations.push_back(idx);
        if (cfg.fail_on_violation) throw MonitorViolation(monitors[j].name, s.t);
      }
    }
  };

  FieldState s = init;
  RdStepper stepper(p, grid);
  record(s);
  for (std::size_t n = 1; n <= n_steps; ++n) {
    try {
      traj->max_clamp = std::max(traj->max_clamp, stepper.advance(s, dt, cfg.positivity_clamp));
    } catch (const IntegrationError& e) {
      throw IntegrationError(e.node(), e.time(), traj);
    }
    s.t = n == n_steps ? cfg.t_end : static_cast<double>(n) * dt;
    traj->steps = n;
    if (n % stride == 0 || n == n_steps) record(s);
  }
  return std::move(*traj);
}

struct TimedPoint {
  double t = 0.0;
  PointState s;
};

/// One classical RK4 step for dS/dt = reaction(S); same arithmetic order as RdStepper.
inline PointState rk4_point_step(const ModelParams& p, const PointState& y, double dt) {
  auto axpy = [](const PointState& a, double c, const PointState& b) {
    return PointState{a.H + c * b.H, a.I + c * b.I, a.V + c * b.V};
  };
  const auto k1 = reaction(p, y);
  const auto k2 = reaction(p, axpy(y, 0.5 * dt, k1));
  const auto k3 = reaction(p, axpy(y, 0.5 * dt, k2));
  const auto k4 = reaction(p, axpy(y, dt, k3));
  auto comb = [dt](double y0, double a, double b, double c, double d) {
    return y0 + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
  };
  return {comb(y.H, k1.H, k2.H, k3.H, k4.H), comb(y.I, k1.I, k2.I, k3.I, k4.I),
          comb(y.V, k1.V, k2.V, k3.V, k4.V)};
}

/// Fixed-step RK4 for the spatially homogeneous system. Records every `stride`-th step
/// plus the endpoint; dt is shrunk so t_end is hit exactly.
inline std::vector<TimedPoint> ode_reference(const ModelParams& p, const PointState& s0,
                                             double t_end, double dt, std::size_t stride = 1) {
  if (s0.H < 0.0 || s0.I < 0.0 || s0.V < 0.0)
    throw DomainError("ode_reference: initial state must be nonnegative");
  if (!(t_end > 0.0) || !(dt > 0.0)) throw DomainError("ode_reference: t_end and dt must be > 0");
  stride = std::max<std::size_t>(stride, 1);
  const auto n_steps = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9)));
  const double h = t_end / static_cast<double>(n_steps);
  std::vector<TimedPoint> out;
  out.reserve(n_steps / stride + 2);
  PointState y = s0;
  out.push_back({0.0, y});
  for (std::size_t n = 1; n <= n_steps; ++n) {
    y = rk4_point_step(p, y, h);
    if (!std::isfinite(y.H) || !std::isfinite(y.I) || !std::isfinite(y.V))
      throw SolverError("ode_reference: non-finite state at step " + std::to_string(n));
    if (n % stride == 0 || n == n_steps)
      out.push_back({n == n_steps ? t_end : static_cast<double>(n) * h, y});
  }
  return out;
}

struct ComparisonBounds {
  double Sbar = 0.0;  ///< envelope for max_x (H + I)
  double Vbar = 0.0;  ///< envelope for max_x V
};

inline ComparisonBounds comparison_bounds(const ModelParams& p, const DerivedQuantities& dq,
                                          double s0_max, double v0_max, double t) {
  if (!(t >= 0.0)) throw DomainError("comparison_bounds: t must be >= 0");
  const double es = std::exp(-dq.delta2 * t);
  const double ev = std::exp(-p.mu * t);
  return {p.lambda / dq.delta2 * (1.0 - es) + s0_max * es,
          (1.0 - p.epsilon) * p.k * dq.Hm / p.mu * (1.0 - ev) + v0_max * ev};
}

/// min over nodes of min(H, I, V); fails below -rel_tol * scale.
inline Monitor positivity_monitor(double scale, double rel_tol = 1e-9) {
  return {"min_value", [=](const FieldState& s) {
            const double m = std::min({min_value(s.H), min_value(s.I), min_value(s.V)});
            return MonitorSample{m, m >= -rel_tol * scale};
          }};
}

/// max over nodes of max((H+I)/Hm, V/Vm); fails above 1 + rel_tol.
inline Monitor bounds_monitor(const DerivedQuantities& dq, double rel_tol = 1e-6) {
  return {"bound_ratio", [=](const FieldState& s) {
            double r = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i)
              r = std::max({r, (s.H[i] + s.I[i]) / dq.Hm, s.V[i] / dq.Vm});
            return MonitorSample{r, r <= 1.0 + rel_tol};
          }};
}

/// max(max_x(H+I) - Sbar(t), max_x V - Vbar(t)); fails above abs_tol.
inline Monitor comparison_monitor(const ModelParams& p, const DerivedQuantities& dq,
                                  const InitialMaxima& init, double abs_tol = 1e-6) {
  return {"comparison_excess", [=](const FieldState& s) {
            const auto b = comparison_bounds(p, dq, init.s0_max, init.v0_max, s.t);
            double smax = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) smax = std::max(smax, s.H[i] + s.I[i]);
            const double excess = std::max(smax - b.Sbar, max_value(s.V) - b.Vbar);
            return MonitorSample{excess, excess <= abs_tol};
          }};
}

}  // namespace hcvrd
