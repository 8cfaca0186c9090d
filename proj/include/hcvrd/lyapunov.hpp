#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "params.hpp"
#include "solver.hpp"

namespace hcvrd {

/// ((1-epsilon) k / (alpha+rho)) I + V. Nonincreasing in time whenever tau0 <= 1.
inline double g1(const ModelParams& p, const PointState& s) {
  return (1.0 - p.epsilon) * p.k / (p.alpha + p.rho) * s.I + s.V;
}

inline double l1(const ModelParams& p, const Grid1D& grid, const FieldState& s) {
  std::vector<double> g(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) g[i] = g1(p, s.at(i));
  return trapezoid(g, grid.spacing());
}

namespace detail {

inline void require_restricted(const ModelParams& p, const char* what) {
  if (!restriction_holds(p))
    throw NotApplicableError(std::string(what) +
                             ": requires u = 0, alpha0 = 1 and alpha3 = alpha1 * alpha2");
}

inline void require_positive(const PointState& s, const char* what) {
  if (!(s.H > 0.0 && s.I > 0.0 && s.V > 0.0))
    throw DomainError(std::string(what) + ": state must be strictly positive");
}

/// Coefficients c_H, c_V of the two logarithmic integrals in G2.
struct G2Coefficients {
  double c_h;
  double c_v;
  double v_weight;
};

inline G2Coefficients g2_coefficients(const ModelParams& p, const PointState& e) {
  const double b = (1.0 - p.eta) * p.beta;
  const double ar = p.alpha + p.rho;
  return {ar * e.I * (1.0 + p.alpha2 * e.V) / (b * e.V),
          ar * e.I * (1.0 + p.alpha1 * e.H) / (b * e.H),
          ar / ((1.0 - p.epsilon) * p.k) * (p.alpha0 + p.alpha2 * e.V)};
}

}  // namespace detail

/// Volterra-type functional centred at the infected equilibrium `e`.
///
/// Defined on the restricted family only. The two integrals of
/// (1 + a tau) / tau are evaluated in closed form as ln(x/x*) + a (x - x*).
inline double g2(const ModelParams& p, const PointState& e, const PointState& s) {
  detail::require_restricted(p, "g2");
  detail::require_positive(s, "g2");
  detail::require_positive(e, "g2");
  const auto c = detail::g2_coefficients(p, e);
  const double h_block =
      s.H - e.H - c.c_h * (std::log(s.H / e.H) + p.alpha1 * (s.H - e.H));
  const double i_block = s.I - e.I - e.I * std::log(s.I / e.I);
  const double v_block =
      c.v_weight * (s.V - e.V - c.c_v * (std::log(s.V / e.V) + p.alpha2 * (s.V - e.V)));
  return h_block + i_block + v_block;
}

/// Exact time derivative of g2 along the homogeneous flow (gradient dotted with reaction()).
inline double g2_rate(const ModelParams& p, const PointState& e, const PointState& s) {
  detail::require_restricted(p, "g2_rate");
  detail::require_positive(s, "g2_rate");
  const auto c = detail::g2_coefficients(p, e);
  const auto f = reaction(p, s);
  const double dh = 1.0 - c.c_h * (1.0 / s.H + p.alpha1);
  const double di = 1.0 - e.I / s.I;
  const double dv = c.v_weight * (1.0 - c.c_v * (1.0 / s.V + p.alpha2));
  return dh * f.H + di * f.I + dv * f.V;
}

/// The four ratios whose arithmetic mean bounds the sign of the G2 derivative.
inline std::array<double, 4> amgm_terms(const ModelParams& p, const PointState& e,
                                        const PointState& s) {
  detail::require_restricted(p, "amgm_terms");
  detail::require_positive(s, "amgm_terms");
  detail::require_positive(e, "amgm_terms");
  const double fh = (1.0 + p.alpha1 * s.H), fhs = (1.0 + p.alpha1 * e.H);
  const double fv = (1.0 + p.alpha2 * s.V), fvs = (1.0 + p.alpha2 * e.V);
  return {e.H * fh / (s.H * fhs), s.H * e.I * s.V * fhs * fvs / (e.H * s.I * e.V * fh * fv),
          s.I * e.V / (e.I * s.V), fv / fvs};
}

/// Product of the four ratios; identically 1.
inline double amgm_bracket_product(const ModelParams& p, const PointState& e,
                                   const PointState& s) {
  const auto t = amgm_terms(p, e, s);
  return t[0] * t[1] * t[2] * t[3];
}

/// 4 minus the sum of the four ratios; <= 0 by AM-GM since their product is 1.
inline double amgm_bracket(const ModelParams& p, const PointState& e, const PointState& s) {
  const auto t = amgm_terms(p, e, s);
  return 4.0 - (t[0] + t[1] + t[2] + t[3]);
}

/// Fully expanded closed form of dG2/dt as it is usually written for this model.
///
/// Kept as a diagnostic only: it evaluates to -(alpha+rho) I* at E*, where the
/// true derivative vanishes. Use g2_rate() or finite differences of g2 instead.
inline double expanded_g2_rate(const ModelParams& p, const PointState& e, const PointState& s) {
  detail::require_restricted(p, "expanded_g2_rate");
  detail::require_positive(s, "expanded_g2_rate");
  const double ar = p.alpha + p.rho;
  const double dh = s.H - e.H, dv = s.V - e.V;
  return -p.d * dh * dh / (s.H * (1.0 + p.alpha1 * e.H)) -
         p.alpha2 * ar * e.I * dv * dv /
             (e.V * (1.0 + p.alpha2 * e.V) * (1.0 + p.alpha2 * s.V)) -
         p.alpha * e.I * (p.rho / p.alpha + s.I / e.I) + ar * e.I * amgm_bracket(p, e, s);
}

inline double l2(const ModelParams& p, const Grid1D& grid, const PointState& e,
                 const FieldState& s) {
  std::vector<double> g(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) g[i] = g2(p, e, s.at(i));
  return trapezoid(g, grid.spacing());
}

struct DecayCheck {
  bool ok = true;
  std::optional<std::size_t> first_violation;  ///< index i with v[i] - v[i-1] > tol * scale
};

/// Successive differences must not exceed tol * max|v|. Pairs involving NaN
/// (inactive monitor samples) are skipped.
inline DecayCheck decay_check(std::span<const double> values, double tol) {
  if (values.size() < 2) throw DomainError("decay_check: need at least 2 samples");
  double scale = 0.0;
  for (double v : values)
    if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (std::isnan(values[i]) || std::isnan(values[i - 1])) continue;
    if (values[i] - values[i - 1] > tol * scale) return {false, i};
  }
  return {};
}

inline Monitor l1_monitor(const ModelParams& p, const Grid1D& grid) {
  return {"L1", [=](const FieldState& s) { return MonitorSample{l1(p, grid, s), true}; }};
}

/// L2 along the run; NaN until every component exceeds 1e-12 * scale.
inline Monitor l2_monitor(const ModelParams& p, const Grid1D& grid, const PointState& e,
                          double scale) {
  return {"L2", [=](const FieldState& s) {
            const double m = std::min({min_value(s.H), min_value(s.I), min_value(s.V)});
            if (!(m > 1e-12 * scale))
              return MonitorSample{std::numeric_limits<double>::quiet_NaN(), true};
            return MonitorSample{l2(p, grid, e, s), true};
          }};
}

struct LyapunovTrace {
  std::vector<double> times;
  std::vector<double> l1_values;
  std::vector<double> l2_values;  ///< empty unless restriction_ok and E* exists
  std::vector<double> dl1dt;      ///< backward differences; NaN at the first sample
  std::vector<double> dl2dt;
  bool restriction_ok = false;
};

inline std::vector<double> backward_differences(std::span<const double> t,
                                                std::span<const double> v) {
  std::vector<double> d(v.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i < v.size(); ++i) d[i] = (v[i] - v[i - 1]) / (t[i] - t[i - 1]);
  return d;
}

inline LyapunovTrace lyapunov_trace(const ModelParams& p, const Trajectory& traj) {
  LyapunovTrace tr;
  tr.restriction_ok = restriction_holds(p);
  for (const auto& s : traj.snapshots) tr.times.push_back(s.t);
  if (const auto* m = traj.find("L1")) {
    tr.l1_values = m->values;
    tr.dl1dt = backward_differences(tr.times, tr.l1_values);
  }
  if (const auto* m = traj.find("L2"); m && tr.restriction_ok) {
    tr.l2_values = m->values;
    tr.dl2dt = backward_differences(tr.times, tr.l2_values);
  }
  return tr;
}

}  // namespace hcvrd
