#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "errors.hpp"
#include "model.hpp"
#include "params.hpp"

namespace hcvrd {

inline PointState uninfected_equilibrium(const ModelParams& p) {
  return {carrying_level(p), 0.0, 0.0};
}

/// Scalar function whose root in (0, Lambda) is H* of the infected equilibrium.
///
/// psi(0) = -(alpha+rho) mu and sign psi(Lambda) = sign(R0 - 1); strictly increasing
/// when net_yield > 0.
inline double psi(const ModelParams& p, double x) {
  const double L = carrying_level(p);
  if (!(x >= 0.0 && x <= L))
    throw DomainError("psi: argument outside [0, lambda/d]");
  const double g = net_yield(p);
  const double I = (p.lambda - p.d * x) / p.alpha;
  const double V = g * I / p.mu;
  const double l = p.beta * x / (p.alpha0 + p.alpha1 * x + p.alpha2 * V + p.alpha3 * x * V);
  return (1.0 - p.eta) * g * l - (p.alpha + p.rho) * p.mu;
}

/// I* and V* reconstructed from H* by the two linear equilibrium identities.
inline PointState equilibrium_from_h(const ModelParams& p, double h) {
  const double I = (p.lambda - p.d * h) / p.alpha;
  return {h, I, net_yield(p) * I / p.mu};
}

/// Residual scale max(lambda, (alpha+rho) I, mu V).
inline double residual_scale(const ModelParams& p, const PointState& s) {
  return std::max({p.lambda, (p.alpha + p.rho) * s.I, p.mu * s.V});
}

enum class AbsenceReason { none, r0_not_above_one, gamma_nonpositive };

inline const char* to_string(AbsenceReason r) {
  switch (r) {
    case AbsenceReason::none: return "none";
    case AbsenceReason::r0_not_above_one: return "r0_not_above_one";
    case AbsenceReason::gamma_nonpositive: return "gamma_nonpositive";
  }
  return "?";
}

struct RootSearch {
  double root = 0.0;
  double residual = 0.0;  ///< |psi(root)|
  int iterations = 0;
};

/// Bisection for psi on [0, Lambda] down to a bracket of `rel_width * Lambda`.
/// Requires psi(0) < 0 < psi(Lambda).
inline RootSearch bisect_psi(const ModelParams& p, double rel_width = 1e-14, int max_iter = 200) {
  const double L = carrying_level(p);
  double lo = 0.0, hi = L;
  if (!(psi(p, lo) < 0.0 && psi(p, hi) > 0.0))
    throw DomainError("bisect_psi: no sign change on [0, lambda/d]");
  const double width = rel_width * L;
  int it = 0;
  for (; hi - lo > width; ++it) {
    if (it >= max_iter)
      throw SolverError("bisect_psi: no convergence after " + std::to_string(max_iter) +
                        " iterations");
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket is down to adjacent doubles
    (psi(p, mid) < 0.0 ? lo : hi) = mid;
  }
  RootSearch r;
  const double flo = std::abs(psi(p, lo)), fhi = std::abs(psi(p, hi));
  r.root = flo <= fhi ? lo : hi;
  r.residual = std::min(flo, fhi);
  r.iterations = it;
  return r;
}

/// Unique positive spatially homogeneous equilibrium, present iff R0 > 1 and gamma > 0.
/// `rel_tol` is the bisection bracket width relative to Lambda.
inline std::optional<PointState> infected_equilibrium(const ModelParams& p,
                                                      double rel_tol = 1e-14) {
  if (basic_reproduction_number(p) <= 1.0 || net_yield(p) <= 0.0) return std::nullopt;
  const auto search = bisect_psi(p, rel_tol);
  const PointState e = equilibrium_from_h(p, search.root);
  const double res = sup_norm(reaction(p, e));
  if (!(res <= 1e-9 * residual_scale(p, e)))
    throw SolverError("infected_equilibrium: reaction residual " + std::to_string(res) +
                      " exceeds tolerance");
  return e;
}

struct EquilibriumReport {
  PointState E0;
  std::optional<PointState> Estar;
  bool exists_Estar = false;
  AbsenceReason reason = AbsenceReason::none;
  double psi_root_residual = 0.0;
  double reaction_residual = 0.0;
  double residual_scale = 0.0;
  double gamma = 0.0;
};

inline EquilibriumReport analyze_equilibria(const ModelParams& p) {
  EquilibriumReport r;
  r.E0 = uninfected_equilibrium(p);
  r.gamma = net_yield(p);
  if (basic_reproduction_number(p) <= 1.0) {
    r.reason = AbsenceReason::r0_not_above_one;
    return r;
  }
  if (r.gamma <= 0.0) {
    r.reason = AbsenceReason::gamma_nonpositive;
    return r;
  }
  r.Estar = infected_equilibrium(p);
  r.exists_Estar = true;
  r.psi_root_residual = std::abs(psi(p, r.Estar->H));
  r.reaction_residual = sup_norm(reaction(p, *r.Estar));
  r.residual_scale = residual_scale(p, *r.Estar);
  return r;
}

}  // namespace hcvrd
