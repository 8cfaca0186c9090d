#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "params.hpp"

namespace hcvrd {

/// Hattaf-Yousfi incidence (1-eta) beta H V / (alpha0 + alpha1 H + alpha2 V + alpha3 H V).
///
/// Holling I/II, Beddington-DeAngelis, Crowley-Martin and saturated forms are the
/// usual parameter reductions of this one expression.
inline double incidence(const ModelParams& p, double H, double V) {
  if (!std::isfinite(H) || !std::isfinite(V))
    throw DomainError("incidence: non-finite density");
  const double den = p.alpha0 + p.alpha1 * H + p.alpha2 * V + p.alpha3 * H * V;
  return (1.0 - p.eta) * p.beta * H * V / den;
}

/// Reaction part of the system: (F1, F2, F3) evaluated at one point.
inline PointState reaction(const ModelParams& p, const PointState& s) {
  const double inc = incidence(p, s.H, s.V);
  return {p.lambda - p.d * s.H - inc + p.rho * s.I,
          inc - (p.alpha + p.rho) * s.I,
          (1.0 - p.epsilon) * p.k * s.I - p.mu * s.V - p.u * inc};
}

inline double carrying_level(const ModelParams& p) { return p.lambda / p.d; }

/// Net virion yield per infected cell: (1-epsilon) k - u (alpha + rho).
inline double net_yield(const ModelParams& p) {
  return (1.0 - p.epsilon) * p.k - p.u * (p.alpha + p.rho);
}

/// Effective per-virion infection rate at the uninfected state, (1-eta) beta Lambda / (alpha0 + alpha1 Lambda).
inline double uninfected_force(const ModelParams& p) {
  const double L = carrying_level(p);
  return (1.0 - p.eta) * p.beta * L / (p.alpha0 + p.alpha1 * L);
}

inline double basic_reproduction_number(const ModelParams& p) {
  const double L = carrying_level(p);
  const double num = (1.0 - p.eta) * (1.0 - p.epsilon) * p.k * p.beta * L;
  const double den = (p.alpha + p.rho) *
                     (p.mu * (p.alpha0 + p.alpha1 * L) + p.u * (1.0 - p.eta) * p.beta * L);
  return num / den;
}

/// Sufficient threshold for global stability of the uninfected state; always >= R0.
inline double global_threshold(const ModelParams& p) {
  const double L = carrying_level(p);
  return (1.0 - p.epsilon) * p.k * (1.0 - p.eta) * p.beta * L /
         (p.mu * p.alpha0 * (p.alpha + p.rho));
}

/// Parameter family on which the infected-state Lyapunov functional is built:
/// no absorption, alpha0 = 1 and alpha3 = alpha1 alpha2 (Crowley-Martin form).
inline bool restriction_holds(const ModelParams& p) {
  const double prod = p.alpha1 * p.alpha2;
  return p.u == 0 && p.alpha0 == 1.0 &&
         std::abs(p.alpha3 - prod) <= 1e-12 * std::max(p.alpha3, prod);
}

/// Maxima of the initial data entering the a-priori bounds.
struct InitialMaxima {
  double s0_max = 0.0;  ///< max over the domain of H0 + I0
  double v0_max = 0.0;  ///< max over the domain of V0
};

struct DerivedQuantities {
  double Lambda = 0.0;
  double gamma = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double Hm = 0.0;  ///< bound on H, I (and H + I)
  double Vm = 0.0;  ///< bound on V
  double R0 = 0.0;
  double tau0 = 0.0;
};

inline DerivedQuantities derived(const ModelParams& p, const InitialMaxima& init) {
  if (!(init.s0_max >= 0.0) || !(init.v0_max >= 0.0))
    throw DomainError("derived: initial maxima must be nonnegative");
  DerivedQuantities q;
  q.Lambda = carrying_level(p);
  q.gamma = net_yield(p);
  q.delta1 = std::max(p.D1, p.D2);
  q.delta2 = std::min(p.d, p.alpha);
  q.Hm = std::max(p.lambda / q.delta2, init.s0_max);
  q.Vm = std::max((1.0 - p.epsilon) * p.k * q.Hm / p.mu, init.v0_max);
  q.R0 = basic_reproduction_number(p);
  q.tau0 = global_threshold(p);
  return q;
}

/// K[i][j]: Lipschitz constant of F_{i+1} with respect to variable j (0=H, 1=I, 2=V)
/// over the box [0,Hm]^2 x [0,Vm].
using LipschitzMatrix = std::array<std::array<double, 3>, 3>;

inline LipschitzMatrix lipschitz_constants(const ModelParams& p, double Hm, double Vm) {
  if (p.alpha1 <= 0.0 || p.alpha2 <= 0.0)
    throw NotApplicableError("lipschitz_constants: requires alpha1 > 0 and alpha2 > 0");
  const double b = (1.0 - p.eta) * p.beta;
  const double wrt_h = b * (1.0 / p.alpha2 + Vm / p.alpha0);
  const double wrt_v = b * (1.0 / p.alpha1 + Hm / p.alpha0);
  LipschitzMatrix K{};
  K[0] = {p.d + wrt_h, p.rho, wrt_v};
  K[1] = {wrt_h, p.alpha + p.rho, wrt_v};
  K[2] = {p.u * wrt_h, p.k * (1.0 - p.epsilon), p.mu + p.u * wrt_v};
  return K;
}

/// Membership in the invariant box 0 <= H, I <= Hm, 0 <= V <= Vm, with slack `tol`.
inline bool in_sigma(const PointState& s, const DerivedQuantities& dq, double tol) {
  return s.H >= -tol && s.I >= -tol && s.V >= -tol && s.H <= dq.Hm + tol &&
         s.I <= dq.Hm + tol && s.V <= dq.Vm + tol;
}

inline double default_sigma_tolerance(const DerivedQuantities& dq) {
  return 1e-9 * std::max(dq.Hm, dq.Vm);
}

inline bool in_sigma(const PointState& s, const DerivedQuantities& dq) {
  return in_sigma(s, dq, default_sigma_tolerance(dq));
}

}  // namespace hcvrd
