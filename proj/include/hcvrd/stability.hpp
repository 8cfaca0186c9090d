#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <ostream>
#include <vector>

#include "equilibria.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "model.hpp"
#include "params.hpp"

namespace hcvrd {

/// Eigenvalues of -Laplacian on (0, L) with homogeneous Neumann conditions.
struct ModeSpectrum {
  double domain_length = 1.0;
  std::vector<double> eigenvalues;  ///< ((l-1) pi / L)^2, l = 1..l_max
};

inline ModeSpectrum neumann_spectrum(double length, std::size_t l_max) {
  if (!(length > 0.0)) throw DomainError("neumann_spectrum: length must be > 0");
  if (l_max < 1) throw DomainError("neumann_spectrum: l_max must be >= 1");
  ModeSpectrum s;
  s.domain_length = length;
  s.eigenvalues.reserve(l_max);
  for (std::size_t l = 0; l < l_max; ++l) {
    const double w = static_cast<double>(l) * std::numbers::pi / length;
    s.eigenvalues.push_back(w * w);
  }
  return s;
}

enum class Verdict { stable, unstable, marginal };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    case Verdict::marginal: return "marginal";
  }
  return "?";
}

/// Band |C| < kMarginalBand * scale is treated as sitting on the threshold.
inline constexpr double kMarginalBand = 1e-12;

/// Linearization at E0 restricted to one Laplacian mode: a decoupled root
/// -(mu_l D1 + d) and a quadratic x^2 + B x + C.
struct E0Mode {
  double mu_l = 0.0;
  double lambda0_root = 0.0;
  double b_coef = 0.0;
  double c_coef = 0.0;
  double c_scale = 0.0;  ///< magnitude of the two competing terms in C
  Verdict verdict = Verdict::stable;
};

inline E0Mode e0_characteristic(const ModelParams& p, double mu_l) {
  const double L = carrying_level(p);
  const double den = p.alpha0 + p.alpha1 * L;
  const double force = (1.0 - p.eta) * p.beta * L / den;
  const double v_loss = mu_l * p.D3 + p.mu + p.u * force;
  const double i_loss = mu_l * p.D2 + p.alpha + p.rho;
  E0Mode m;
  m.mu_l = mu_l;
  m.lambda0_root = -(mu_l * p.D1 + p.d);
  m.b_coef = v_loss + i_loss;
  const double threshold = (p.alpha + p.rho) *
                           (p.mu * den + p.u * (1.0 - p.eta) * p.beta * L) / den;
  m.c_coef = mu_l * p.D2 * v_loss + (p.alpha + p.rho) * mu_l * p.D3 +
             threshold * (1.0 - basic_reproduction_number(p));
  m.c_scale = i_loss * v_loss + (1.0 - p.epsilon) * p.k * force;
  if (std::abs(m.c_coef) < kMarginalBand * m.c_scale)
    m.verdict = Verdict::marginal;
  else
    m.verdict = m.c_coef > 0.0 ? Verdict::stable : Verdict::unstable;
  return m;
}

/// True iff every root of x^3 + a2 x^2 + a1 x + a0 has negative real part.
inline bool routh_hurwitz_cubic(double a2, double a1, double a0) {
  return a2 > 0.0 && a1 > 0.0 && a0 > 0.0 && a1 * a2 > a0;
}

/// Cubic x^3 + a2 x^2 + a1 x + a0 of the linearization at E* for one mode.
struct EStarMode {
  double mu_l = 0.0;
  double a_lin = 0.0;  ///< d(incidence)/dH at E*
  double b_lin = 0.0;  ///< d(incidence)/dV at E*
  double a2 = 0.0;
  double a1 = 0.0;
  double a0 = 0.0;
  bool routh_ok = false;
  bool weak_condition = false;  ///< a1 > 0 and a1 a2 > a0 only
  /// Shortened a1, a0 that keep only the x(y+z)+yz-kB and xyz-xkB parts. They omit the
  /// rho A and A B cross terms of the determinant; reported for comparison, never classified.
  double a1_short = 0.0;
  double a0_short = 0.0;
  bool routh_ok_short = false;
};

inline EStarMode estar_characteristic(const ModelParams& p, const PointState& e, double mu_l) {
  const double den = p.alpha0 + p.alpha1 * e.H + p.alpha2 * e.V + p.alpha3 * e.H * e.V;
  EStarMode m;
  m.mu_l = mu_l;
  m.a_lin = (1.0 - p.eta) * (p.alpha0 + p.alpha2 * e.V) * p.beta * e.V / (den * den);
  m.b_lin = (1.0 - p.eta) * (p.alpha0 + p.alpha1 * e.H) * p.beta * e.H / (den * den);
  const double x = mu_l * p.D1 + p.d + m.a_lin;
  const double y = mu_l * p.D2 + p.alpha + p.rho;
  const double z = mu_l * p.D3 + p.mu + p.u * m.b_lin;
  const double kb = (1.0 - p.epsilon) * p.k * m.b_lin;
  const double ab = m.a_lin * m.b_lin;
  m.a2 = x + y + z;
  m.a1 = x * (y + z) + y * z - kb - p.rho * m.a_lin - p.u * ab;
  m.a0 = x * y * z - x * kb - p.rho * m.a_lin * (mu_l * p.D3 + p.mu) +
         ab * ((1.0 - p.epsilon) * p.k - p.u * y);
  m.routh_ok = routh_hurwitz_cubic(m.a2, m.a1, m.a0);
  m.a1_short = x * (y + z) + y * z - kb;
  m.a0_short = x * y * z - x * kb;
  m.routh_ok_short = routh_hurwitz_cubic(m.a2, m.a1_short, m.a0_short);
  m.weak_condition = m.a1 > 0.0 && m.a1 * m.a2 > m.a0;
  return m;
}

struct StabilityReport {
  std::vector<E0Mode> e0_modes;
  std::vector<EStarMode> estar_modes;
  Verdict e0_verdict = Verdict::stable;
  std::size_t e0_first_unstable_mode = 0;  ///< 1-based; 0 if none
  std::optional<Verdict> estar_verdict;     ///< absent when E* does not exist
  bool estar_weak_condition = false;        ///< two-condition criterion on every mode
  double R0 = 0.0;
  double tau0 = 0.0;
  bool e0_global_condition = false;     ///< tau0 < 1
  bool estar_global_condition = false;  ///< R0 > 1 with u = 0, alpha0 = 1, alpha3 = alpha1 alpha2
};

inline StabilityReport classify(const ModelParams& p, const ModeSpectrum& spectrum,
                                const EquilibriumReport& eq) {
  if (spectrum.eigenvalues.empty()) throw DomainError("classify: empty spectrum");
  StabilityReport r;
  r.R0 = basic_reproduction_number(p);
  r.tau0 = global_threshold(p);
  r.e0_global_condition = r.tau0 < 1.0;
  r.estar_global_condition = r.R0 > 1.0 && restriction_holds(p);

  bool any_marginal = false;
  for (std::size_t l = 0; l < spectrum.eigenvalues.size(); ++l) {
    const auto m = e0_characteristic(p, spectrum.eigenvalues[l]);
    if (m.verdict == Verdict::unstable && r.e0_first_unstable_mode == 0)
      r.e0_first_unstable_mode = l + 1;
    any_marginal = any_marginal || m.verdict == Verdict::marginal;
    r.e0_modes.push_back(m);
  }
  r.e0_verdict = r.e0_first_unstable_mode != 0 ? Verdict::unstable
                 : any_marginal                ? Verdict::marginal
                                               : Verdict::stable;

  if (eq.Estar) {
    bool all_ok = true, all_weak = true;
    for (double mu_l : spectrum.eigenvalues) {
      auto m = estar_characteristic(p, *eq.Estar, mu_l);
      all_ok = all_ok && m.routh_ok;
      all_weak = all_weak && m.weak_condition;
      r.estar_modes.push_back(m);
    }
    r.estar_verdict = all_ok ? Verdict::stable : Verdict::unstable;
    r.estar_weak_condition = all_weak;
  }
  return r;
}

/// One row per (equilibrium, mode). Columns not meaningful for an equilibrium are empty.
inline void write_stability_csv(std::ostream& os, const StabilityReport& r) {
  os << "equilibrium,mode,mu_l,lambda0_root,B_coef,C_coef,A_lin,B_lin,a2,a1,a0,routh_ok,"
        "weak_condition,a1_short,a0_short,routh_ok_short,verdict\n";
  for (std::size_t l = 0; l < r.e0_modes.size(); ++l) {
    const auto& m = r.e0_modes[l];
    os << "E0," << l + 1 << ',' << format_double(m.mu_l) << ',' << format_double(m.lambda0_root)
       << ',' << format_double(m.b_coef) << ',' << format_double(m.c_coef) << ",,,,,,,,,,,"
       << to_string(m.verdict) << '\n';
  }
  for (std::size_t l = 0; l < r.estar_modes.size(); ++l) {
    const auto& m = r.estar_modes[l];
    os << "Estar," << l + 1 << ',' << format_double(m.mu_l) << ",,,," << format_double(m.a_lin)
       << ',' << format_double(m.b_lin) << ',' << format_double(m.a2) << ','
       << format_double(m.a1) << ',' << format_double(m.a0) << ',' << (m.routh_ok ? 1 : 0)
       << ',' << (m.weak_condition ? 1 : 0) << ',' << format_double(m.a1_short) << ','
       << format_double(m.a0_short) << ',' << (m.routh_ok_short ? 1 : 0) << ','
       << (m.routh_ok ? "stable" : "unstable") << '\n';
  }
}

}  // namespace hcvrd
