#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "errors.hpp"

namespace hcvrd {

/// Biological, therapy and diffusion constants of the within-host model.
///
/// Units: densities in cells (or virions) per volume, rates in 1/day,
/// diffusion in length^2/day. `u` switches virion absorption on entry.
struct ModelParams {
  double lambda = 0.0;   ///< healthy hepatocyte production
  double d = 0.0;        ///< healthy hepatocyte death
  double beta = 0.0;     ///< transmission
  double eta = 0.0;      ///< infection-blocking efficacy, [0,1)
  double epsilon = 0.0;  ///< production-blocking efficacy, [0,1)
  double rho = 0.0;      ///< cure
  double alpha = 0.0;    ///< infected cell death
  double k = 0.0;        ///< virion production
  double mu = 0.0;       ///< virion clearance
  int u = 0;             ///< absorption flag, 0 or 1
  double alpha0 = 1.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  double D1 = 0.0;
  double D2 = 0.0;
  double D3 = 0.0;

  bool operator==(const ModelParams&) const = default;
};

/// Densities (H, I, V) at one point. Also used for rate vectors of the same shape.
struct PointState {
  double H = 0.0;
  double I = 0.0;
  double V = 0.0;

  bool operator==(const PointState&) const = default;
};

inline double sup_norm(const PointState& s) {
  return std::max({std::abs(s.H), std::abs(s.I), std::abs(s.V)});
}

inline PointState operator-(const PointState& a, const PointState& b) {
  return {a.H - b.H, a.I - b.I, a.V - b.V};
}

/// Config keys, in canonical emission order.
inline constexpr std::array<std::string_view, 17> kParamKeys = {
    "lambda", "d",      "beta",   "eta",    "epsilon", "rho", "alpha", "k",  "mu",
    "u",      "alpha0", "alpha1", "alpha2", "alpha3",  "D1",  "D2",    "D3"};

inline bool is_param_key(std::string_view key) {
  for (auto k : kParamKeys)
    if (k == key) return true;
  return false;
}

namespace detail {

template <class P, class F>
auto visit_param(P& p, std::string_view key, F&& f) {
  if (key == "lambda") return f(p.lambda);
  if (key == "d") return f(p.d);
  if (key == "beta") return f(p.beta);
  if (key == "eta") return f(p.eta);
  if (key == "epsilon") return f(p.epsilon);
  if (key == "rho") return f(p.rho);
  if (key == "alpha") return f(p.alpha);
  if (key == "k") return f(p.k);
  if (key == "mu") return f(p.mu);
  if (key == "alpha0") return f(p.alpha0);
  if (key == "alpha1") return f(p.alpha1);
  if (key == "alpha2") return f(p.alpha2);
  if (key == "alpha3") return f(p.alpha3);
  if (key == "D1") return f(p.D1);
  if (key == "D2") return f(p.D2);
  if (key == "D3") return f(p.D3);
  throw ConfigError(std::string(key), "unknown parameter key '" + std::string(key) + "'");
}

}  // namespace detail

inline double get_param(const ModelParams& p, std::string_view key) {
  if (key == "u") return static_cast<double>(p.u);
  return detail::visit_param(p, key, [](const double& v) { return v; });
}

/// Assigns one named field. `u` must be exactly 0 or 1. No range validation beyond that.
inline void set_param(ModelParams& p, std::string_view key, double value) {
  if (key == "u") {
    if (value != 0.0 && value != 1.0)
      throw ConfigError("u", "parameter 'u' must be 0 or 1");
    p.u = static_cast<int>(value);
    return;
  }
  detail::visit_param(p, key, [value](double& v) { v = value; });
}

/// Returns the first violated constraint as (key, message), if any.
inline std::optional<std::pair<std::string, std::string>> find_violation(const ModelParams& p) {
  for (auto key : kParamKeys) {
    if (!std::isfinite(get_param(p, key)))
      return std::pair{std::string(key), "must be finite"};
  }
  auto check = [](bool ok, const char* key, const char* msg)
      -> std::optional<std::pair<std::string, std::string>> {
    if (ok) return std::nullopt;
    return std::pair{std::string(key), std::string(msg)};
  };
  for (auto v : {check(p.lambda > 0, "lambda", "must be > 0"),
                 check(p.d > 0, "d", "must be > 0"),
                 check(p.beta >= 0, "beta", "must be >= 0"),
                 check(p.eta >= 0 && p.eta < 1, "eta", "must lie in [0,1)"),
                 check(p.epsilon >= 0 && p.epsilon < 1, "epsilon", "must lie in [0,1)"),
                 check(p.rho >= 0, "rho", "must be >= 0"),
                 check(p.alpha > 0, "alpha", "must be > 0"),
                 check(p.k > 0, "k", "must be > 0"),
                 check(p.mu > 0, "mu", "must be > 0"),
                 check(p.u == 0 || p.u == 1, "u", "must be 0 or 1"),
                 check(p.alpha0 > 0, "alpha0", "must be > 0"),
                 check(p.alpha1 >= 0, "alpha1", "must be >= 0"),
                 check(p.alpha2 >= 0, "alpha2", "must be >= 0"),
                 check(p.alpha3 >= 0, "alpha3", "must be >= 0"),
                 check(p.D1 > 0, "D1", "must be > 0"),
                 check(p.D2 > 0, "D2", "must be > 0"),
                 check(p.D3 > 0, "D3", "must be > 0")}) {
    if (v) return v;
  }
  return std::nullopt;
}

/// Throws ConfigError naming the first offending key.
inline const ModelParams& validate(const ModelParams& p) {
  if (auto v = find_violation(p))
    throw ConfigError(v->first, "parameter '" + v->first + "' " + v->second);
  return p;
}

}  // namespace hcvrd
