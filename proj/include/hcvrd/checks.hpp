#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "equilibria.hpp"
#include "lyapunov.hpp"
#include "model.hpp"
#include "scenario.hpp"
#include "solver.hpp"
#include "stability.hpp"

namespace hcvrd {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

namespace detail {

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

}  // namespace detail

/// Valid parameter draw spanning both sides of the R0 = 1 threshold.
inline ModelParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ModelParams p;
  p.lambda = detail::log_uniform(rng, 1.0, 200.0);
  p.d = detail::log_uniform(rng, 0.05, 10.0);
  p.beta = detail::log_uniform(rng, 1e-3, 5.0);
  p.eta = 0.9 * unit(rng);
  p.epsilon = 0.9 * unit(rng);
  p.rho = detail::log_uniform(rng, 1e-3, 1.0);
  p.alpha = detail::log_uniform(rng, 0.01, 2.0);
  p.k = detail::log_uniform(rng, 0.1, 50.0);
  p.mu = detail::log_uniform(rng, 0.1, 30.0);
  p.u = unit(rng) < 0.5 ? 0 : 1;
  p.alpha0 = detail::log_uniform(rng, 0.2, 5.0);
  p.alpha1 = detail::log_uniform(rng, 1e-3, 1.0);
  p.alpha2 = detail::log_uniform(rng, 1e-3, 1.0);
  p.alpha3 = unit(rng) < 0.2 ? 0.0 : detail::log_uniform(rng, 1e-4, 0.1);
  p.D1 = detail::log_uniform(rng, 1e-3, 1.0);
  p.D2 = detail::log_uniform(rng, 1e-3, 1.0);
  p.D3 = detail::log_uniform(rng, 1e-3, 1.0);
  return p;
}

/// Restricted-family draw (u = 0, alpha0 = 1, alpha3 = alpha1 alpha2).
inline ModelParams random_restricted_params(std::mt19937_64& rng) {
  ModelParams p = random_params(rng);
  p.u = 0;
  p.alpha0 = 1.0;
  p.alpha3 = p.alpha1 * p.alpha2;
  return p;
}

/// Runtime invariant suite behind the `check` subcommand.
inline std::vector<CheckResult> run_invariant_checks(std::uint64_t seed = 20240607,
                                                     std::size_t samples = 1000) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<CheckResult> out;
  auto report = [&out](std::string name, std::size_t failures, std::size_t total) {
    std::ostringstream d;
    d << failures << " failures in " << total << " samples";
    out.push_back({std::move(name), failures == 0, d.str()});
  };

  {
    std::size_t bad = 0;
    for (std::size_t n = 0; n < samples; ++n) {
      const auto p = random_params(rng);
      const double a = 100.0 * unit(rng), b = 100.0 * unit(rng);
      bad += reaction(p, {0.0, a, b}).H < 0.0;
      bad += reaction(p, {a, 0.0, b}).I < 0.0;
      bad += reaction(p, {a, b, 0.0}).V < 0.0;
    }
    report("quasi_positivity", bad, 3 * samples);
  }
  {
    std::size_t bad = 0;
    for (std::size_t n = 0; n < samples; ++n) {
      const auto p = random_params(rng);
      const PointState s{100.0 * unit(rng), 100.0 * unit(rng), 100.0 * unit(rng)};
      const auto f = reaction(p, s);
      const double expect = p.lambda - p.d * s.H - p.alpha * s.I;
      const double scale = p.lambda + p.d * s.H + (p.alpha + p.rho) * s.I + incidence(p, s.H, s.V);
      bad += std::abs(f.H + f.I - expect) > 1e-13 * scale;
    }
    report("conservation_identity", bad, samples);
  }
  {
    std::size_t bad = 0;
    for (std::size_t n = 0; n < samples; ++n) {
      const auto p = random_params(rng);
      const auto q = derived(p, {0.0, 0.0});
      bad += !(q.R0 <= q.tau0 * (1.0 + 1e-14));
    }
    report("r0_not_above_tau0", bad, samples);
  }
  {
    std::size_t bad = 0, present = 0;
    for (std::size_t n = 0; n < samples; ++n) {
      const auto p = random_params(rng);
      const auto eq = analyze_equilibria(p);
      const bool expect = basic_reproduction_number(p) > 1.0 && net_yield(p) > 0.0;
      bad += eq.exists_Estar != expect;
      bad += sup_norm(reaction(p, eq.E0)) > 1e-12 * p.lambda;
      if (eq.Estar) {
        ++present;
        bad += !(eq.reaction_residual <= 1e-9 * eq.residual_scale);
        bad += !(eq.Estar->H > 0.0 && eq.Estar->H < carrying_level(p) && eq.Estar->I > 0.0 &&
                 eq.Estar->V > 0.0);
      }
    }
    std::ostringstream d;
    d << bad << " failures in " << samples << " samples (" << present << " with E*)";
    out.push_back({"equilibria", bad == 0, d.str()});
  }
  {
    std::size_t bad = 0;
    for (std::size_t n = 0; n < samples; ++n) {
      const auto p = random_params(rng);
      const auto m = e0_characteristic(p, 0.0);
      const double r0 = basic_reproduction_number(p);
      if (m.verdict == Verdict::marginal) continue;
      bad += (m.c_coef > 0.0) != (r0 < 1.0);
    }
    report("e0_sign_law", bad, samples);
  }
  {
    std::size_t bad = 0;
    for (std::size_t n = 0; n < samples; ++n) {
      const auto p = random_restricted_params(rng);
      const PointState e{1.0 + 10.0 * unit(rng), 1.0 + 10.0 * unit(rng), 1.0 + 10.0 * unit(rng)};
      const PointState s{0.01 + 100.0 * unit(rng), 0.01 + 100.0 * unit(rng),
                         0.01 + 100.0 * unit(rng)};
      bad += std::abs(amgm_bracket_product(p, e, s) - 1.0) > 1e-12;
      bad += amgm_bracket(p, e, s) > 1e-12;
    }
    report("amgm_identity", bad, samples);
  }
  {
    const auto p = reference_params(20.0);
    const auto q = derived(p, {10.0, 5.0});
    const auto K = lipschitz_constants(p, q.Hm, q.Vm);
    std::size_t bad = 0;
    const std::size_t pairs = 10 * samples;
    auto draw = [&] { return PointState{q.Hm * unit(rng), q.Hm * unit(rng), q.Vm * unit(rng)}; };
    for (std::size_t n = 0; n < pairs; ++n) {
      const auto x = draw(), y = draw();
      const auto fx = reaction(p, x), fy = reaction(p, y);
      const double dx[3] = {std::abs(x.H - y.H), std::abs(x.I - y.I), std::abs(x.V - y.V)};
      const double df[3] = {std::abs(fx.H - fy.H), std::abs(fx.I - fy.I), std::abs(fx.V - fy.V)};
      for (int i = 0; i < 3; ++i) {
        const double bound = K[i][0] * dx[0] + K[i][1] * dx[1] + K[i][2] * dx[2];
        bad += df[i] > bound * (1.0 + 1e-12) + 1e-12;
      }
    }
    report("lipschitz_bounds", bad, pairs);
  }
  {
    std::size_t bad = 0;
    for (std::size_t n = 0; n < samples; ++n) {
      const auto cells = 3 + static_cast<std::size_t>(unit(rng) * 200);
      const auto g = make_grid(0.1 + 5.0 * unit(rng), cells);
      std::vector<double> f(cells);
      double scale = 0.0;
      for (auto& v : f) scale = std::max(scale, std::abs(v = 100.0 * unit(rng)));
      const auto lap = laplacian_neumann(f, g.spacing());
      bad += std::abs(trapezoid(lap, g.spacing())) > 1e-12 * scale / g.spacing();
    }
    report("laplacian_conservation", bad, samples);
  }
  return out;
}

}  // namespace hcvrd
