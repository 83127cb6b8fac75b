#pragma once

// Vertex-time integration of contraction integrands.
//
// An integrand is a product of causal exponential factors
//   e^{rate (t_hi - t_lo)} theta(t_hi - t_lo)
// over nodes that are either integration variables (vertex times, ids
// 0..n_vars-1) or the two external pins t = 0 (kPinZero) and t = tau
// (kPinTau, tau >= 0), plus symmetric Keldysh kernels
//   e^{i de (t_a - t_b)} e^{-kappa |t_a - t_b| / 2}
// between two variables. All scalar prefactors (leg constants, thermal
// weights, loop values, coupling powers) live in `constant`.
//
// integrate_analytic produces the exact closed form as an exponential
// polynomial in tau by splitting Keldysh kernels into their two causal
// branches and summing simplex integrals over all admissible time orderings.
// integrate_quadrature evaluates the same integral numerically on the
// unsplit integrand; it exists to cross-check the closed form.

#include <vector>

#include "kerrio/expoly.hpp"
#include "kerrio/model.hpp"

namespace kerrio {

inline constexpr int kPinZero = -1;
inline constexpr int kPinTau = -2;

// e^{rate (t_hi - t_lo)} theta(t_hi - t_lo); rate.mk is -1 for every factor
// a contraction produces, so each factor decays in its ordered direction.
struct ExpFactor {
  Rate rate;
  int hi = 0;
  int lo = 0;
};

// Unordered Keldysh kernel between two integration variables. Its two causal
// branches carry rates {mk:-1, nd:+1} (a later) and {mk:-1, nd:-1} (b later).
struct KeldyshFactor {
  int a = 0;
  int b = 0;
};

struct ExpProduct {
  cplx constant = 1.0;
  int n_vars = 0;
  std::vector<ExpFactor> factors;
  std::vector<KeldyshFactor> k_factors;
};

ExpPolyTau integrate_analytic(const ExpProduct& prod, const RateFrame& frame);

// Total orders of the variables and referenced pins that are compatible with
// every factor's step function (Keldysh kernels constrain nothing). Each
// sequence lists node ids from earliest to latest. Exposed for tests; the
// analytic integrator sums exactly these chains per Keldysh branch.
std::vector<std::vector<int>> admissible_chains(const ExpProduct& prod);

struct QuadratureOptions {
  double abs_tol = 5e-8;
  // half-width of the integration box beyond the extreme pin values, in
  // units of 1/kappa; every factor decays at least as e^{-kappa d / 2}
  double window = 45.0;
  int max_depth = 30;
};

struct QuadratureResult {
  cplx value = 0.0;
  double error = 0.0;  // accumulated estimate plus truncated-tail bound
};

QuadratureResult integrate_quadrature(const ExpProduct& prod,
                                      const RateFrame& frame, double tau,
                                      const QuadratureOptions& opts = {});

}  // namespace kerrio
