// Independent ground truth: a truncated-Fock Lindblad solver for the driven
// Kerr cavity, plus quantum-regression two-time correlators and the
// input-output map to output-field quantities.
//
// The master equation, in the frame rotating with the drive, is
//
//   d rho/dt = -i [H, rho] + kappa (n_b + 1) D[a] rho + kappa n_b D[a+] rho,
//   H = -delta a+a + u a+a+aa - i sqrt(kappa) (f a+ - conj(f) a),
//
// with D[c] rho = c rho c+ - {c+c, rho}/2. The drive sign is fixed so that
// the u = 0 steady state is the coherent state with the linear amplitude
// -sqrt(kappa) f / (kappa/2 - i delta) used throughout the library; every
// closed form here and in the diagrammatic path must agree without frame
// juggling.
//
// Nothing in this module shares code with the diagrammatic evaluator: the
// Liouvillian is built and solved numerically (dense linear algebra), so a
// match between the two paths checks physics, not bookkeeping.
#pragma once

#include <vector>

#include "kerrio/model.hpp"

namespace kerrio {

struct FockConfig {
  int n_max = 30;  // Fock levels kept; states |0> .. |n_max - 1>
  // Allowed relative drift of reported observables when the truncation is
  // deepened by five levels.
  double convergence_margin = 1e-6;
};

// Steady-state density matrix on the truncated space, stored row-major:
// rho[i * dim + j] = <i| rho |j>. Hermitized and trace-normalized; the
// recorded trace_error is |Tr rho - 1| of the stored matrix.
struct SteadyState {
  int dim = 0;
  std::vector<cplx> rho;
  double trace_error = 0.0;
};

// Solves L[rho] = 0 by shifted inverse iteration on the vectorized
// Liouvillian, falling back to explicit time integration to t = 50/kappa
// when the iteration stalls. Throws a truncation error when the population
// at the last kept level exceeds 1e-10, and an accuracy error when neither
// method reaches a small residual.
SteadyState steady_state(const ModelParams& params, const FockConfig& cfg);

// <a+^m a^n> on a stored state.
cplx fock_moment(const SteadyState& state, int raise_pow, int lower_pow);

enum class LadderOp { Lower, Raise };

// Quantum-regression two-time correlator on a tau grid (tau >= 0, strictly
// increasing). The at_zero string is read normal-ordered around the at_tau
// string: raising operators stand to the left, lowering operators to the
// right, so
//
//   two_time(.., {Raise, Lower}, {Raise, Lower}, grid)
//     = <a+(0) a+(tau) a(tau) a(0)>
//     = Tr[a+a exp(L tau)(a rho_ss a+)].
//
// The at_tau product is applied in the order given.
std::vector<cplx> two_time(const ModelParams& params, const FockConfig& cfg,
                           const std::vector<LadderOp>& at_tau,
                           const std::vector<LadderOp>& at_zero,
                           const std::vector<double>& tau_grid);

// Output-field quantities through b_out = f + sqrt(kappa) a. First moments
// are exact at any temperature; multi-operator output correlators require a
// coherent input (n_b = 0), where b_in inside normally ordered, time-ordered
// products reduces to the amplitude f. Thermal multi-operator requests raise
// a capability error.
cplx oracle_mean_output(const ModelParams& params, const FockConfig& cfg);
double oracle_reflection(const ModelParams& params, const FockConfig& cfg);
std::vector<cplx> oracle_g1(const ModelParams& params, const FockConfig& cfg,
                            const std::vector<double>& tau_grid);
std::vector<double> oracle_g2(const ModelParams& params, const FockConfig& cfg,
                              const std::vector<double>& tau_grid);

// Largest relative drift of {<a>, <a+a>, <a+a+aa>} when the truncation is
// deepened from cfg.n_max to cfg.n_max + 5.
double truncation_margin(const ModelParams& params, const FockConfig& cfg);

// Throws a truncation error naming the drifting observable when
// truncation_margin exceeds cfg.convergence_margin.
void require_converged(const ModelParams& params, const FockConfig& cfg);

}  // namespace kerrio
