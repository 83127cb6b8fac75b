#pragma once

// Partial summations on top of the bare diagram series.
//
// LoopSummed absorbs every same-vertex thermal loop into the propagators:
// each loop insertion carries -4 i n_b u, and summing the insertion chain
// shifts the detuning to delta - 4 n_b u. Diagram sums in this mode skip
// loop-bearing diagrams and evaluate the rest with the dressed context.
//
// MeanField closes the cubic Heisenberg term as <a'aa> ~ <a'><a><a> +
// 2 n_b <a> and solves the resulting fixed-point equation
//   0 = -(kappa/2 - i delta) a - sqrt(kappa) f - 2 i u (|a|^2 a + 2 n_b a).
// Among multiple fixed points the physical branch is the one continuously
// connected to the u = 0 solution.

#include <vector>

#include "kerrio/diagrams.hpp"
#include "kerrio/model.hpp"

namespace kerrio {

enum class SummationKind { Bare, LoopSummed, MeanField };

struct SummationMode {
  SummationKind kind = SummationKind::Bare;
  int order = 2;  // vertex-count truncation; ignored by MeanField

  static SummationMode bare(int order) {
    return {SummationKind::Bare, order};
  }
  static SummationMode loop_summed(int order) {
    return {SummationKind::LoopSummed, order};
  }
  static SummationMode mean_field() { return {SummationKind::MeanField, 0}; }
};

const char* summation_name(SummationKind kind);

// Propagator context implementing the mode: dressed for LoopSummed, bare
// otherwise. MeanField does not evaluate diagrams but gets the bare context.
PropagatorContext resum_context(const ModelParams& params,
                                const SummationMode& mode);

// Dressed context on its own (the loop-summation propagator shift).
PropagatorContext dress(const ModelParams& params);

// Whether a diagram participates in the mode's series: LoopSummed drops
// every diagram carrying a same-vertex loop, Bare keeps all of them.
bool admits_diagram(const SummationMode& mode, const Diagram& d);

struct MeanFieldState {
  cplx a_mean = 0.0;    // intra-cavity amplitude <a>
  double residual = 0.0;  // |fixed-point equation| at a_mean
};

// Physical fixed point by homotopy continuation in u from the linear
// solution. Throws ErrorKind::Multistability when the tracked branch folds
// away before reaching the target u; the message lists every fixed point of
// the target system.
MeanFieldState mean_field_steady_state(const ModelParams& params);

// All fixed points of the closed cubic at the given parameters, in
// increasing order of |a|^2. Size 1 to 3 for u != 0, exactly 1 for u = 0.
std::vector<cplx> mean_field_fixed_points(const ModelParams& params);

// Iterated-diagram series <a>_0 .. <a>_order of the mean-field equation,
//   <a>_n = 2 u G [2 n_b <a>_{n-1} + sum_{l+k+p = n-1} <a>_l <a>_k <a>_p*],
// with G = integral of G^R = -i / (kappa/2 - i delta). Orders above 6 are
// rejected: the recursion is exact but its partial sums are only claimed
// useful deep inside the monostable regime.
std::vector<cplx> mean_field_series(const ModelParams& params, int order);

}  // namespace kerrio
