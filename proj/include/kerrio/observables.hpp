#pragma once

// Physical outputs assembled from connected output-field cumulants:
// reflection, first-order coherence, squeezing spectra, second-order
// coherence, the linear-cavity P function, and the frequency-space
// linear-cavity cumulants.
//
// All correlators are stationary two-time objects with detector times on the
// pins {0, tau}. A cumulant evaluates to a closed-form exponential
// polynomial in tau plus an optional delta(tau) coefficient (the thermal
// noise of the linear theory), which is carried symbolically and never mixed
// into sampled curves. Moments are built from cumulants with every product
// truncated at total vertex order, so moment identities that hold order by
// order (photon-flux conservation in particular) survive truncation exactly.

#include <string>
#include <vector>

#include "kerrio/contractions.hpp"
#include "kerrio/expoly.hpp"
#include "kerrio/model.hpp"
#include "kerrio/resum.hpp"

namespace kerrio {

struct CumulantResult {
  ExpPolyTau regular;      // function of the pin separation tau >= 0
  cplx delta_coeff = 0.0;  // coefficient of delta(tau)
  RateFrame frame;

  cplx eval_regular(double tau) const { return regular.eval(tau, frame); }
};

// Connected cumulant split by vertex count (index = number of interaction
// vertices, 0 .. mode.order). Index 0 holds the linear-cavity closed form.
// MeanField mode returns a single entry: the displaced-state values, with
// the mean taken from the self-consistent fixed point.
std::vector<CumulantResult> cumulant_orders(std::vector<DetectorOp> detectors,
                                            const ModelParams& params,
                                            const SummationMode& mode);

// Sum of cumulant_orders.
CumulantResult cumulant(std::vector<DetectorOp> detectors,
                        const ModelParams& params, const SummationMode& mode);

// <b_out> in the given mode (all orders summed; mean-field uses the
// input-output relation on the fixed point).
cplx mean_output_field(const ModelParams& params, const SummationMode& mode);

struct Reflection {
  double r = 0.0;      // |<b_out> / f|^2
  double theta = 0.0;  // -arg(<b_out> / f)
};

Reflection reflection(const ModelParams& params, const SummationMode& mode);

// Sampled curve plus the information needed to interpret it on its own.
struct SpectrumCurve {
  std::vector<double> grid;  // delays or frequencies, strictly increasing
  std::vector<cplx> values;
  ModelParams params;
  SummationMode mode;
  std::string quantity;
  cplx delta_coeff = 0.0;  // singular tau = 0 part, reported out of band
  bool no_oracle = false;  // finite-temperature g2 carries no benchmark
  double theta = 0.0;      // quadrature angle (squeezing only)
};

// G1(tau) = <<b+(tau) b(0)>> + <b+><b>, regular part; the thermal delta at
// tau = 0 is reported in delta_coeff.
SpectrumCurve g1(const ModelParams& params, const SummationMode& mode,
                 const std::vector<double>& tau_grid);

struct SqueezingPair {
  SpectrumCurve plus;
  SpectrumCurve minus;
};

// Spectra of the normal-ordered quadrature variances,
//   S_pm[w] = FT of (1/2) Re{ e^{-i theta} <<b b>>(tau) pm <<b+ b>>(tau) },
// computed analytically from the closed forms; the thermal delta contributes
// the flat pm n_b / 2.
SqueezingPair squeezing_spectrum(const ModelParams& params,
                                 const SummationMode& mode, double theta,
                                 const std::vector<double>& omega_grid);

// Normalized second-order coherence of the output light. The numerator is
// the full moment-from-cumulants partition sum over the four detectors
// {b+(0), b+(tau), b(tau), b(0)}; the denominator is |f|^4. Singular delta
// contributions (present only for n_b > 0) are excluded from the sampled
// curve and the result is flagged no_oracle at finite temperature.
SpectrumCurve g2(const ModelParams& params, const SummationMode& mode,
                 const std::vector<double>& tau_grid);

// Single-mode Glauber-Sudarshan P function of the linear-cavity output:
// a Gaussian of width n_b centered on the mean output field, degenerating
// to a point mass at n_b = 0.
struct PFunction {
  bool is_delta = false;  // n_b = 0: point mass at `mean`
  cplx mean = 0.0;
  double n_b = 0.0;
  std::vector<double> values;  // aligned with alpha_grid; empty when delta
};

PFunction p_function_linear(const ModelParams& params,
                            const std::vector<cplx>& alpha_grid);

// Frequency-space closed forms of the linear cavity (constant drive):
// first moments relative to the drive amplitude and the flat noise kernel.
struct LinearFrequencyCumulants {
  cplx b_mean = 0.0;         // f (1 - i kappa G^R[w])
  cplx b_dagger_mean = 0.0;  // conj(f) (1 + i kappa G^A[w])
  double noise = 0.0;        // n_b, independent of w
};

LinearFrequencyCumulants linear_frequency_cumulants(const ModelParams& params,
                                                    double omega);

}  // namespace kerrio
