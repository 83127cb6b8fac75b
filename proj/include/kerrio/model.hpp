#pragma once

// Model layer: driven-dissipative Kerr cavity in the rotating frame of the
// drive. Everything downstream (contraction enumeration, integration, output
// spectra) consumes propagators and external-leg amplitudes exclusively
// through this header, so the sign and frame conventions live here and only
// here.
//
// Conventions (pinned, used consistently by the whole library):
//   G^R(t) = -i theta(t)  e^{+i De t} e^{-kappa t/2}
//   G^A(t) = +i theta(-t) e^{+i De t} e^{+kappa t/2} = conj(G^R(-t))
//   G^K(t) = -i F e^{+i De t} e^{-kappa|t|/2},  F = 2 n_b + 1
// with De the effective detuning: the bare drive detuning, or the
// tadpole-shifted value De = delta - 4 n_b u when the context is dressed.
// (The shift sign follows from resumming the thermal-loop insertions in this
// frame: each insertion carries -4 i n_b u, so the geometric series turns
// e^{i delta t} into e^{i (delta - 4 n_b u) t}. The mean-field closure term
// -2iu * 2 n_b <a> produces the same shift.)
// theta(0) = 1/2 so that G^K = F (G^R - G^A) holds pointwise including t = 0.

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace kerrio {

using cplx = std::complex<double>;

// Structured error with a machine-readable kind. Thrown by every module;
// the CLI maps these to messages plus a nonzero exit code.
enum class ErrorKind {
  InvalidParameter,
  ConfigParse,
  Capability,
  Divergence,
  Accuracy,
  Multistability,
  Truncation,
  Schema,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct ModelParams {
  double delta = 0.0;  // drive detuning (units of kappa)
  double kappa = 1.0;  // cavity decay rate; sets the unit of time
  double u = 0.0;      // Kerr nonlinearity
  cplx f = 0.0;        // coherent drive amplitude (units of sqrt(kappa))
  double n_b = 0.0;    // thermal occupation of the bath

  double thermal_weight() const { return 2.0 * n_b + 1.0; }  // F = 2 n_b + 1

  void check() const {
    if (!(kappa > 0.0)) {
      throw Error(ErrorKind::InvalidParameter, "kappa must be positive");
    }
    if (!(n_b >= 0.0)) {
      throw Error(ErrorKind::InvalidParameter, "n_b must be non-negative");
    }
  }
};

// Propagator context: model parameters plus the resummation state that
// affects propagator evaluation. Dressing replaces the detuning by the
// tadpole-shifted value everywhere a propagator or leg is evaluated; no
// other formula changes.
struct PropagatorContext {
  ModelParams params;
  bool dressed = false;

  double delta_eff() const {
    return params.delta - (dressed ? 4.0 * params.n_b * params.u : 0.0);
  }
};

enum class PropagatorKind { Retarded, Advanced, Keldysh };

cplx green(PropagatorKind kind, const PropagatorContext& ctx, double t);

// Frequency-space retarded/advanced propagators, G^{R/A}[w] = 1/(w + De ± i kappa/2).
cplx green_freq(PropagatorKind kind, const PropagatorContext& ctx, double omega);

// External legs of a contraction. Sources are the mean fields of the driven
// Gaussian theory; detectors are the functional-derivative kernels that a
// cumulant pulls down per output operator, including the i from the
// derivative. The K variants are the Keldysh-weighted companions that attach
// to classical slots; their relative weights are +F (photon) and -F
// (anti-photon).
enum class LegKind {
  SourcePhoton,         // <phi^cl>_0, attaches to a cl slot (filled square)
  SourceAntiPhoton,     // conj, attaches to a clbar slot (empty square)
  DetectorPhoton,       // b_out derivative on a qbar slot (empty half-circle)
  DetectorAntiPhoton,   // b+_out derivative on a q slot (filled half-circle)
  DetectorPhotonK,      // +F x DetectorPhoton, on a clbar slot
  DetectorAntiPhotonK,  // -F x DetectorAntiPhoton, on a cl slot
};

bool is_detector(LegKind kind);
bool is_source(LegKind kind);
bool is_keldysh_detector(LegKind kind);
// Anti legs belong to b+_out (filled symbols); plain ones to b_out (empty).
bool is_anti(LegKind kind);
const char* leg_name(LegKind kind);

// Steady-state mean field pulled down by a source leg:
//   <phi^cl>_0 = -sqrt(2 kappa) f / (kappa/2 - i De).
cplx source_photon_mean(const PropagatorContext& ctx);

// Value of a single leg at the given vertex time (detector legs additionally
// need the detector time; passing one for a source is an error and vice
// versa). Used for pointwise checks; the integrator consumes the same
// amplitudes in exponential form.
cplx leg_amplitude(LegKind kind, double vertex_time,
                   std::optional<double> detector_time,
                   const PropagatorContext& ctx);

// Same-vertex equal-time contraction constants. Only the classical-classical
// loop is ever emitted; its value 2 n_b already accounts for the
// quantum-quantum partner diagram that the loop convention merges in.
struct LoopConstants {
  double cl_cl;  // 2 n_b
};
LoopConstants loop_constants(const ModelParams& params);

// Mean output field of the linear (u = 0 inside the cavity) theory,
// <b_out>_0 = f (1 - kappa / (kappa/2 - i De)). This is the zeroth-order
// term of every <b_out> cumulant series; the dressed context shifts De.
cplx linear_bout_mean(const PropagatorContext& ctx);

}  // namespace kerrio
