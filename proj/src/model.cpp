#include "kerrio/model.hpp"

#include <cmath>

namespace kerrio {

namespace {

// theta(0) = 1/2 keeps G^K = F (G^R - G^A) valid at equal times.
double step(double t) {
  if (t > 0.0) return 1.0;
  if (t < 0.0) return 0.0;
  return 0.5;
}

}  // namespace

cplx green(PropagatorKind kind, const PropagatorContext& ctx, double t) {
  const double kappa = ctx.params.kappa;
  const double de = ctx.delta_eff();
  const cplx phase = std::exp(cplx(0.0, de * t));
  switch (kind) {
    case PropagatorKind::Retarded:
      return cplx(0.0, -1.0) * step(t) * phase * std::exp(-kappa * t / 2.0);
    case PropagatorKind::Advanced:
      return cplx(0.0, +1.0) * step(-t) * phase * std::exp(+kappa * t / 2.0);
    case PropagatorKind::Keldysh:
      return cplx(0.0, -ctx.params.thermal_weight()) * phase *
             std::exp(-kappa * std::abs(t) / 2.0);
  }
  throw Error(ErrorKind::InvalidParameter, "unknown propagator kind");
}

cplx green_freq(PropagatorKind kind, const PropagatorContext& ctx,
                double omega) {
  const double kappa = ctx.params.kappa;
  const double de = ctx.delta_eff();
  switch (kind) {
    case PropagatorKind::Retarded:
      return 1.0 / cplx(omega + de, +kappa / 2.0);
    case PropagatorKind::Advanced:
      return 1.0 / cplx(omega + de, -kappa / 2.0);
    case PropagatorKind::Keldysh:
      throw Error(ErrorKind::Capability,
                  "frequency-space Keldysh propagator is not provided; use "
                  "the fluctuation relation with green_freq(R/A)");
  }
  throw Error(ErrorKind::InvalidParameter, "unknown propagator kind");
}

bool is_detector(LegKind kind) {
  return kind != LegKind::SourcePhoton && kind != LegKind::SourceAntiPhoton;
}

bool is_source(LegKind kind) { return !is_detector(kind); }

bool is_keldysh_detector(LegKind kind) {
  return kind == LegKind::DetectorPhotonK ||
         kind == LegKind::DetectorAntiPhotonK;
}

bool is_anti(LegKind kind) {
  return kind == LegKind::SourceAntiPhoton ||
         kind == LegKind::DetectorAntiPhoton ||
         kind == LegKind::DetectorAntiPhotonK;
}

const char* leg_name(LegKind kind) {
  switch (kind) {
    case LegKind::SourcePhoton: return "SourcePhoton";
    case LegKind::SourceAntiPhoton: return "SourceAntiPhoton";
    case LegKind::DetectorPhoton: return "DetectorPhoton";
    case LegKind::DetectorAntiPhoton: return "DetectorAntiPhoton";
    case LegKind::DetectorPhotonK: return "DetectorPhotonK";
    case LegKind::DetectorAntiPhotonK: return "DetectorAntiPhotonK";
  }
  return "?";
}

cplx source_photon_mean(const PropagatorContext& ctx) {
  const double kappa = ctx.params.kappa;
  return -std::sqrt(2.0 * kappa) * ctx.params.f /
         cplx(kappa / 2.0, -ctx.delta_eff());
}

cplx leg_amplitude(LegKind kind, double vertex_time,
                   std::optional<double> detector_time,
                   const PropagatorContext& ctx) {
  ctx.params.check();
  if (is_detector(kind) != detector_time.has_value()) {
    throw Error(ErrorKind::InvalidParameter,
                std::string("leg_amplitude: detector time must be given for "
                            "detector legs and absent for sources (got ") +
                    leg_name(kind) + ")");
  }
  const double kappa = ctx.params.kappa;
  const double F = ctx.params.thermal_weight();
  switch (kind) {
    case LegKind::SourcePhoton:
      return source_photon_mean(ctx);
    case LegKind::SourceAntiPhoton:
      return std::conj(source_photon_mean(ctx));
    default:
      break;
  }
  // Detector kernels: i sqrt(kappa/2) G^{R/A} evaluated so that the support
  // is vertex_time <= detector_time (output is read after the interaction).
  const double tau = *detector_time;
  const double t = vertex_time;
  const cplx photon =
      cplx(0.0, 1.0) * std::sqrt(kappa / 2.0) *
      green(PropagatorKind::Retarded, ctx, tau - t);
  const cplx anti =
      cplx(0.0, 1.0) * std::sqrt(kappa / 2.0) *
      green(PropagatorKind::Advanced, ctx, t - tau);
  switch (kind) {
    case LegKind::DetectorPhoton: return photon;
    case LegKind::DetectorAntiPhoton: return anti;
    case LegKind::DetectorPhotonK: return +F * photon;
    case LegKind::DetectorAntiPhotonK: return -F * anti;
    default:
      throw Error(ErrorKind::InvalidParameter, "unknown leg kind");
  }
}

LoopConstants loop_constants(const ModelParams& params) {
  return LoopConstants{2.0 * params.n_b};
}

cplx linear_bout_mean(const PropagatorContext& ctx) {
  const double kappa = ctx.params.kappa;
  return ctx.params.f *
         (1.0 - kappa / cplx(kappa / 2.0, -ctx.delta_eff()));
}

}  // namespace kerrio
