#include "kerrio/observables.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "kerrio/integrator.hpp"

namespace kerrio {

namespace {

// Grouped connected diagrams depend on the detector multiset and the vertex
// count only, so they are enumerated once and shared across parameter
// points (scans run these concurrently).
const std::vector<DiagramGroup>& grouped_diagrams(
    const std::vector<DetectorOp>& detectors, int order) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<std::vector<DiagramGroup>>>
      cache;
  std::string key;
  for (const DetectorOp& d : detectors) {
    key += d.dagger ? 'a' : 'p';
    key += d.pin == TimePin::Tau ? 't' : 'z';
  }
  key += ':';
  key += std::to_string(order);

  std::scoped_lock lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto terms = expand_cumulant({detectors, order});
    connected_filter(terms);
    it = cache.emplace(key, std::make_unique<std::vector<DiagramGroup>>(
                                group_terms(terms)))
             .first;
  }
  return *it->second;
}

// Deterministic detector ordering: anti-photon detectors first, earlier pin
// first. The cumulant value is symmetric under detector relabeling, so this
// only normalizes the enumeration cache key.
void normalize_detectors(std::vector<DetectorOp>& detectors) {
  std::sort(detectors.begin(), detectors.end(),
            [](const DetectorOp& a, const DetectorOp& b) {
              if (a.dagger != b.dagger) return a.dagger;
              return static_cast<int>(a.pin) < static_cast<int>(b.pin);
            });
  // stationarity: a correlator with every detector on the same pin does not
  // depend on tau, so pin it at zero
  const bool all_tau = std::all_of(
      detectors.begin(), detectors.end(),
      [](const DetectorOp& d) { return d.pin == TimePin::Tau; });
  if (all_tau) {
    for (DetectorOp& d : detectors) d.pin = TimePin::Zero;
  }
}

CumulantResult order_zero(const std::vector<DetectorOp>& detectors,
                          const PropagatorContext& ctx,
                          const RateFrame& frame) {
  CumulantResult out;
  out.frame = frame;
  if (detectors.size() == 1) {
    cplx v = linear_bout_mean(ctx);
    if (detectors[0].dagger) v = std::conj(v);
    out.regular = ExpPolyTau::constant(v, frame);
  } else if (detectors.size() == 2 &&
             detectors[0].dagger != detectors[1].dagger) {
    // <<b+(t1) b(t2)>>_0 = n_b delta(t2 - t1); higher connected cumulants of
    // the Gaussian theory vanish
    out.delta_coeff = ctx.params.n_b;
  }
  return out;
}

std::vector<CumulantResult> mean_field_cumulant(
    const std::vector<DetectorOp>& detectors, const ModelParams& params,
    const RateFrame& frame) {
  CumulantResult out;
  out.frame = frame;
  if (detectors.size() == 1) {
    cplx v = params.f + std::sqrt(params.kappa) *
                            mean_field_steady_state(params).a_mean;
    if (detectors[0].dagger) v = std::conj(v);
    out.regular = ExpPolyTau::constant(v, frame);
  } else if (detectors.size() == 2 &&
             detectors[0].dagger != detectors[1].dagger) {
    out.delta_coeff = params.n_b;
  }
  return {out};
}

// Per-order pieces of a product of two per-order series, truncated at total
// order `order`. Deltas do not participate: products are only formed for
// regular parts.
std::vector<ExpPolyTau> series_product(const std::vector<ExpPolyTau>& x,
                                       const std::vector<ExpPolyTau>& y,
                                       int order, const RateFrame& frame) {
  std::vector<ExpPolyTau> out(order + 1);
  for (int j = 0; j < static_cast<int>(x.size()); ++j) {
    for (int k = 0; k < static_cast<int>(y.size()); ++k) {
      if (j + k > order) continue;
      out[j + k].add(x[j].times(y[k], frame), frame);
    }
  }
  return out;
}

std::vector<ExpPolyTau> regular_parts(const std::vector<CumulantResult>& c) {
  std::vector<ExpPolyTau> out;
  out.reserve(c.size());
  for (const CumulantResult& r : c) out.push_back(r.regular);
  return out;
}

void check_grid(const std::vector<double>& grid, bool nonnegative,
                const char* what) {
  if (grid.empty()) {
    throw Error(ErrorKind::InvalidParameter,
                std::string(what) + ": empty grid");
  }
  for (size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw Error(ErrorKind::InvalidParameter,
                  std::string(what) + ": grid must be strictly increasing");
    }
    if (nonnegative && grid[i] < 0.0) {
      throw Error(ErrorKind::InvalidParameter,
                  std::string(what) + ": delays must be non-negative");
    }
  }
}

void check_finite(const SpectrumCurve& curve) {
  for (cplx v : curve.values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw Error(ErrorKind::Accuracy,
                  curve.quantity + ": non-finite sample");
    }
  }
}

// Real part of a closed form, as a closed form.
ExpPolyTau real_projection(const ExpPolyTau& p, const RateFrame& frame) {
  ExpPolyTau out = p;
  out.add(p.conjugated(frame), frame);
  out.scale(0.5);
  return out;
}

}  // namespace

std::vector<CumulantResult> cumulant_orders(std::vector<DetectorOp> detectors,
                                            const ModelParams& params,
                                            const SummationMode& mode) {
  params.check();
  if (detectors.empty()) {
    throw Error(ErrorKind::InvalidParameter,
                "cumulant requires at least one detector");
  }
  normalize_detectors(detectors);
  const PropagatorContext ctx = resum_context(params, mode);
  const RateFrame frame{params.kappa, ctx.delta_eff()};
  if (mode.kind == SummationKind::MeanField) {
    return mean_field_cumulant(detectors, params, frame);
  }
  if (mode.order < 0) {
    throw Error(ErrorKind::InvalidParameter,
                "summation order must be non-negative");
  }

  std::vector<CumulantResult> out;
  out.reserve(mode.order + 1);
  out.push_back(order_zero(detectors, ctx, frame));
  cplx prefactor = 1.0;
  for (int n = 1; n <= mode.order; ++n) {
    prefactor *= cplx(0.0, -params.u) / static_cast<double>(n);
    CumulantResult piece;
    piece.frame = frame;
    if (params.u != 0.0) {
      for (const DiagramGroup& g : grouped_diagrams(detectors, n)) {
        if (!admits_diagram(mode, g.rep)) continue;
        ExpPolyTau poly = integrate_analytic(to_integrand(g.rep, ctx), frame);
        poly.scale(static_cast<double>(g.labeled_count) * prefactor);
        piece.regular.add(poly, frame);
      }
    }
    out.push_back(std::move(piece));
  }
  return out;
}

CumulantResult cumulant(std::vector<DetectorOp> detectors,
                        const ModelParams& params, const SummationMode& mode) {
  const auto pieces = cumulant_orders(std::move(detectors), params, mode);
  CumulantResult total;
  total.frame = pieces.front().frame;
  for (const CumulantResult& p : pieces) {
    total.regular.add(p.regular, total.frame);
    total.delta_coeff += p.delta_coeff;
  }
  return total;
}

cplx mean_output_field(const ModelParams& params, const SummationMode& mode) {
  if (mode.kind == SummationKind::MeanField) {
    params.check();
    return params.f +
           std::sqrt(params.kappa) * mean_field_steady_state(params).a_mean;
  }
  return cumulant({DetectorOp{false, TimePin::Zero}}, params, mode)
      .eval_regular(0.0);
}

Reflection reflection(const ModelParams& params, const SummationMode& mode) {
  params.check();
  if (params.f == cplx(0.0)) {
    throw Error(ErrorKind::InvalidParameter,
                "reflection is undefined for f = 0");
  }
  const cplx rel = mean_output_field(params, mode) / params.f;
  return {std::norm(rel), -std::arg(rel)};
}

SpectrumCurve g1(const ModelParams& params, const SummationMode& mode,
                 const std::vector<double>& tau_grid) {
  check_grid(tau_grid, true, "g1");
  const auto cum = cumulant_orders(
      {{true, TimePin::Tau}, {false, TimePin::Zero}}, params, mode);
  const auto b_dag = cumulant_orders({{true, TimePin::Zero}}, params, mode);
  const auto b = cumulant_orders({{false, TimePin::Zero}}, params, mode);
  const RateFrame frame = cum.front().frame;
  const int order = static_cast<int>(cum.size()) - 1;
  const auto mean_product =
      series_product(regular_parts(b_dag), regular_parts(b), order, frame);

  SpectrumCurve curve;
  curve.grid = tau_grid;
  curve.params = params;
  curve.mode = mode;
  curve.quantity = "g1";
  for (const CumulantResult& p : cum) curve.delta_coeff += p.delta_coeff;
  curve.values.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    cplx v = 0.0;
    for (const CumulantResult& p : cum) v += p.eval_regular(tau);
    for (const ExpPolyTau& p : mean_product) v += p.eval(tau, frame);
    curve.values.push_back(v);
  }
  check_finite(curve);
  return curve;
}

SqueezingPair squeezing_spectrum(const ModelParams& params,
                                 const SummationMode& mode, double theta,
                                 const std::vector<double>& omega_grid) {
  check_grid(omega_grid, false, "squeezing_spectrum");
  const CumulantResult bb =
      cumulant({{false, TimePin::Tau}, {false, TimePin::Zero}}, params, mode);
  const CumulantResult bdb =
      cumulant({{true, TimePin::Tau}, {false, TimePin::Zero}}, params, mode);
  const RateFrame frame = bb.frame;
  const cplx phase = std::exp(cplx(0.0, -theta));

  SqueezingPair pair;
  for (int sign : {+1, -1}) {
    ExpPolyTau c = bb.regular;
    c.scale(phase);
    ExpPolyTau side = bdb.regular;
    side.scale(static_cast<double>(sign));
    c.add(side, frame);
    c = real_projection(c, frame);
    c.scale(0.5);
    // wipe cancellation residue so roundoff-sized constants cannot trip the
    // divergence guard of the half-line transform
    c.prune(1e-12);
    const double delta_part =
        0.5 * (phase * bb.delta_coeff +
               static_cast<double>(sign) * bdb.delta_coeff)
                  .real();

    SpectrumCurve curve;
    curve.grid = omega_grid;
    curve.params = params;
    curve.mode = mode;
    curve.quantity = sign > 0 ? "squeezing_plus" : "squeezing_minus";
    curve.theta = theta;
    curve.values.reserve(omega_grid.size());
    for (double omega : omega_grid) {
      // full-line transform of an even real correlator
      const double s =
          2.0 * halfline_transform(c, frame, omega).real() + delta_part;
      curve.values.push_back(s);
    }
    check_finite(curve);
    (sign > 0 ? pair.plus : pair.minus) = std::move(curve);
  }
  return pair;
}

SpectrumCurve g2(const ModelParams& params, const SummationMode& mode,
                 const std::vector<double>& tau_grid) {
  check_grid(tau_grid, true, "g2");
  params.check();
  if (params.f == cplx(0.0)) {
    throw Error(ErrorKind::InvalidParameter, "g2 is undefined for f = 0");
  }

  // detectors of the numerator moment <b+(0) b+(tau) b(tau) b(0)>
  const DetectorOp d1{true, TimePin::Zero};
  const DetectorOp d2{true, TimePin::Tau};
  const DetectorOp d3{false, TimePin::Tau};
  const DetectorOp d4{false, TimePin::Zero};
  const auto block = [&](std::vector<DetectorOp> ops) {
    return regular_parts(cumulant_orders(std::move(ops), params, mode));
  };

  const auto c1 = block({d1});
  const auto c2 = block({d2});
  const auto c3 = block({d3});
  const auto c4 = block({d4});
  const auto c12 = block({d1, d2});
  const auto c13 = block({d1, d3});
  const auto c14 = block({d1, d4});
  const auto c23 = block({d2, d3});
  const auto c24 = block({d2, d4});
  const auto c34 = block({d3, d4});
  const auto c123 = block({d1, d2, d3});
  const auto c124 = block({d1, d2, d4});
  const auto c134 = block({d1, d3, d4});
  const auto c234 = block({d2, d3, d4});
  const auto c1234 = block({d1, d2, d3, d4});

  const PropagatorContext ctx = resum_context(params, mode);
  const RateFrame frame{params.kappa, ctx.delta_eff()};
  const int order =
      mode.kind == SummationKind::MeanField ? 0 : std::max(mode.order, 0);

  // moment from cumulants: sum over the 15 partitions of the four detectors,
  // each product truncated at total vertex order
  std::vector<ExpPolyTau> numerator(order + 1);
  const auto accumulate = [&](const std::vector<ExpPolyTau>& piece) {
    for (int n = 0; n <= order && n < static_cast<int>(piece.size()); ++n) {
      numerator[n].add(piece[n], frame);
    }
  };
  const auto prod = [&](const std::vector<ExpPolyTau>& x,
                        const std::vector<ExpPolyTau>& y) {
    return series_product(x, y, order, frame);
  };

  accumulate(c1234);
  accumulate(prod(c1, c234));
  accumulate(prod(c2, c134));
  accumulate(prod(c3, c124));
  accumulate(prod(c4, c123));
  accumulate(prod(c12, c34));
  accumulate(prod(c13, c24));
  accumulate(prod(c14, c23));
  accumulate(prod(prod(c1, c2), c34));
  accumulate(prod(prod(c1, c3), c24));
  accumulate(prod(prod(c1, c4), c23));
  accumulate(prod(prod(c2, c3), c14));
  accumulate(prod(prod(c2, c4), c13));
  accumulate(prod(prod(c3, c4), c12));
  accumulate(prod(prod(c1, c2), prod(c3, c4)));

  const double denom = std::norm(params.f) * std::norm(params.f);
  SpectrumCurve curve;
  curve.grid = tau_grid;
  curve.params = params;
  curve.mode = mode;
  curve.quantity = "g2";
  curve.no_oracle = params.n_b > 0.0;  // singular thermal parts excluded
  curve.values.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    cplx num = 0.0;
    for (const ExpPolyTau& p : numerator) num += p.eval(tau, frame);
    curve.values.push_back(num / denom);
  }
  check_finite(curve);
  return curve;
}

PFunction p_function_linear(const ModelParams& params,
                            const std::vector<cplx>& alpha_grid) {
  params.check();
  if (params.u != 0.0) {
    throw Error(ErrorKind::Capability,
                "closed-form P function exists for the linear cavity only "
                "(u = 0)");
  }
  PFunction out;
  out.mean = linear_bout_mean({params, false});
  out.n_b = params.n_b;
  if (params.n_b == 0.0) {
    out.is_delta = true;  // point mass at the mean
    return out;
  }
  out.values.reserve(alpha_grid.size());
  for (cplx alpha : alpha_grid) {
    out.values.push_back(std::exp(-std::norm(alpha - out.mean) / params.n_b) /
                         (M_PI * params.n_b));
  }
  return out;
}

LinearFrequencyCumulants linear_frequency_cumulants(const ModelParams& params,
                                                    double omega) {
  params.check();
  if (params.u != 0.0) {
    throw Error(ErrorKind::Capability,
                "frequency-space closed forms exist for the linear cavity "
                "only (u = 0)");
  }
  const PropagatorContext ctx{params, false};
  const cplx gr = green_freq(PropagatorKind::Retarded, ctx, omega);
  const cplx ga = green_freq(PropagatorKind::Advanced, ctx, omega);
  LinearFrequencyCumulants out;
  out.b_mean = params.f * (1.0 - cplx(0.0, params.kappa) * gr);
  out.b_dagger_mean =
      std::conj(params.f) * (1.0 + cplx(0.0, params.kappa) * ga);
  out.noise = params.n_b;
  return out;
}

}  // namespace kerrio
