#include "kerrio/resum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace kerrio {

namespace {

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 = 0, c3 != 0. Trigonometric
// branch for three real roots, Cardano for one, then Newton polish.
std::vector<double> cubic_real_roots(double c3, double c2, double c1,
                                     double c0) {
  const double p = c2 / c3;
  const double q = c1 / c3;
  const double r = c0 / c3;
  // depressed form t^3 + a t + b with x = t - p/3
  const double a = q - p * p / 3.0;
  const double b = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
  const double disc = b * b / 4.0 + a * a * a / 27.0;
  std::vector<double> roots;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    const double u = std::cbrt(-b / 2.0 + s);
    const double v = std::cbrt(-b / 2.0 - s);
    roots.push_back(u + v - p / 3.0);
  } else if (a == 0.0) {
    roots.push_back(std::cbrt(-b) - p / 3.0);
  } else {
    const double m = 2.0 * std::sqrt(-a / 3.0);
    double arg = 3.0 * b / (a * m);
    arg = std::clamp(arg, -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(m * std::cos(phi - 2.0 * M_PI * k / 3.0) - p / 3.0);
    }
  }
  for (double& x : roots) {
    for (int it = 0; it < 3; ++it) {
      const double f = ((c3 * x + c2) * x + c1) * x + c0;
      const double df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
      if (df != 0.0) x -= f / df;
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

struct Cubic {
  double c3, c2, c1, c0;
};

// |a|^2 satisfies n [ (kappa/2)^2 + (2u(n + 2 n_b) - delta)^2 ] = kappa |f|^2.
Cubic occupation_cubic(const ModelParams& p, double u) {
  const double aa = 2.0 * u;
  const double c = 4.0 * p.n_b * u - p.delta;
  return {aa * aa, 2.0 * aa * c,
          p.kappa * p.kappa / 4.0 + c * c, -p.kappa * std::norm(p.f)};
}

cplx amplitude_of(const ModelParams& p, double u, double n) {
  const cplx pole(p.kappa / 2.0, -p.delta + 2.0 * u * (n + 2.0 * p.n_b));
  return -std::sqrt(p.kappa) * p.f / pole;
}

cplx equation_value(const ModelParams& p, cplx a) {
  return -cplx(p.kappa / 2.0, -p.delta) * a - std::sqrt(p.kappa) * p.f -
         cplx(0.0, 2.0 * p.u) * (std::norm(a) * a + 2.0 * p.n_b * a);
}

std::vector<double> occupations_at(const ModelParams& p, double u) {
  if (u == 0.0) {
    const double d2 = p.kappa * p.kappa / 4.0 + p.delta * p.delta;
    return {p.kappa * std::norm(p.f) / d2};
  }
  const Cubic c = occupation_cubic(p, u);
  std::vector<double> out;
  for (double n : cubic_real_roots(c.c3, c.c2, c.c1, c.c0)) {
    if (n >= -1e-12) out.push_back(std::max(n, 0.0));
  }
  return out;
}

std::string format_amplitude(cplx a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", a.real(), a.imag());
  return buf;
}

}  // namespace

const char* summation_name(SummationKind kind) {
  switch (kind) {
    case SummationKind::Bare:
      return "bare";
    case SummationKind::LoopSummed:
      return "loop_summed";
    case SummationKind::MeanField:
      return "mean_field";
  }
  return "?";
}

PropagatorContext resum_context(const ModelParams& params,
                                const SummationMode& mode) {
  return {params, mode.kind == SummationKind::LoopSummed};
}

PropagatorContext dress(const ModelParams& params) { return {params, true}; }

bool admits_diagram(const SummationMode& mode, const Diagram& d) {
  switch (mode.kind) {
    case SummationKind::Bare:
      return true;
    case SummationKind::LoopSummed:
      for (int l : d.loops) {
        if (l > 0) return false;
      }
      return true;
    case SummationKind::MeanField:
      return false;  // not a diagram series
  }
  return false;
}

std::vector<cplx> mean_field_fixed_points(const ModelParams& params) {
  params.check();
  std::vector<cplx> out;
  for (double n : occupations_at(params, params.u)) {
    out.push_back(amplitude_of(params, params.u, n));
  }
  return out;
}

MeanFieldState mean_field_steady_state(const ModelParams& params) {
  params.check();
  if (params.f == cplx(0.0) || params.u == 0.0) {
    const cplx a = params.f == cplx(0.0)
                       ? cplx(0.0)
                       : amplitude_of(params, 0.0, 0.0);
    return {a, std::abs(equation_value(params, a))};
  }

  // Track the occupation branch from u = 0 to the target. Steps shrink when
  // the nearest root moves too far; a persistent jump at the minimum step is
  // a fold, where the connected branch ceases to exist.
  const double u_target = params.u;
  double u = 0.0;
  double n = occupations_at(params, 0.0).front();
  double h = u_target / 32.0;
  const double h_min = std::abs(u_target) * 1e-9;
  for (int iter = 0; u != u_target; ++iter) {
    if (iter > 200000) {
      throw Error(ErrorKind::Accuracy,
                  "mean-field continuation failed to terminate");
    }
    double next = u + h;
    if (std::abs(next - 0.0) >= std::abs(u_target) || h == 0.0) {
      next = u_target;
    }
    const std::vector<double> roots = occupations_at(params, next);
    double best = roots.front();
    for (double r : roots) {
      if (std::abs(r - n) < std::abs(best - n)) best = r;
    }
    if (std::abs(best - n) <= 0.1 * (1.0 + std::abs(n))) {
      n = best;
      u = next;
      h *= 1.5;
    } else {
      h /= 2.0;
      if (std::abs(h) < h_min) {
        std::string msg =
            "mean-field branch folds before reaching the requested "
            "nonlinearity; fixed points:";
        for (cplx a : mean_field_fixed_points(params)) {
          msg += " " + format_amplitude(a);
        }
        throw Error(ErrorKind::Multistability, msg);
      }
    }
  }

  // polish the tracked occupation on the target cubic
  const Cubic c = occupation_cubic(params, u_target);
  for (int it = 0; it < 4; ++it) {
    const double f = ((c.c3 * n + c.c2) * n + c.c1) * n + c.c0;
    const double df = (3.0 * c.c3 * n + 2.0 * c.c2) * n + c.c1;
    if (df != 0.0) n -= f / df;
  }
  const cplx a = amplitude_of(params, u_target, n);
  return {a, std::abs(equation_value(params, a))};
}

std::vector<cplx> mean_field_series(const ModelParams& params, int order) {
  params.check();
  if (order < 0) {
    throw Error(ErrorKind::InvalidParameter,
                "mean-field series order must be non-negative");
  }
  if (order > 6) {
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "mean-field series supports orders up to 6, got %d", order);
    throw Error(ErrorKind::Capability, buf);
  }
  const cplx pole(params.kappa / 2.0, -params.delta);
  const cplx g_hat = cplx(0.0, -1.0) / pole;  // integral of G^R
  std::vector<cplx> a;
  a.push_back(-std::sqrt(params.kappa) * params.f / pole);
  for (int m = 1; m <= order; ++m) {
    cplx cubic = 0.0;
    for (int l = 0; l < m; ++l) {
      for (int k = 0; k < m; ++k) {
        const int p = m - 1 - l - k;
        if (p < 0 || p >= m) continue;
        cubic += a[l] * a[k] * std::conj(a[p]);
      }
    }
    a.push_back(2.0 * params.u * g_hat *
                (2.0 * params.n_b * a[m - 1] + cubic));
  }
  return a;
}

}  // namespace kerrio
