#include "kerrio/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>

namespace kerrio {

namespace {

void check_ids(const ExpProduct& prod) {
  auto node_ok = [&](int id) {
    return id == kPinZero || id == kPinTau || (id >= 0 && id < prod.n_vars);
  };
  for (const ExpFactor& f : prod.factors) {
    if (!node_ok(f.hi) || !node_ok(f.lo)) {
      throw Error(ErrorKind::InvalidParameter, "factor node id out of range");
    }
    if (f.hi == f.lo) {
      throw Error(ErrorKind::InvalidParameter,
                  "equal-time factors must be folded into the constant");
    }
  }
  for (const KeldyshFactor& k : prod.k_factors) {
    if (k.a < 0 || k.a >= prod.n_vars || k.b < 0 || k.b >= prod.n_vars ||
        k.a == k.b) {
      throw Error(ErrorKind::InvalidParameter,
                  "keldysh kernel endpoints must be two distinct variables");
    }
  }
}

bool references(const std::vector<ExpFactor>& fs, int node) {
  return std::any_of(fs.begin(), fs.end(), [node](const ExpFactor& f) {
    return f.hi == node || f.lo == node;
  });
}

std::vector<std::vector<int>> chains_for(const std::vector<ExpFactor>& fs,
                                         int n_vars) {
  std::vector<int> nodes;
  if (references(fs, kPinTau)) nodes.push_back(kPinTau);
  if (references(fs, kPinZero)) nodes.push_back(kPinZero);
  for (int i = 0; i < n_vars; ++i) nodes.push_back(i);
  std::sort(nodes.begin(), nodes.end());

  std::vector<std::vector<int>> chains;
  if (nodes.empty()) return chains;
  std::vector<int> pos(static_cast<size_t>(n_vars) + 2, 0);
  auto index = [n_vars](int id) {
    return id >= 0 ? static_cast<size_t>(id)
                   : static_cast<size_t>(n_vars) + (id == kPinZero ? 0 : 1);
  };
  do {
    for (size_t p = 0; p < nodes.size(); ++p) pos[index(nodes[p])] = (int)p;
    bool ok = true;
    // tau >= 0: the zero pin never sits above the tau pin
    if (references(fs, kPinZero) && references(fs, kPinTau) &&
        pos[index(kPinZero)] > pos[index(kPinTau)]) {
      ok = false;
    }
    for (const ExpFactor& f : fs) {
      if (pos[index(f.lo)] > pos[index(f.hi)]) {
        ok = false;
        break;
      }
    }
    if (ok) chains.push_back(nodes);
  } while (std::next_permutation(nodes.begin(), nodes.end()));
  return chains;
}

// State of the bottom-up chain integration: a sum of
// coeff(tau) * x^pow * e^{rate x} terms in the current frontier value x.
struct STerm {
  ExpPolyTau coeff;
  int pow = 0;
  Rate rate;
};
using Terms = std::vector<STerm>;

void add_term(Terms& ts, ExpPolyTau coeff, int pow, Rate rate,
              const RateFrame& frame) {
  if (coeff.empty()) return;
  rate = frame.reduced(rate);
  for (STerm& t : ts) {
    if (t.pow == pow && t.rate == rate) {
      t.coeff.add(coeff, frame);
      return;
    }
  }
  ts.push_back(STerm{std::move(coeff), pow, rate});
}

void drop_empty(Terms& ts) {
  std::erase_if(ts, [](const STerm& t) { return t.coeff.empty(); });
}

Terms folded(const Terms& ts, Rate rho, const RateFrame& frame) {
  Terms out;
  for (const STerm& t : ts) add_term(out, t.coeff, t.pow, t.rate + rho, frame);
  drop_empty(out);
  return out;
}

// Indefinite integral in the frontier variable:
//   int x^p e^{mu x} dx = e^{mu x} sum_{j=0..p} (-1)^{p-j} (p!/j!) x^j / mu^{p-j+1}
// and x^{p+1}/(p+1) when the lattice rate is zero.
Terms antiderivative(const Terms& ts, const RateFrame& frame) {
  Terms out;
  for (const STerm& t : ts) {
    if (frame.is_zero(t.rate)) {
      ExpPolyTau c = t.coeff;
      c.scale(1.0 / (t.pow + 1));
      add_term(out, std::move(c), t.pow + 1, Rate{}, frame);
      continue;
    }
    const cplx inv = 1.0 / frame.value(t.rate);
    cplx weight = inv;   // (-1)^{p-j} (p!/j!) / mu^{p-j+1}
    for (int j = t.pow; j >= 0; --j) {
      ExpPolyTau c = t.coeff;
      c.scale(weight);
      add_term(out, std::move(c), j, t.rate, frame);
      weight *= -static_cast<double>(j) * inv;
    }
  }
  drop_empty(out);
  return out;
}

ExpPolyTau eval_at_pin(const Terms& ts, bool at_tau, const RateFrame& frame) {
  ExpPolyTau v;
  for (const STerm& t : ts) {
    if (at_tau) {
      v.add(t.coeff.shifted(1.0, t.pow, t.rate, frame), frame);
    } else if (t.pow == 0) {
      v.add(t.coeff, frame);
    }
  }
  return v;
}

void require_vanishes(const Terms& ts, bool at_plus_infinity) {
  for (const STerm& t : ts) {
    const bool ok = at_plus_infinity ? t.rate.mk < 0 : t.rate.mk > 0;
    if (!ok) {
      throw Error(ErrorKind::Divergence,
                  at_plus_infinity
                      ? "vertex-time integral does not decay towards +infinity"
                      : "vertex-time integral does not decay towards "
                        "-infinity; the integrand is not anchored to a pin");
    }
  }
}

ExpPolyTau process_chain(const std::vector<int>& chain,
                         const std::vector<Rate>& rho, int n_vars,
                         const RateFrame& frame) {
  auto index = [n_vars](int id) {
    return id >= 0 ? static_cast<size_t>(id)
                   : static_cast<size_t>(n_vars) + (id == kPinZero ? 0 : 1);
  };
  Terms s;
  add_term(s, ExpPolyTau::constant(1.0, frame), 0, Rate{}, frame);
  std::optional<int> lower_pin;
  for (size_t k = 0; k < chain.size(); ++k) {
    const int node = chain[k];
    const bool last = k + 1 == chain.size();
    Terms cur = folded(s, rho[index(node)], frame);
    if (node < 0) {
      ExpPolyTau v = eval_at_pin(cur, node == kPinTau, frame);
      if (last) return v;
      s.clear();
      add_term(s, std::move(v), 0, Rate{}, frame);
      lower_pin = node;
      continue;
    }
    Terms F = antiderivative(cur, frame);
    ExpPolyTau at_lower;
    if (lower_pin) {
      at_lower = eval_at_pin(F, *lower_pin == kPinTau, frame);
    } else {
      require_vanishes(F, false);
    }
    if (last) {
      require_vanishes(F, true);  // remaining terms must die at +infinity
      at_lower.scale(-1.0);
      return at_lower;
    }
    at_lower.scale(-1.0);
    Terms next = std::move(F);
    add_term(next, std::move(at_lower), 0, Rate{}, frame);
    drop_empty(next);
    s = std::move(next);
  }
  return ExpPolyTau::constant(1.0, frame);  // empty chain: nothing to do
}

}  // namespace

std::vector<std::vector<int>> admissible_chains(const ExpProduct& prod) {
  check_ids(prod);
  return chains_for(prod.factors, prod.n_vars);
}

ExpPolyTau integrate_analytic(const ExpProduct& prod, const RateFrame& frame) {
  check_ids(prod);
  ExpPolyTau total;
  const size_t n_k = prod.k_factors.size();
  if (n_k > 20) {
    throw Error(ErrorKind::Capability,
                "too many keldysh kernels to branch-expand");
  }
  for (unsigned mask = 0; mask < (1u << n_k); ++mask) {
    std::vector<ExpFactor> fs = prod.factors;
    fs.reserve(fs.size() + n_k);
    for (size_t i = 0; i < n_k; ++i) {
      const KeldyshFactor& kf = prod.k_factors[i];
      if (mask & (1u << i)) {
        fs.push_back(ExpFactor{Rate{-1, +1}, kf.a, kf.b});
      } else {
        fs.push_back(ExpFactor{Rate{-1, -1}, kf.b, kf.a});
      }
    }
    std::vector<Rate> rho(static_cast<size_t>(prod.n_vars) + 2);
    auto index = [&](int id) {
      return id >= 0 ? static_cast<size_t>(id)
                     : static_cast<size_t>(prod.n_vars) +
                           (id == kPinZero ? 0 : 1);
    };
    for (const ExpFactor& f : fs) {
      rho[index(f.hi)] = rho[index(f.hi)] + f.rate;
      rho[index(f.lo)] = rho[index(f.lo)] - f.rate;
    }
    const auto chains = chains_for(fs, prod.n_vars);
    if (chains.empty() && prod.n_vars == 0 && fs.empty()) {
      total.add(ExpPolyTau::constant(1.0, frame), frame);
      continue;
    }
    for (const auto& chain : chains) {
      total.add(process_chain(chain, rho, prod.n_vars, frame), frame);
    }
  }
  total.scale(prod.constant);
  return total;
}

namespace {

// Recursive one-dimensional adaptive Simpson over complex values. Segments
// wider than `min_width` are always split, whatever the error estimate says:
// every integrand here decays at a multiple of kappa/2 away from its kinks,
// so a coarse three-point stencil over a wide segment can land entirely in
// the flat tails and report a confident zero while a kappa-scale hump sits
// between the samples.
class Simpson {
 public:
  Simpson(std::function<cplx(double)> f, int max_depth, double min_width,
          double* err_acc)
      : f_(std::move(f)),
        max_depth_(max_depth),
        min_width_(min_width),
        err_acc_(err_acc) {}

  cplx run(double a, double b, const std::vector<double>& cuts, double tol) {
    std::vector<double> edges{a, b};
    for (double c : cuts) {
      if (c > a && c < b) edges.push_back(c);
    }
    std::sort(edges.begin(), edges.end());
    cplx total = 0.0;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
      const double lo = edges[i], hi = edges[i + 1];
      if (hi <= lo) continue;
      const double seg_tol = tol * (hi - lo) / (b - a);
      const double m = 0.5 * (lo + hi);
      const cplx fl = f_(lo), fm = f_(m), fh = f_(hi);
      total += recurse(lo, hi, fl, fm, fh, simpson(lo, hi, fl, fm, fh),
                       seg_tol, 0);
    }
    return total;
  }

 private:
  static cplx simpson(double a, double b, cplx fa, cplx fm, cplx fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  }

  cplx recurse(double a, double b, cplx fa, cplx fm, cplx fb, cplx whole,
               double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const cplx flm = f_(lm), frm = f_(rm);
    const cplx left = simpson(a, m, fa, flm, fm);
    const cplx right = simpson(m, b, fm, frm, fb);
    const cplx delta = left + right - whole;
    const bool resolved = b - a <= min_width_;
    if ((resolved && std::abs(delta) / 15.0 <= tol) || depth >= max_depth_) {
      *err_acc_ += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    return recurse(a, m, fa, flm, fm, left, tol / 2.0, depth + 1) +
           recurse(m, b, fm, frm, fb, right, tol / 2.0, depth + 1);
  }

  std::function<cplx(double)> f_;
  int max_depth_;
  double min_width_;
  double* err_acc_;
};

}  // namespace

QuadratureResult integrate_quadrature(const ExpProduct& prod,
                                      const RateFrame& frame, double tau,
                                      const QuadratureOptions& opts) {
  check_ids(prod);
  if (!(tau >= 0.0)) {
    throw Error(ErrorKind::InvalidParameter,
                "quadrature requires tau >= 0");
  }
  if (prod.constant == cplx(0.0, 0.0)) return {};

  auto pin_value = [tau](int id) { return id == kPinTau ? tau : 0.0; };
  std::vector<double> t(static_cast<size_t>(std::max(prod.n_vars, 1)), 0.0);
  auto node_value = [&](int id) {
    return id >= 0 ? t[static_cast<size_t>(id)] : pin_value(id);
  };
  auto integrand = [&]() -> cplx {
    cplx v = 1.0;
    for (const ExpFactor& f : prod.factors) {
      const double d = node_value(f.hi) - node_value(f.lo);
      if (d < 0.0) return 0.0;
      v *= std::exp(frame.value(f.rate) * d);
    }
    for (const KeldyshFactor& k : prod.k_factors) {
      const double d = t[static_cast<size_t>(k.a)] - t[static_cast<size_t>(k.b)];
      v *= std::exp(cplx(-frame.kappa * std::abs(d) / 2.0,
                         frame.delta_eff * d));
    }
    return v;
  };

  if (prod.n_vars == 0) {
    return {prod.constant * integrand(), 0.0};
  }

  std::set<double> pin_set;
  for (const ExpFactor& f : prod.factors) {
    if (f.hi < 0) pin_set.insert(pin_value(f.hi));
    if (f.lo < 0) pin_set.insert(pin_value(f.lo));
  }
  if (pin_set.empty()) {
    throw Error(ErrorKind::Divergence,
                "integrand is not anchored to any pin; the vertex-time "
                "integral is translation invariant and diverges");
  }
  const double w = opts.window / frame.kappa;
  const double box_lo = *pin_set.begin() - w;
  const double box_hi = *pin_set.rbegin() + w;
  const double span = box_hi - box_lo;

  const double scale = std::abs(prod.constant);
  const double tol0 = opts.abs_tol / scale / 2.0;
  // Error is tracked from the outermost dimension's Simpson estimates only;
  // inner dimensions run at a tolerance small enough that their contribution
  // to the outer integral stays within half of the outer budget.
  double err_acc = 0.0;
  double discard = 0.0;

  // Nested adaptive Simpson, outermost dimension first. Cut points for a
  // dimension are the pins plus the already-fixed outer variables, where the
  // step functions and |t - t'| kernels kink.
  std::function<cplx(int, double)> integrate_dim = [&](int dim,
                                                       double tol) -> cplx {
    std::vector<double> cuts(pin_set.begin(), pin_set.end());
    for (int j = 0; j < dim; ++j) cuts.push_back(t[static_cast<size_t>(j)]);
    auto f = [&, dim, tol](double x) -> cplx {
      t[static_cast<size_t>(dim)] = x;
      if (dim + 1 == prod.n_vars) return integrand();
      return integrate_dim(dim + 1, tol / (2.0 * span));
    };
    Simpson q(f, opts.max_depth, 2.0 / frame.kappa,
              dim == 0 ? &err_acc : &discard);
    return q.run(box_lo, box_hi, cuts, tol);
  };

  const cplx raw = integrate_dim(0, tol0);
  const double tail = scale * prod.n_vars *
                      std::pow(span, prod.n_vars - 1) *
                      std::exp(-frame.kappa * w / 2.0) * (2.0 / frame.kappa) *
                      2.0;
  QuadratureResult res;
  res.value = prod.constant * raw;
  res.error = err_acc * scale + opts.abs_tol / 4.0 + tail;
  if (res.error > opts.abs_tol * 4.0 + 1e-300) {
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "quadrature tolerance %.3e not reached: error estimate "
                  "%.3e, best value (%.12e, %.12e)",
                  opts.abs_tol, res.error, res.value.real(),
                  res.value.imag());
    throw Error(ErrorKind::Accuracy, buf);
  }
  return res;
}

}  // namespace kerrio
