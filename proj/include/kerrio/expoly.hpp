#pragma once

// Exact exponential-polynomial algebra over the rate lattice
//   lambda = mk * (kappa/2) + i * nd * delta_eff,   mk, nd integers.
//
// Every exponential rate that appears in a contraction integral lives on
// this lattice, so zero-rate and degenerate-rate decisions (which select the
// polynomial branch of an integral) are integer comparisons instead of
// floating-point ones. The only value-level degeneracy the lattice cannot
// see is delta_eff == 0.0, where all nd collapse; RateFrame::reduced folds
// that collapse in before any comparison.

#include <vector>

#include "kerrio/model.hpp"

namespace kerrio {

struct Rate {
  int mk = 0;  // multiples of kappa/2 (real part)
  int nd = 0;  // multiples of delta_eff (imaginary part)

  friend Rate operator+(Rate a, Rate b) { return {a.mk + b.mk, a.nd + b.nd}; }
  friend Rate operator-(Rate a, Rate b) { return {a.mk - b.mk, a.nd - b.nd}; }
  friend Rate operator-(Rate a) { return {-a.mk, -a.nd}; }
  friend bool operator==(Rate a, Rate b) = default;
};

struct RateFrame {
  double kappa = 1.0;
  double delta_eff = 0.0;

  cplx value(Rate r) const {
    return cplx(r.mk * kappa / 2.0, r.nd * delta_eff);
  }
  // Collapse the detuning direction when it is exactly degenerate, so that
  // rate keys compare equal iff the complex rates are equal.
  Rate reduced(Rate r) const {
    return delta_eff == 0.0 ? Rate{r.mk, 0} : r;
  }
  bool is_zero(Rate r) const {
    Rate q = reduced(r);
    return q.mk == 0 && q.nd == 0;
  }
};

// Sum of c * tau^pow * e^{rate * tau} terms in one non-negative variable.
// This is both the intermediate coefficient ring of the analytic integrator
// (pin values are 0 and tau) and its final result type: a closed-form
// amplitude that can be evaluated on a tau grid or Fourier transformed
// exactly.
class ExpPolyTau {
 public:
  struct Term {
    cplx c;
    int pow = 0;
    Rate rate;
  };

  ExpPolyTau() = default;
  static ExpPolyTau constant(cplx c, const RateFrame& frame) {
    ExpPolyTau p;
    p.add(c, 0, Rate{}, frame);
    return p;
  }

  void add(cplx c, int pow, Rate rate, const RateFrame& frame);
  void add(const ExpPolyTau& other, const RateFrame& frame);
  void scale(cplx s);

  // this * (s * tau^pow * e^{rate tau})
  ExpPolyTau shifted(cplx s, int pow, Rate rate, const RateFrame& frame) const;
  ExpPolyTau times(const ExpPolyTau& other, const RateFrame& frame) const;
  // complex conjugate of the function of real tau
  ExpPolyTau conjugated(const RateFrame& frame) const;

  cplx eval(double tau, const RateFrame& frame) const;
  bool empty() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }
  double max_abs_coeff() const;
  // drop terms with |c| <= eps * max|c| (for display only; arithmetic keeps
  // exact zeros out automatically)
  void prune(double eps);

 private:
  std::vector<Term> terms_;  // sorted by (pow, rate.mk, rate.nd), coalesced
};

// integral_0^inf tau^p e^{s tau} dtau = p! / (-s)^{p+1} for Re s < 0.
// Used by the spectrum transforms; throws a divergence error otherwise.
cplx halfline_moment(int pow, cplx s);

// integral_0^inf p(tau) e^{i omega tau} dtau, term by term. Every term must
// decay (Re rate < 0); constants and pure oscillations are divergent here.
cplx halfline_transform(const ExpPolyTau& p, const RateFrame& frame,
                        double omega);

}  // namespace kerrio
