#include "kerrio/expoly.hpp"

#include <algorithm>
#include <cmath>

namespace kerrio {

namespace {

bool term_key_less(const ExpPolyTau::Term& a, const ExpPolyTau::Term& b) {
  if (a.pow != b.pow) return a.pow < b.pow;
  if (a.rate.mk != b.rate.mk) return a.rate.mk < b.rate.mk;
  return a.rate.nd < b.rate.nd;
}

}  // namespace

void ExpPolyTau::add(cplx c, int pow, Rate rate, const RateFrame& frame) {
  if (c == cplx(0.0, 0.0)) return;
  Term t{c, pow, frame.reduced(rate)};
  auto it = std::lower_bound(terms_.begin(), terms_.end(), t, term_key_less);
  if (it != terms_.end() && it->pow == t.pow && it->rate == t.rate) {
    it->c += t.c;
    if (it->c == cplx(0.0, 0.0)) terms_.erase(it);
  } else {
    terms_.insert(it, t);
  }
}

void ExpPolyTau::add(const ExpPolyTau& other, const RateFrame& frame) {
  for (const auto& t : other.terms_) add(t.c, t.pow, t.rate, frame);
}

void ExpPolyTau::scale(cplx s) {
  if (s == cplx(0.0, 0.0)) {
    terms_.clear();
    return;
  }
  for (auto& t : terms_) t.c *= s;
}

ExpPolyTau ExpPolyTau::shifted(cplx s, int pow, Rate rate,
                               const RateFrame& frame) const {
  ExpPolyTau out;
  for (const auto& t : terms_) {
    out.add(t.c * s, t.pow + pow, t.rate + rate, frame);
  }
  return out;
}

ExpPolyTau ExpPolyTau::times(const ExpPolyTau& other,
                             const RateFrame& frame) const {
  ExpPolyTau out;
  for (const auto& t : other.terms_) {
    out.add(shifted(t.c, t.pow, t.rate, frame), frame);
  }
  return out;
}

ExpPolyTau ExpPolyTau::conjugated(const RateFrame& frame) const {
  ExpPolyTau out;
  for (const auto& t : terms_) {
    out.add(std::conj(t.c), t.pow, Rate{t.rate.mk, -t.rate.nd}, frame);
  }
  return out;
}

cplx ExpPolyTau::eval(double tau, const RateFrame& frame) const {
  cplx acc = 0.0;
  for (const auto& t : terms_) {
    acc += t.c * std::pow(tau, t.pow) * std::exp(frame.value(t.rate) * tau);
  }
  return acc;
}

double ExpPolyTau::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.c));
  return m;
}

void ExpPolyTau::prune(double eps) {
  const double cut = eps * max_abs_coeff();
  std::erase_if(terms_, [cut](const Term& t) { return std::abs(t.c) <= cut; });
}

cplx halfline_moment(int pow, cplx s) {
  if (!(s.real() < 0.0)) {
    throw Error(ErrorKind::Divergence,
                "halfline_moment: integral of tau^p e^{s tau} over [0,inf) "
                "requires Re s < 0");
  }
  double fact = 1.0;
  for (int j = 2; j <= pow; ++j) fact *= j;
  return fact / std::pow(-s, pow + 1);
}

cplx halfline_transform(const ExpPolyTau& p, const RateFrame& frame,
                        double omega) {
  cplx acc = 0.0;
  for (const auto& t : p.terms()) {
    acc += t.c * halfline_moment(t.pow, frame.value(t.rate) + cplx(0, omega));
  }
  return acc;
}

}  // namespace kerrio
