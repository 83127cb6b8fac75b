#pragma once

// Wick enumeration of output-field cumulants. A cumulant request names the
// output operators (photon / anti-photon detectors on the two time pins) and
// the interaction order n; the expansion enumerates every complete labeled
// contraction of the n quartic vertices against the detectors, sources and
// propagators, as one Diagram per Wick term.
//
// Evaluation bookkeeping: each labeled term carries weight 1, and the caller
// multiplies the group sum by (-i u)^n / n!. The vertex-permutation factorial
// is NOT folded into multiplicities here; identical labeled terms are simply
// counted, which keeps the exact sum and the rule-based shortcut separately
// auditable.

#include <string>
#include <vector>

#include "kerrio/diagrams.hpp"
#include "kerrio/integrator.hpp"
#include "kerrio/model.hpp"

namespace kerrio {

struct DetectorOp {
  bool dagger = false;  // anti-photon (b+_out) detector
  TimePin pin = TimePin::Zero;
};

struct CumulantRequest {
  std::vector<DetectorOp> detectors;
  int order = 1;  // number of interaction vertices
};

struct ContractionTerm {
  Diagram diagram;
};

// Every complete labeled contraction at the requested order, connected or
// not. Throws a capability error for orders beyond the enumerable range.
std::vector<ContractionTerm> expand_cumulant(const CumulantRequest& req);

// Keep only terms where every vertex and every detector hang together in one
// component (sources do not connect anything). This is the linked part that
// defines the cumulant; dropped terms factorize into products of lower
// moments.
void connected_filter(std::vector<ContractionTerm>& terms);

struct DiagramGroup {
  Diagram rep;                // canonicalized representative
  long labeled_count = 0;     // identical labeled Wick terms
  long stripped_count = 0;    // class size once detector labels are dropped
  std::string labeled_key;
  std::string stripped_key;
};

// Group identical labeled terms; stripped_count accumulates across groups
// sharing the label-stripped key. Deterministic order (sorted by key).
std::vector<DiagramGroup> group_terms(const std::vector<ContractionTerm>& terms);

// Wire a diagram into the integrand product: detector and source constants,
// edge kernels, loop factors. The constant excludes the coupling prefactor
// (-i u)^n / n! and the labeled count.
ExpProduct to_integrand(const Diagram& d, const PropagatorContext& ctx);

}  // namespace kerrio
