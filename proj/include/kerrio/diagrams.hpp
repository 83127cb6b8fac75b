#pragma once

// Contraction diagrams: typed multigraphs with interaction vertices,
// propagator edges, same-vertex loops, and external legs (sources and
// detectors). Provides canonical keys (exhaustive vertex relabeling),
// structural validation plus the vanishing-rule flags, the combinatorial
// multiplicity of a diagram, and text/DOT/JSON renderings.

#include <string>
#include <vector>

#include "json.hpp"
#include "kerrio/model.hpp"

namespace kerrio {

// Edge endpoint conventions (the stored direction is physical, not cosmetic):
//   Retarded: a = classical end (the later time), b = quantum-bar end;
//             value i G^R(t_a - t_b), support t_a >= t_b.
//   Advanced: a = quantum end, b = classical-bar end (the later time);
//             value i G^A(t_a - t_b), support t_b >= t_a.
//   Keldysh:  a = classical end, b = classical-bar end; value i G^K(t_a - t_b),
//             support unrestricted.
enum class EdgeKind { Retarded, Advanced, Keldysh };

struct Edge {
  EdgeKind kind;
  int a = 0;
  int b = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Symbolic detector times. All cumulants the library evaluates are stationary
// two-time objects, so external times live on the two pins {0, tau}, tau >= 0.
enum class TimePin { Zero, Tau };

struct Leg {
  int vertex = 0;
  LegKind kind = LegKind::SourcePhoton;
  TimePin pin = TimePin::Zero;  // meaningful for detector legs only
  int label = -1;               // detector position in the request; -1 for sources
  friend auto operator<=>(const Leg&, const Leg&) = default;
};

struct Diagram {
  int n_vertices = 0;
  std::vector<Edge> edges;
  std::vector<Leg> legs;
  std::vector<int> loops;  // per-vertex count of classical-classical loops

  friend auto operator<=>(const Diagram&, const Diagram&) = default;
};

struct KeyOptions {
  // Drop detector labels and pins: detectors of the same kind become
  // interchangeable pictures, which is the grouping whose class sizes
  // reproduce the combinatorial multiplicity.
  bool strip_detector_labels = false;
  // Additionally forget the Keldysh marks on detector legs. Used to group
  // rule-5 cancellation partners, which differ only by where the K weight
  // sits.
  bool erase_keldysh_marks = false;
};

// Lexicographically minimal serialization over all vertex relabelings.
// Deterministic across runs and platforms (integer comparisons only).
std::string canonical_key(const Diagram& d, KeyOptions opts = {});

// The diagram relabeled and sorted so that canonical_key(result) is reached
// with the identity permutation. Idempotent.
Diagram canonicalize(const Diagram& d);

// Photon <-> anti-photon conjugate: swaps source/detector fill types and
// retarded/advanced edges, reverses Keldysh orientation. Maps valid diagrams
// with equal photon/anti-photon detector counts to valid diagrams.
Diagram conjugated_diagram(const Diagram& d);

struct ValidationReport {
  bool structure_ok = false;  // vertex degree/flavor bookkeeping consistent
  std::string structure_msg;
  // Vanishing-rule flags. rule4 diagrams are pointwise zero (contradictory
  // time orderings); rule5/rule6 diagrams vanish in cancellation families,
  // not individually (rule6 only at n_b = 0).
  bool rule4_zero = false;
  bool rule5_flag = false;
  char rule5_case = 0;  // 'a', 'b' or 'c' when rule5_flag
  bool rule6_flag = false;

  bool passes_all(double n_b) const {
    return structure_ok && !rule4_zero && !rule5_flag &&
           !(rule6_flag && n_b == 0.0);
  }
};

ValidationReport validate(const Diagram& d);

// Combinatorial multiplicity: 2 per vertex whose four attachments are
// pairwise distinguishable, times the reconnection count of identical
// parallel edges, times n_vertices! for the interchangeable integration
// variables. Equals the size of the labeled contraction group exactly
// (detector labels break every vertex automorphism once the diagram is
// connected, so no symmetry division is needed).
long rule_multiplicity(const Diagram& d);

// Multiplicity used when evaluating with the vanishing rules instead of the
// exact labeled sum: vertices carrying three or more detector legs lose
// their factor of two (the surviving partner of a rule-5b family counts
// once).
long rule_multiplicity_filtered(const Diagram& d);

std::string render_text(const Diagram& d);
std::string render_dot(const Diagram& d);

nlohmann::ordered_json diagram_to_json(const Diagram& d);
Diagram diagram_from_json(const nlohmann::json& j);

}  // namespace kerrio
