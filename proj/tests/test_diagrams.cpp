#include "kerrio/diagrams.hpp"

#include <algorithm>

#include "doctest.h"

using namespace kerrio;

namespace {

Leg src(int v) { return Leg{v, LegKind::SourcePhoton, TimePin::Zero, -1}; }
Leg src_bar(int v) { return Leg{v, LegKind::SourceAntiPhoton, TimePin::Zero, -1}; }
Leg det(int v, LegKind kind, TimePin pin, int label) {
  return Leg{v, kind, pin, label};
}

// single vertex, photon detector, three sources
Diagram mean_output_tree() {
  Diagram d;
  d.n_vertices = 1;
  d.loops = {0};
  d.legs = {det(0, LegKind::DetectorPhoton, TimePin::Tau, 0), src(0), src(0),
            src_bar(0)};
  return d;
}

// single vertex, photon detector, one source, one thermal loop
Diagram mean_output_loop() {
  Diagram d;
  d.n_vertices = 1;
  d.loops = {1};
  d.legs = {det(0, LegKind::DetectorPhoton, TimePin::Tau, 0), src(0)};
  return d;
}

// two vertices, both with a source and a photon detector, joined by one
// Keldysh and one retarded edge
Diagram double_detector_kr() {
  Diagram d;
  d.n_vertices = 2;
  d.loops = {0, 0};
  d.legs = {det(0, LegKind::DetectorPhotonK, TimePin::Zero, 0), src(0),
            det(1, LegKind::DetectorPhoton, TimePin::Tau, 1), src(1)};
  d.edges = {Edge{EdgeKind::Keldysh, 0, 1}, Edge{EdgeKind::Retarded, 1, 0}};
  return d;
}

}  // namespace

TEST_CASE("structure validation accepts the catalog fixtures") {
  for (const Diagram& d :
       {mean_output_tree(), mean_output_loop(), double_detector_kr()}) {
    const auto rep = validate(d);
    CHECK(rep.structure_ok);
    CHECK(rep.structure_msg.empty());
    CHECK(!rep.rule4_zero);
    CHECK(!rep.rule5_flag);
    CHECK(!rep.rule6_flag);
    CHECK(rep.passes_all(0.0));
  }
}

TEST_CASE("structure validation rejects malformed vertices") {
  Diagram d;
  d.n_vertices = 1;
  d.loops = {0};
  d.legs = {src(0), src(0), src(0), src_bar(0)};  // three outgoing slots
  CHECK(!validate(d).structure_ok);

  Diagram quantum;  // two quantum slots via two plain photon detectors
  quantum.n_vertices = 1;
  quantum.loops = {1};
  quantum.legs = {det(0, LegKind::DetectorPhoton, TimePin::Zero, 0),
                  det(0, LegKind::DetectorPhoton, TimePin::Tau, 1)};
  CHECK(!validate(quantum).structure_ok);

  Diagram self;
  self.n_vertices = 1;
  self.loops = {0};
  self.legs = {det(0, LegKind::DetectorPhoton, TimePin::Zero, 0), src(0)};
  self.edges = {Edge{EdgeKind::Keldysh, 0, 0}};
  CHECK(!validate(self).structure_ok);
}

TEST_CASE("combinatorial multiplicities match the catalog values") {
  CHECK(rule_multiplicity(mean_output_tree()) == 1);
  CHECK(rule_multiplicity(mean_output_loop()) == 2);
  CHECK(rule_multiplicity(double_detector_kr()) == 8);

  // two photon detectors on one vertex with two sources
  Diagram bb;
  bb.n_vertices = 1;
  bb.loops = {0};
  bb.legs = {det(0, LegKind::DetectorPhoton, TimePin::Zero, 0),
             det(0, LegKind::DetectorPhotonK, TimePin::Tau, 1), src(0), src(0)};
  CHECK(validate(bb).structure_ok);
  // the two plain source attachments coincide, so no vertex doubling
  CHECK(rule_multiplicity(bb) == 1);
}

TEST_CASE("canonical keys are invariant under vertex relabeling") {
  const Diagram d = double_detector_kr();
  Diagram swapped;
  swapped.n_vertices = 2;
  swapped.loops = {0, 0};
  swapped.legs = {det(1, LegKind::DetectorPhotonK, TimePin::Zero, 0), src(1),
                  det(0, LegKind::DetectorPhoton, TimePin::Tau, 1), src(0)};
  swapped.edges = {Edge{EdgeKind::Keldysh, 1, 0}, Edge{EdgeKind::Retarded, 0, 1}};
  CHECK(canonical_key(d) == canonical_key(swapped));
  CHECK(canonicalize(d) == canonicalize(swapped));
  CHECK(canonicalize(canonicalize(d)) == canonicalize(d));

  // different detector-time assignment: distinct labeled keys, equal
  // label-stripped keys
  Diagram other = d;
  other.legs[0].pin = TimePin::Tau;
  other.legs[2].pin = TimePin::Zero;
  CHECK(canonical_key(d) != canonical_key(other));
  const KeyOptions stripped{true, false};
  CHECK(canonical_key(d, stripped) == canonical_key(other, stripped));
}

TEST_CASE("erased Keldysh marks identify exchange partners") {
  // one-vertex <<b+ b>> contractions: the plain/K mark can sit on either
  // detector; the two diagrams differ only by that mark
  Diagram e1;
  e1.n_vertices = 1;
  e1.loops = {0};
  e1.legs = {det(0, LegKind::DetectorPhoton, TimePin::Zero, 0),
             det(0, LegKind::DetectorAntiPhotonK, TimePin::Tau, 1), src(0),
             src_bar(0)};
  Diagram e3;
  e3.n_vertices = 1;
  e3.loops = {0};
  e3.legs = {det(0, LegKind::DetectorPhotonK, TimePin::Zero, 0),
             det(0, LegKind::DetectorAntiPhoton, TimePin::Tau, 1), src(0),
             src_bar(0)};
  CHECK(validate(e1).structure_ok);
  CHECK(validate(e3).structure_ok);
  CHECK(canonical_key(e1) != canonical_key(e3));
  const KeyOptions erased{false, true};
  CHECK(canonical_key(e1, erased) == canonical_key(e3, erased));
}

TEST_CASE("rule 4 flags contradictory parallel orderings") {
  // R makes vertex 0 later, the parallel A makes vertex 1 later
  Diagram d;
  d.n_vertices = 2;
  d.loops = {0, 0};
  d.legs = {det(0, LegKind::DetectorPhotonK, TimePin::Zero, 0), src_bar(0),
            det(1, LegKind::DetectorAntiPhotonK, TimePin::Tau, 1), src(1)};
  d.edges = {Edge{EdgeKind::Retarded, 0, 1}, Edge{EdgeKind::Advanced, 0, 1}};
  const auto rep = validate(d);
  CHECK(rep.structure_ok);
  CHECK(rep.rule4_zero);
  CHECK(!rep.passes_all(0.0));

  // parallel R and A pointing the same way are compatible
  Diagram ok;
  ok.n_vertices = 2;
  ok.loops = {0, 0};
  ok.legs = {det(0, LegKind::DetectorAntiPhoton, TimePin::Tau, 1), src_bar(0),
             det(1, LegKind::DetectorPhoton, TimePin::Zero, 0), src(1)};
  ok.edges = {Edge{EdgeKind::Retarded, 0, 1}, Edge{EdgeKind::Advanced, 1, 0}};
  CHECK(validate(ok).structure_ok);
  CHECK(!validate(ok).rule4_zero);
}

TEST_CASE("rule 5 flags detector-crowded vertices") {
  // (a) mixed filled/unfilled pair with exactly one quantum endpoint
  Diagram a;
  a.n_vertices = 1;
  a.loops = {0};
  a.legs = {det(0, LegKind::DetectorPhoton, TimePin::Zero, 0),
            det(0, LegKind::DetectorAntiPhotonK, TimePin::Tau, 1), src(0),
            src_bar(0)};
  CHECK(validate(a).rule5_flag);
  CHECK(validate(a).rule5_case == 'a');

  // counterexample: both detectors on quantum slots is not flagged
  Diagram both_dashed;
  both_dashed.n_vertices = 2;
  both_dashed.loops = {0, 0};
  both_dashed.legs = {det(0, LegKind::DetectorPhoton, TimePin::Zero, 0),
                      det(0, LegKind::DetectorAntiPhoton, TimePin::Tau, 1),
                      src(0), src_bar(1), src(1),
                      det(1, LegKind::DetectorPhoton, TimePin::Zero, 2)};
  both_dashed.edges = {Edge{EdgeKind::Retarded, 1, 0}};
  CHECK(validate(both_dashed).structure_ok);
  CHECK(!validate(both_dashed).rule5_flag);

  // (b) two identical detectors among three, one or two quantum endpoints
  Diagram b;
  b.n_vertices = 1;
  b.loops = {0};
  b.legs = {det(0, LegKind::DetectorPhotonK, TimePin::Zero, 0),
            det(0, LegKind::DetectorPhotonK, TimePin::Tau, 1),
            det(0, LegKind::DetectorAntiPhoton, TimePin::Zero, 2), src(0)};
  CHECK(validate(b).structure_ok);
  CHECK(validate(b).rule5_flag);
  CHECK(validate(b).rule5_case == 'b');

  // the all-plain variant has three quantum endpoints and survives
  Diagram plain;
  plain.n_vertices = 1;
  plain.loops = {0};
  plain.legs = {det(0, LegKind::DetectorPhoton, TimePin::Zero, 0),
                det(0, LegKind::DetectorPhoton, TimePin::Tau, 1),
                det(0, LegKind::DetectorAntiPhoton, TimePin::Zero, 2), src(0)};
  CHECK(validate(plain).structure_ok);
  CHECK(!validate(plain).rule5_flag);

  // the all-distinct variant also escapes the flag but loses its vertex
  // doubling in rule-filtered evaluation
  Diagram mixed;
  mixed.n_vertices = 1;
  mixed.loops = {0};
  mixed.legs = {det(0, LegKind::DetectorPhoton, TimePin::Zero, 0),
                det(0, LegKind::DetectorPhotonK, TimePin::Tau, 1),
                det(0, LegKind::DetectorAntiPhotonK, TimePin::Zero, 2), src(0)};
  CHECK(validate(mixed).structure_ok);
  CHECK(!validate(mixed).rule5_flag);
  CHECK(rule_multiplicity(mixed) == 2);
  CHECK(rule_multiplicity_filtered(mixed) == 1);

  // (c) four detectors on one vertex
  Diagram c;
  c.n_vertices = 1;
  c.loops = {0};
  c.legs = {det(0, LegKind::DetectorPhoton, TimePin::Zero, 0),
            det(0, LegKind::DetectorPhoton, TimePin::Tau, 1),
            det(0, LegKind::DetectorAntiPhoton, TimePin::Zero, 2),
            det(0, LegKind::DetectorAntiPhotonK, TimePin::Tau, 3)};
  CHECK(validate(c).structure_ok);
  CHECK(validate(c).rule5_flag);
  CHECK(validate(c).rule5_case == 'c');
}

TEST_CASE("rule 6 flags triple parallel propagators at zero temperature") {
  Diagram d;
  d.n_vertices = 2;
  d.loops = {0, 0};
  d.legs = {det(0, LegKind::DetectorPhoton, TimePin::Zero, 0), src(1)};
  d.edges = {Edge{EdgeKind::Keldysh, 0, 1}, Edge{EdgeKind::Keldysh, 1, 0},
             Edge{EdgeKind::Retarded, 0, 1}};
  const auto rep = validate(d);
  CHECK(rep.structure_ok);
  CHECK(rep.rule6_flag);
  CHECK(!rep.rule4_zero);
  CHECK(!rep.passes_all(0.0));
  CHECK(rep.passes_all(0.25));  // thermal: the family sum is finite
}

TEST_CASE("parallel identical edges multiply the reconnection count") {
  // two Keldysh propagators with the same orientation between two vertices
  Diagram d;
  d.n_vertices = 2;
  d.loops = {0, 0};
  d.legs = {det(0, LegKind::DetectorPhoton, TimePin::Zero, 0), src_bar(0),
            det(1, LegKind::DetectorAntiPhoton, TimePin::Tau, 1), src(1)};
  d.edges = {Edge{EdgeKind::Keldysh, 0, 1}, Edge{EdgeKind::Keldysh, 0, 1}};
  CHECK(validate(d).structure_ok);
  // vertex factors: both vertices carry a duplicated Keldysh attachment -> 1
  // parallel Keldysh pair: 2!; two integration variables: 2!
  CHECK(rule_multiplicity(d) == 4);
}

TEST_CASE("photon/anti-photon conjugation preserves validity and counts") {
  for (const Diagram& d :
       {mean_output_tree(), mean_output_loop(), double_detector_kr()}) {
    const Diagram c = conjugated_diagram(d);
    CHECK(validate(c).structure_ok);
    CHECK(validate(c).rule4_zero == validate(d).rule4_zero);
    CHECK(validate(c).rule5_flag == validate(d).rule5_flag);
    CHECK(rule_multiplicity(c) == rule_multiplicity(d));
    CHECK(conjugated_diagram(c) == d);
  }
  // the conjugate of an asymmetric diagram is a genuinely different picture
  CHECK(canonical_key(conjugated_diagram(double_detector_kr())) !=
        canonical_key(double_detector_kr()));
}

TEST_CASE("renderings mention every element") {
  const Diagram d = double_detector_kr();
  const std::string text = render_text(d);
  CHECK(text.find("DetectorPhotonK") != std::string::npos);
  CHECK(text.find("retarded") != std::string::npos);
  const std::string dot = render_dot(d);
  CHECK(dot.rfind("digraph", 0) == 0);
  CHECK(dot.find("label=\"K\"") != std::string::npos);
  CHECK(dot.find("label=\"R\"") != std::string::npos);
  const std::string loop_dot = render_dot(mean_output_loop());
  CHECK(loop_dot.find("loop") != std::string::npos);
}

TEST_CASE("json round-trip is lossless") {
  for (const Diagram& d :
       {mean_output_tree(), mean_output_loop(), double_detector_kr()}) {
    const auto j = diagram_to_json(d);
    CHECK(diagram_from_json(j) == d);
    CHECK(j.dump() == diagram_to_json(diagram_from_json(j)).dump());
  }
  nlohmann::json bad = {{"n_vertices", 1}, {"loops", {0}}};
  CHECK_THROWS_AS(diagram_from_json(bad), Error);
}
