#include "kerrio/diagrams.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace kerrio {

namespace {

long factorial(long n) {
  long r = 1;
  for (long i = 2; i <= n; ++i) r *= i;
  return r;
}

const char* edge_kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::Retarded: return "retarded";
    case EdgeKind::Advanced: return "advanced";
    case EdgeKind::Keldysh: return "keldysh";
  }
  return "?";
}

EdgeKind edge_kind_from_name(const std::string& s) {
  if (s == "retarded") return EdgeKind::Retarded;
  if (s == "advanced") return EdgeKind::Advanced;
  if (s == "keldysh") return EdgeKind::Keldysh;
  throw Error(ErrorKind::Schema, "unknown edge kind '" + s + "'");
}

LegKind leg_kind_from_name(const std::string& s) {
  for (LegKind k :
       {LegKind::SourcePhoton, LegKind::SourceAntiPhoton, LegKind::DetectorPhoton,
        LegKind::DetectorAntiPhoton, LegKind::DetectorPhotonK,
        LegKind::DetectorAntiPhotonK}) {
    if (s == leg_name(k)) return k;
  }
  throw Error(ErrorKind::Schema, "unknown leg kind '" + s + "'");
}

Leg transformed_leg(Leg leg, const KeyOptions& opts) {
  if (is_detector(leg.kind)) {
    if (opts.erase_keldysh_marks) {
      if (leg.kind == LegKind::DetectorPhotonK) leg.kind = LegKind::DetectorPhoton;
      if (leg.kind == LegKind::DetectorAntiPhotonK)
        leg.kind = LegKind::DetectorAntiPhoton;
    }
    if (opts.strip_detector_labels) {
      leg.label = -1;
      leg.pin = TimePin::Zero;
    }
  }
  return leg;
}

// Serialization of the diagram under a vertex relabeling, as a plain int
// sequence; lexicographic comparison of these strings defines the canonical
// representative.
std::string serialized(const Diagram& d, const std::vector<int>& perm,
                       const KeyOptions& opts) {
  std::vector<Edge> edges = d.edges;
  for (Edge& e : edges) {
    e.a = perm[static_cast<size_t>(e.a)];
    e.b = perm[static_cast<size_t>(e.b)];
  }
  std::sort(edges.begin(), edges.end());
  std::vector<Leg> legs;
  legs.reserve(d.legs.size());
  for (Leg leg : d.legs) {
    leg.vertex = perm[static_cast<size_t>(leg.vertex)];
    legs.push_back(transformed_leg(leg, opts));
  }
  std::sort(legs.begin(), legs.end());
  std::vector<int> loops(d.loops.size(), 0);
  for (size_t v = 0; v < d.loops.size(); ++v) {
    loops[static_cast<size_t>(perm[v])] = d.loops[v];
  }

  std::ostringstream out;
  out << d.n_vertices << '|';
  for (int c : loops) out << c << ',';
  out << '|';
  for (const Edge& e : edges) {
    out << static_cast<int>(e.kind) << ':' << e.a << ':' << e.b << ';';
  }
  out << '|';
  for (const Leg& l : legs) {
    out << l.vertex << ':' << static_cast<int>(l.kind) << ':'
        << static_cast<int>(l.pin) << ':' << l.label << ';';
  }
  return out.str();
}

void check_shape(const Diagram& d) {
  if (d.n_vertices < 0 ||
      d.loops.size() != static_cast<size_t>(d.n_vertices)) {
    throw Error(ErrorKind::InvalidParameter,
                "diagram loop vector size must equal n_vertices");
  }
  for (const Edge& e : d.edges) {
    if (e.a < 0 || e.a >= d.n_vertices || e.b < 0 || e.b >= d.n_vertices) {
      throw Error(ErrorKind::InvalidParameter, "edge endpoint out of range");
    }
  }
  for (const Leg& l : d.legs) {
    if (l.vertex < 0 || l.vertex >= d.n_vertices) {
      throw Error(ErrorKind::InvalidParameter, "leg vertex out of range");
    }
  }
}

// One attachment slot at a vertex, reconstructed from edges, legs and loops.
struct Attachment {
  // identity for the pairwise-distinctness test of the multiplicity rule;
  // detector legs keep their label and pin, so two detectors of the same
  // kind still count as distinguishable attachments
  std::array<int, 4> id;
  bool outgoing = false;  // unbarred field slot
  bool dashed = false;    // quantum field slot
};

struct VertexSlots {
  std::vector<Attachment> at;
  int detectors = 0;
  int dashed_detectors = 0;
  int photon_detectors = 0;  // empty symbols (b side)
  int anti_detectors = 0;    // filled symbols (b+ side)
  std::vector<LegKind> detector_kinds;
};

std::vector<VertexSlots> vertex_slots(const Diagram& d) {
  std::vector<VertexSlots> vs(static_cast<size_t>(d.n_vertices));
  for (const Edge& e : d.edges) {
    // Endpoint flavors by kind; see the header comment for the conventions.
    bool a_dashed = false, b_dashed = false;
    bool a_out = true, b_out = false;  // a is the unbarred end for all kinds
    switch (e.kind) {
      case EdgeKind::Retarded: b_dashed = true; break;
      case EdgeKind::Advanced: a_dashed = true; break;
      case EdgeKind::Keldysh: break;
    }
    vs[static_cast<size_t>(e.a)].at.push_back(
        {{0, static_cast<int>(e.kind), 0, e.b}, a_out, a_dashed});
    vs[static_cast<size_t>(e.b)].at.push_back(
        {{0, static_cast<int>(e.kind), 1, e.a}, b_out, b_dashed});
  }
  for (const Leg& l : d.legs) {
    VertexSlots& v = vs[static_cast<size_t>(l.vertex)];
    bool out = false, dashed = false;
    switch (l.kind) {
      case LegKind::SourcePhoton: out = true; break;
      case LegKind::SourceAntiPhoton: break;
      case LegKind::DetectorPhoton: dashed = true; break;
      case LegKind::DetectorAntiPhoton: out = true; dashed = true; break;
      case LegKind::DetectorPhotonK: break;
      case LegKind::DetectorAntiPhotonK: out = true; break;
    }
    v.at.push_back({{1, static_cast<int>(l.kind), l.label, static_cast<int>(l.pin)}, out, dashed});
    if (is_detector(l.kind)) {
      v.detectors += 1;
      v.detector_kinds.push_back(l.kind);
      if (dashed) v.dashed_detectors += 1;
      if (is_anti(l.kind)) {
        v.anti_detectors += 1;
      } else {
        v.photon_detectors += 1;
      }
    }
  }
  for (int v = 0; v < d.n_vertices; ++v) {
    for (int i = 0; i < d.loops[static_cast<size_t>(v)]; ++i) {
      // Each loop fills one classical outgoing and one classical incoming
      // slot; the two ends of one loop are distinguishable attachments.
      vs[static_cast<size_t>(v)].at.push_back({{2, i, 0, 0}, true, false});
      vs[static_cast<size_t>(v)].at.push_back({{2, i, 1, 0}, false, false});
    }
  }
  return vs;
}

long multiplicity_impl(const Diagram& d, bool cap_detector_vertices) {
  check_shape(d);
  long m = 1;
  for (const VertexSlots& v : vertex_slots(d)) {
    bool distinct = v.at.size() == 4;
    for (size_t i = 0; i < v.at.size() && distinct; ++i) {
      for (size_t j = i + 1; j < v.at.size(); ++j) {
        if (v.at[i].id == v.at[j].id) {
          distinct = false;
          break;
        }
      }
    }
    if (distinct && !(cap_detector_vertices && v.detectors >= 3)) m *= 2;
  }
  m *= factorial(d.n_vertices);
  std::map<std::tuple<EdgeKind, int, int>, long> parallel;
  for (const Edge& e : d.edges) parallel[{e.kind, e.a, e.b}] += 1;
  for (const auto& [key, count] : parallel) m *= factorial(count);
  return m;
}

}  // namespace

std::string canonical_key(const Diagram& d, KeyOptions opts) {
  check_shape(d);
  std::vector<int> perm(static_cast<size_t>(d.n_vertices));
  std::iota(perm.begin(), perm.end(), 0);
  std::string best;
  do {
    std::string s = serialized(d, perm, opts);
    if (best.empty() || s < best) best = std::move(s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (best.empty()) best = serialized(d, perm, opts);
  return best;
}

Diagram canonicalize(const Diagram& d) {
  check_shape(d);
  std::vector<int> perm(static_cast<size_t>(d.n_vertices));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best_perm = perm;
  std::string best;
  do {
    std::string s = serialized(d, perm, KeyOptions{});
    if (best.empty() || s < best) {
      best = std::move(s);
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  Diagram out;
  out.n_vertices = d.n_vertices;
  out.loops.assign(static_cast<size_t>(d.n_vertices), 0);
  for (size_t v = 0; v < d.loops.size(); ++v) {
    out.loops[static_cast<size_t>(best_perm[v])] = d.loops[v];
  }
  out.edges = d.edges;
  for (Edge& e : out.edges) {
    e.a = best_perm[static_cast<size_t>(e.a)];
    e.b = best_perm[static_cast<size_t>(e.b)];
  }
  std::sort(out.edges.begin(), out.edges.end());
  out.legs = d.legs;
  for (Leg& l : out.legs) l.vertex = best_perm[static_cast<size_t>(l.vertex)];
  std::sort(out.legs.begin(), out.legs.end());
  return out;
}

Diagram conjugated_diagram(const Diagram& d) {
  Diagram out = d;
  for (Edge& e : out.edges) {
    switch (e.kind) {
      case EdgeKind::Retarded:
        e.kind = EdgeKind::Advanced;
        std::swap(e.a, e.b);
        break;
      case EdgeKind::Advanced:
        e.kind = EdgeKind::Retarded;
        std::swap(e.a, e.b);
        break;
      case EdgeKind::Keldysh:
        std::swap(e.a, e.b);
        break;
    }
  }
  for (Leg& l : out.legs) {
    switch (l.kind) {
      case LegKind::SourcePhoton: l.kind = LegKind::SourceAntiPhoton; break;
      case LegKind::SourceAntiPhoton: l.kind = LegKind::SourcePhoton; break;
      case LegKind::DetectorPhoton: l.kind = LegKind::DetectorAntiPhoton; break;
      case LegKind::DetectorAntiPhoton: l.kind = LegKind::DetectorPhoton; break;
      case LegKind::DetectorPhotonK:
        l.kind = LegKind::DetectorAntiPhotonK;
        break;
      case LegKind::DetectorAntiPhotonK:
        l.kind = LegKind::DetectorPhotonK;
        break;
    }
  }
  return out;
}

ValidationReport validate(const Diagram& d) {
  ValidationReport rep;
  check_shape(d);
  for (const Edge& e : d.edges) {
    if (e.a == e.b) {
      rep.structure_msg = "self edges are not allowed; equal-time classical "
                          "contractions belong in the loop counts";
      return rep;
    }
  }
  const std::vector<VertexSlots> vs = vertex_slots(d);
  for (int v = 0; v < d.n_vertices; ++v) {
    const VertexSlots& s = vs[static_cast<size_t>(v)];
    char buf[160];
    if (s.at.size() != 4) {
      std::snprintf(buf, sizeof buf,
                    "vertex %d has %zu attachments, expected 4", v,
                    s.at.size());
      rep.structure_msg = buf;
      return rep;
    }
    int out = 0, dashed = 0;
    for (const Attachment& a : s.at) {
      out += a.outgoing ? 1 : 0;
      dashed += a.dashed ? 1 : 0;
    }
    if (out != 2) {
      std::snprintf(buf, sizeof buf,
                    "vertex %d has %d outgoing slots, expected 2", v, out);
      rep.structure_msg = buf;
      return rep;
    }
    if (dashed != 1 && dashed != 3) {
      std::snprintf(buf, sizeof buf,
                    "vertex %d has %d quantum slots, expected 1 or 3", v,
                    dashed);
      rep.structure_msg = buf;
      return rep;
    }
  }
  rep.structure_ok = true;

  // Rule 4: parallel propagators whose step functions demand contradictory
  // time orderings.
  std::map<std::pair<int, int>, std::array<bool, 2>> order;  // (lo,hi) seen
  std::map<std::pair<int, int>, int> parallel_count;
  for (const Edge& e : d.edges) {
    std::pair<int, int> key{std::min(e.a, e.b), std::max(e.a, e.b)};
    parallel_count[key] += 1;
    int later = -1;
    if (e.kind == EdgeKind::Retarded) later = e.a;
    if (e.kind == EdgeKind::Advanced) later = e.b;
    if (later >= 0) order[key][later == key.first ? 0 : 1] = true;
  }
  for (const auto& [key, seen] : order) {
    if (seen[0] && seen[1]) rep.rule4_zero = true;
  }
  for (const auto& [key, count] : parallel_count) {
    if (count >= 3) rep.rule6_flag = true;
  }

  // Rule 5: detector-crowded vertices whose contributions only survive in
  // cancellation families.
  for (const VertexSlots& s : vs) {
    if (s.detectors == 2 && s.photon_detectors == 1 && s.anti_detectors == 1 &&
        s.dashed_detectors == 1) {
      rep.rule5_flag = true;
      rep.rule5_case = 'a';
    }
    if (s.detectors == 3 &&
        (s.dashed_detectors == 1 || s.dashed_detectors == 2)) {
      std::vector<LegKind> k = s.detector_kinds;
      std::sort(k.begin(), k.end());
      if (k[0] == k[1] || k[1] == k[2]) {
        rep.rule5_flag = true;
        rep.rule5_case = 'b';
      }
    }
    if (s.detectors == 4) {
      rep.rule5_flag = true;
      rep.rule5_case = 'c';
    }
  }
  return rep;
}

long rule_multiplicity(const Diagram& d) { return multiplicity_impl(d, false); }

long rule_multiplicity_filtered(const Diagram& d) {
  return multiplicity_impl(d, true);
}

std::string render_text(const Diagram& d) {
  std::ostringstream out;
  out << d.n_vertices << " vertices\n";
  for (const Leg& l : d.legs) {
    out << "  leg  v" << l.vertex << ' ' << leg_name(l.kind);
    if (is_detector(l.kind)) {
      out << " @" << (l.pin == TimePin::Tau ? "tau" : "0");
      if (l.label >= 0) out << " #" << l.label;
    }
    out << '\n';
  }
  for (const Edge& e : d.edges) {
    out << "  edge " << edge_kind_name(e.kind) << " v" << e.a << " -> v" << e.b
        << '\n';
  }
  for (int v = 0; v < d.n_vertices; ++v) {
    for (int i = 0; i < d.loops[static_cast<size_t>(v)]; ++i) {
      out << "  loop v" << v << '\n';
    }
  }
  return out.str();
}

std::string render_dot(const Diagram& d) {
  std::ostringstream out;
  out << "digraph contraction {\n  rankdir=LR;\n";
  for (int v = 0; v < d.n_vertices; ++v) {
    out << "  v" << v << " [shape=point, width=0.12, label=\"\"];\n";
  }
  int ext = 0;
  for (const Leg& l : d.legs) {
    std::string node = "x" + std::to_string(ext++);
    if (is_detector(l.kind)) {
      out << "  " << node << " [shape=circle, width=0.18, label=\""
          << (l.pin == TimePin::Tau ? "tau" : "0") << "\""
          << (is_anti(l.kind) ? ", style=filled, fillcolor=black, fontcolor=white"
                              : "")
          << "];\n";
      out << "  v" << l.vertex << " -> " << node
          << (is_keldysh_detector(l.kind) ? " [label=\"K\"]" : "") << ";\n";
    } else {
      out << "  " << node << " [shape=square, width=0.12, label=\"\""
          << (is_anti(l.kind) ? "" : ", style=filled, fillcolor=black") << "];\n";
      out << "  " << node << " -> v" << l.vertex << ";\n";
    }
  }
  for (const Edge& e : d.edges) {
    // Drawn from the barred (creation) end to the unbarred end.
    const char* style = e.kind == EdgeKind::Keldysh ? "bold" : "solid";
    out << "  v" << e.b << " -> v" << e.a << " [label=\""
        << (e.kind == EdgeKind::Retarded
                ? "R"
                : (e.kind == EdgeKind::Advanced ? "A" : "K"))
        << "\", style=" << style << "];\n";
  }
  for (int v = 0; v < d.n_vertices; ++v) {
    for (int i = 0; i < d.loops[static_cast<size_t>(v)]; ++i) {
      out << "  v" << v << " -> v" << v << " [label=\"loop\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

nlohmann::ordered_json diagram_to_json(const Diagram& d) {
  nlohmann::ordered_json j;
  j["n_vertices"] = d.n_vertices;
  j["loops"] = d.loops;
  j["edges"] = nlohmann::ordered_json::array();
  for (const Edge& e : d.edges) {
    j["edges"].push_back({{"kind", edge_kind_name(e.kind)},
                          {"a", e.a},
                          {"b", e.b}});
  }
  j["legs"] = nlohmann::ordered_json::array();
  for (const Leg& l : d.legs) {
    nlohmann::ordered_json lj;
    lj["vertex"] = l.vertex;
    lj["kind"] = leg_name(l.kind);
    if (is_detector(l.kind)) {
      lj["pin"] = l.pin == TimePin::Tau ? "tau" : "0";
      lj["label"] = l.label;
    }
    j["legs"].push_back(lj);
  }
  return j;
}

Diagram diagram_from_json(const nlohmann::json& j) {
  Diagram d;
  try {
    d.n_vertices = j.at("n_vertices").get<int>();
    d.loops = j.at("loops").get<std::vector<int>>();
    for (const auto& ej : j.at("edges")) {
      d.edges.push_back(Edge{edge_kind_from_name(ej.at("kind").get<std::string>()),
                             ej.at("a").get<int>(), ej.at("b").get<int>()});
    }
    for (const auto& lj : j.at("legs")) {
      Leg l;
      l.vertex = lj.at("vertex").get<int>();
      l.kind = leg_kind_from_name(lj.at("kind").get<std::string>());
      if (is_detector(l.kind)) {
        l.pin = lj.at("pin").get<std::string>() == "tau" ? TimePin::Tau
                                                         : TimePin::Zero;
        l.label = lj.at("label").get<int>();
      }
      d.legs.push_back(l);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema,
                std::string("malformed diagram json: ") + e.what());
  }
  check_shape(d);
  return d;
}

}  // namespace kerrio
