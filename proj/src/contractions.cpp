#include "kerrio/contractions.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <utility>

namespace kerrio {

namespace {

// Field flavor of one vertex slot. Unbarred flavors are outgoing, barred
// incoming; q-flavored slots carry the dashed (quantum) index.
enum class Flavor { Cl, Clbar, Q, Qbar };

// The quartic interaction splits into four monomials on the closed contour.
// Slot order within a monomial is fixed; Wick terms that differ only by which
// same-flavor slot they use are distinct labeled terms on purpose.
constexpr std::array<std::array<Flavor, 4>, 4> kMonomials = {{
    {Flavor::Clbar, Flavor::Cl, Flavor::Qbar, Flavor::Cl},
    {Flavor::Clbar, Flavor::Cl, Flavor::Clbar, Flavor::Q},
    {Flavor::Qbar, Flavor::Q, Flavor::Qbar, Flavor::Cl},
    {Flavor::Qbar, Flavor::Q, Flavor::Clbar, Flavor::Q},
}};

struct SlotState {
  int mode = 0;  // 0 open, 1 leg, 2 paired
  LegKind leg = LegKind::SourcePhoton;
  int det_label = -1;
  int partner = -1;
};

// Detector leg kind accepted by a slot flavor, if any. Plain detectors sit on
// the dashed slots, their K-marked partners on the classical ones.
bool detector_leg_for(Flavor f, bool dagger, LegKind* kind) {
  if (!dagger) {
    if (f == Flavor::Qbar) return *kind = LegKind::DetectorPhoton, true;
    if (f == Flavor::Clbar) return *kind = LegKind::DetectorPhotonK, true;
    return false;
  }
  if (f == Flavor::Q) return *kind = LegKind::DetectorAntiPhoton, true;
  if (f == Flavor::Cl) return *kind = LegKind::DetectorAntiPhotonK, true;
  return false;
}

struct Enumerator {
  const CumulantRequest* req = nullptr;
  int n = 0;
  std::vector<Flavor> flavor;
  std::vector<SlotState> slot;
  unsigned used_detectors = 0;
  std::vector<ContractionTerm>* out = nullptr;

  void fill(int s) {
    const int total = 4 * n;
    if (s == total) {
      if (used_detectors == (1u << req->detectors.size()) - 1u) emit();
      return;
    }
    if (slot[s].mode != 0) {
      fill(s + 1);
      return;
    }
    const Flavor f = flavor[s];

    for (std::size_t i = 0; i < req->detectors.size(); ++i) {
      if (used_detectors & (1u << i)) continue;
      LegKind kind;
      if (!detector_leg_for(f, req->detectors[i].dagger, &kind)) continue;
      slot[s] = {1, kind, static_cast<int>(i), -1};
      used_detectors |= 1u << i;
      fill(s + 1);
      used_detectors &= ~(1u << i);
      slot[s] = SlotState{};
    }

    if (f == Flavor::Cl || f == Flavor::Clbar) {
      slot[s] = {1, f == Flavor::Cl ? LegKind::SourcePhoton : LegKind::SourceAntiPhoton, -1, -1};
      fill(s + 1);
      slot[s] = SlotState{};
    }

    for (int w = s + 1; w < total; ++w) {
      if (slot[w].mode != 0) continue;
      if (!pairable(s, w)) continue;
      slot[s] = {2, LegKind::SourcePhoton, -1, w};
      slot[w] = {2, LegKind::SourcePhoton, -1, s};
      fill(s + 1);
      slot[s] = SlotState{};
      slot[w] = SlotState{};
    }
  }

  // Contraction legality. The classical pair closes anywhere (same vertex
  // gives the equal-time loop); mixed pairs close only across vertices, with
  // the equal-time piece already absorbed into the loop constant.
  bool pairable(int s, int w) const {
    const Flavor a = flavor[s];
    const Flavor b = flavor[w];
    const bool same_vertex = s / 4 == w / 4;
    const auto is = [&](Flavor x, Flavor y) {
      return (a == x && b == y) || (a == y && b == x);
    };
    if (is(Flavor::Cl, Flavor::Clbar)) return true;
    if (is(Flavor::Cl, Flavor::Qbar)) return !same_vertex;
    if (is(Flavor::Q, Flavor::Clbar)) return !same_vertex;
    return false;
  }

  void emit() {
    Diagram d;
    d.n_vertices = n;
    d.loops.assign(n, 0);
    for (int s = 0; s < 4 * n; ++s) {
      const SlotState& st = slot[s];
      const int v = s / 4;
      if (st.mode == 1) {
        TimePin pin = TimePin::Zero;
        if (st.det_label >= 0) pin = req->detectors[st.det_label].pin;
        d.legs.push_back({v, st.leg, pin, st.det_label});
        continue;
      }
      const int w = st.partner;
      if (w < s) continue;  // emitted from the lower end
      const int u = w / 4;
      const Flavor a = flavor[s];
      const Flavor b = flavor[w];
      if ((a == Flavor::Cl && b == Flavor::Clbar) || (a == Flavor::Clbar && b == Flavor::Cl)) {
        const int cl_v = a == Flavor::Cl ? v : u;
        const int bar_v = a == Flavor::Cl ? u : v;
        if (v == u) {
          d.loops[v] += 1;
        } else {
          d.edges.push_back({EdgeKind::Keldysh, cl_v, bar_v});
        }
      } else if ((a == Flavor::Cl && b == Flavor::Qbar) || (a == Flavor::Qbar && b == Flavor::Cl)) {
        const int cl_v = a == Flavor::Cl ? v : u;
        const int qbar_v = a == Flavor::Cl ? u : v;
        d.edges.push_back({EdgeKind::Retarded, cl_v, qbar_v});
      } else {
        const int q_v = a == Flavor::Q ? v : u;
        const int bar_v = a == Flavor::Q ? u : v;
        d.edges.push_back({EdgeKind::Advanced, q_v, bar_v});
      }
    }
    out->push_back({std::move(d)});
  }
};

}  // namespace

std::vector<ContractionTerm> expand_cumulant(const CumulantRequest& req) {
  if (req.order < 0) {
    throw Error(ErrorKind::InvalidParameter, "cumulant order must be non-negative");
  }
  if (req.detectors.size() > 8) {
    throw Error(ErrorKind::InvalidParameter, "at most 8 detector operators are supported");
  }
  if (req.order == 0) return {};
  if (req.order > 4) {
    char msg[96];
    std::snprintf(msg, sizeof(msg), "contraction enumeration supports orders up to 4, got %d",
                  req.order);
    throw Error(ErrorKind::Capability, msg);
  }

  const int n = req.order;
  std::vector<ContractionTerm> terms;
  Enumerator en;
  en.req = &req;
  en.n = n;
  en.out = &terms;
  en.slot.assign(4 * n, SlotState{});
  en.flavor.resize(4 * n);

  std::vector<int> mono(n, 0);
  while (true) {
    for (int v = 0; v < n; ++v) {
      for (int s = 0; s < 4; ++s) en.flavor[4 * v + s] = kMonomials[mono[v]][s];
    }
    en.fill(0);
    int v = n - 1;
    while (v >= 0 && mono[v] == 3) mono[v--] = 0;
    if (v < 0) break;
    mono[v] += 1;
  }
  return terms;
}

void connected_filter(std::vector<ContractionTerm>& terms) {
  auto connected = [](const Diagram& d, int n_detectors) {
    const int nodes = d.n_vertices + n_detectors;
    std::vector<int> parent(nodes);
    for (int i = 0; i < nodes; ++i) parent[i] = i;
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
    for (const Edge& e : d.edges) unite(e.a, e.b);
    for (const Leg& leg : d.legs) {
      if (leg.label >= 0) unite(leg.vertex, d.n_vertices + leg.label);
    }
    const int root = find(0);
    for (int i = 1; i < nodes; ++i) {
      if (find(i) != root) return false;
    }
    return true;
  };

  std::erase_if(terms, [&](const ContractionTerm& t) {
    int n_detectors = 0;
    for (const Leg& leg : t.diagram.legs) n_detectors = std::max(n_detectors, leg.label + 1);
    return !connected(t.diagram, n_detectors);
  });
}

std::vector<DiagramGroup> group_terms(const std::vector<ContractionTerm>& terms) {
  std::map<std::string, DiagramGroup> by_label;
  for (const ContractionTerm& t : terms) {
    std::string key = canonical_key(t.diagram);
    DiagramGroup& g = by_label[key];
    if (g.labeled_count == 0) {
      g.rep = canonicalize(t.diagram);
      g.labeled_key = key;
      g.stripped_key = canonical_key(t.diagram, {/*strip_detector_labels=*/true});
    }
    g.labeled_count += 1;
  }

  std::map<std::string, long> stripped_totals;
  for (const auto& [key, g] : by_label) stripped_totals[g.stripped_key] += g.labeled_count;

  std::vector<DiagramGroup> groups;
  groups.reserve(by_label.size());
  for (auto& [key, g] : by_label) {
    g.stripped_count = stripped_totals[g.stripped_key];
    groups.push_back(std::move(g));
  }
  return groups;
}

ExpProduct to_integrand(const Diagram& d, const PropagatorContext& ctx) {
  ExpProduct prod;
  prod.n_vars = d.n_vertices;
  const double hk = std::sqrt(ctx.params.kappa / 2.0);
  const double weight = ctx.params.thermal_weight();
  const cplx phi = source_photon_mean(ctx);
  cplx constant = 1.0;

  for (const Leg& leg : d.legs) {
    const int pin_node = leg.pin == TimePin::Zero ? kPinZero : kPinTau;
    switch (leg.kind) {
      case LegKind::SourcePhoton:
        constant *= phi;
        break;
      case LegKind::SourceAntiPhoton:
        constant *= std::conj(phi);
        break;
      case LegKind::DetectorPhoton:
        constant *= hk;
        prod.factors.push_back({Rate{-1, +1}, pin_node, leg.vertex});
        break;
      case LegKind::DetectorAntiPhoton:
        constant *= -hk;
        prod.factors.push_back({Rate{-1, -1}, pin_node, leg.vertex});
        break;
      case LegKind::DetectorPhotonK:
        constant *= weight * hk;
        prod.factors.push_back({Rate{-1, +1}, pin_node, leg.vertex});
        break;
      case LegKind::DetectorAntiPhotonK:
        constant *= weight * hk;  // (-F) times the anti-photon constant -sqrt(kappa/2)
        prod.factors.push_back({Rate{-1, -1}, pin_node, leg.vertex});
        break;
    }
  }

  for (const Edge& e : d.edges) {
    switch (e.kind) {
      case EdgeKind::Retarded:
        prod.factors.push_back({Rate{-1, +1}, e.a, e.b});
        break;
      case EdgeKind::Advanced:
        constant *= -1.0;
        prod.factors.push_back({Rate{-1, -1}, e.b, e.a});
        break;
      case EdgeKind::Keldysh:
        constant *= weight;
        prod.k_factors.push_back({e.a, e.b});
        break;
    }
  }

  for (int v = 0; v < d.n_vertices; ++v) {
    for (int l = 0; l < d.loops[v]; ++l) constant *= 2.0 * ctx.params.n_b;
  }

  prod.constant = constant;
  return prod;
}

}  // namespace kerrio
