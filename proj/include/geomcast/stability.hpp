#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "geomcast/geometry.hpp"
#include "geomcast/overlay.hpp"

namespace geomcast {

struct StabilityConfig {
  int time_coord_index = 1;  // I, 1-based

  void validate(int d) const {
    if (time_coord_index < 1 || time_coord_index > d)
      throw error("StabilityConfig: time_coord_index out of range");
  }
};

// Replaces coordinate I of every peer with its lifetime mapped affinely
// (order-preserving) into [0, vmax]. Other coordinates are untouched.
inline void embed_lifetimes(std::vector<Peer>& peers, const StabilityConfig& cfg,
                            const SpaceSpec& spec) {
  spec.validate();
  cfg.validate(spec.d);
  if (peers.empty()) return;
  double lo = kInf, hi = -kInf;
  std::set<double> seen;
  for (const auto& p : peers) {
    if (!p.lifetime) throw error("embed_lifetimes: peer " + std::to_string(p.id) + " has no lifetime");
    if (!seen.insert(*p.lifetime).second) throw error("embed_lifetimes: duplicate lifetime");
    lo = std::min(lo, *p.lifetime);
    hi = std::max(hi, *p.lifetime);
  }
  const auto di = static_cast<std::size_t>(cfg.time_coord_index - 1);
  const double span = hi - lo;
  for (auto& p : peers)
    p.coord[di] = span > 0.0 ? (*p.lifetime - lo) / span * spec.vmax : spec.vmax / 2.0;
}

// The neighbour with maximum lifetime, if that maximum exceeds T(P).
inline const Peer* preferred_neighbor(const Peer& p,
                                      const std::vector<const Peer*>& neighbours) {
  if (!p.lifetime) throw error("preferred_neighbor: peer has no lifetime");
  const Peer* best = nullptr;
  for (const Peer* q : neighbours) {
    if (!q->lifetime) throw error("preferred_neighbor: neighbour has no lifetime");
    if (*q->lifetime <= *p.lifetime) continue;
    if (!best || *q->lifetime > *best->lifetime ||
        (*q->lifetime == *best->lifetime && q->id < best->id))
      best = q;
  }
  return best;
}

struct StabilityTree {
  std::map<PeerId, std::optional<PeerId>> preferred;
  std::vector<PeerId> root_candidates;  // peers with no preferred neighbour
  bool is_single_tree = false;
  std::vector<std::size_t> component_sizes;  // per connected component

  std::map<PeerId, std::vector<PeerId>> children() const {
    std::map<PeerId, std::vector<PeerId>> ch;
    for (const auto& [c, p] : preferred)
      if (p) ch[*p].push_back(c);
    return ch;
  }
};

// Preferred edges over each peer's out-neighbours. Edges strictly increase
// lifetime, so the result is a forest; single-tree iff exactly one root and
// one connected component.
inline StabilityTree build_stability_tree(const Topology& topo) {
  StabilityTree tree;
  const auto n = static_cast<std::uint32_t>(topo.size());
  std::vector<const Peer*> nbrs;
  for (std::uint32_t i = 0; i < n; ++i) {
    const Peer& p = topo.peer(i);
    nbrs.clear();
    for (auto j : topo.out(i)) nbrs.push_back(&topo.peer(j));
    const Peer* q = preferred_neighbor(p, nbrs);
    tree.preferred[p.id] = q ? std::optional<PeerId>(q->id) : std::nullopt;
    if (!q) tree.root_candidates.push_back(p.id);
  }

  // Component sizes over undirected preferred edges.
  std::map<PeerId, std::vector<PeerId>> adj;
  for (const auto& [c, p] : tree.preferred) {
    adj[c];
    if (p) {
      adj[c].push_back(*p);
      adj[*p].push_back(c);
    }
  }
  std::set<PeerId> visited;
  for (const auto& [start, nb] : adj) {
    if (visited.count(start)) continue;
    std::size_t count = 0;
    std::deque<PeerId> queue{start};
    visited.insert(start);
    while (!queue.empty()) {
      const PeerId u = queue.front();
      queue.pop_front();
      ++count;
      for (PeerId v : adj[u])
        if (visited.insert(v).second) queue.push_back(v);
    }
    tree.component_sizes.push_back(count);
  }
  tree.is_single_tree =
      tree.root_candidates.size() == 1 && tree.component_sizes.size() == 1;
  return tree;
}

struct MonotoneReport {
  bool pass = true;
  std::vector<std::pair<PeerId, PeerId>> violations;  // (parent, child)
  int max_degree = 0;
  int diameter_hops = 0;
};

// Checks strict lifetime decrease along every parent->child edge (preferred
// edges point child -> parent) and reports tree degree and diameter.
inline MonotoneReport verify_monotone(const StabilityTree& tree,
                                      std::span<const Peer> peers) {
  MonotoneReport report;
  std::map<PeerId, const Peer*> by_id;
  for (const Peer& p : peers) by_id[p.id] = &p;

  std::map<PeerId, std::vector<PeerId>> adj;
  for (const auto& [child, parent] : tree.preferred) {
    adj[child];
    if (!parent) continue;
    adj[child].push_back(*parent);
    adj[*parent].push_back(child);
    const Peer* c = by_id.at(child);
    const Peer* p = by_id.at(*parent);
    if (!(*p->lifetime > *c->lifetime)) {
      report.pass = false;
      report.violations.emplace_back(*parent, child);
    }
  }

  for (const auto& [id, nbrs] : adj)
    report.max_degree = std::max(report.max_degree, static_cast<int>(nbrs.size()));

  // Diameter by double traversal; on a forest, over the largest reach.
  if (!adj.empty()) {
    auto bfs = [&](PeerId src) {
      std::map<PeerId, int> dist;
      dist[src] = 0;
      std::deque<PeerId> queue{src};
      PeerId far = src;
      while (!queue.empty()) {
        const PeerId u = queue.front();
        queue.pop_front();
        for (PeerId v : adj[u])
          if (!dist.count(v)) {
            dist[v] = dist[u] + 1;
            if (dist[v] > dist[far]) far = v;
            queue.push_back(v);
          }
      }
      return std::pair<PeerId, int>{far, dist[far]};
    };
    for (const auto& [start, nb] : adj) {
      (void)nb;
      auto [far, d1] = bfs(start);
      auto [end, d2] = bfs(far);
      (void)end;
      report.diameter_hops = std::max(report.diameter_hops, d2);
      if (tree.is_single_tree) break;  // one component is enough
    }
  }
  return report;
}

struct DepartureReport {
  bool all_departures_were_leaves = true;
  int disconnections = 0;
  std::vector<PeerId> non_leaf_departures;
};

// Removes peers in increasing lifetime order, checking that every departing
// peer is a leaf (has no remaining children) at removal time.
inline DepartureReport simulate_departures(const StabilityTree& tree,
                                           std::span<const Peer> peers) {
  DepartureReport report;
  std::map<PeerId, int> child_count;
  for (const auto& [child, parent] : tree.preferred)
    if (parent) ++child_count[*parent];

  std::vector<const Peer*> order;
  for (const Peer& p : peers) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](const Peer* a, const Peer* b) {
    return *a->lifetime < *b->lifetime;
  });

  for (const Peer* p : order) {
    auto it = child_count.find(p->id);
    if (it != child_count.end() && it->second > 0) {
      report.all_departures_were_leaves = false;
      ++report.disconnections;
      report.non_leaf_departures.push_back(p->id);
    }
    const auto& parent = tree.preferred.at(p->id);
    if (parent) --child_count[*parent];
  }
  return report;
}

}  // namespace geomcast
