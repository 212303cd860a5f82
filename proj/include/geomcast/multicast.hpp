#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "geomcast/geometry.hpp"
#include "geomcast/overlay.hpp"

namespace geomcast {

// Responsibility zone: the open hyper-rectangle of space a peer must
// (transitively) deliver the construction message to.
struct Zone {
  HyperRect rect;

  bool operator==(const Zone&) const = default;
};

struct MulticastTree {
  PeerId root = 0;
  std::map<PeerId, PeerId> parent;    // reached non-root -> parent
  std::map<PeerId, Zone> zone_trace;  // reached (incl. root) -> received zone
  std::uint64_t messages_sent = 0;
  std::uint64_t duplicates = 0;
  std::set<PeerId> unreached;
  bool topology_converged = true;

  std::size_t reached_count() const { return zone_trace.size(); }

  std::map<PeerId, std::vector<PeerId>> children() const {
    std::map<PeerId, std::vector<PeerId>> ch;
    for (const auto& [c, p] : parent) ch[p].push_back(c);
    return ch;
  }
};

// Space-partitioning propagation: each peer forwards to at most one
// neighbour per orthant of its zone (the lower-median by L1 distance),
// handing it the intersection of its own zone with the orthant rectangle.
inline MulticastTree build_tree(const Topology& topo, PeerId root) {
  MulticastTree tree;
  tree.root = root;
  tree.topology_converged = topo.is_converged();
  const std::uint32_t root_idx = topo.index_of(root);
  const int d = static_cast<int>(topo.peer(root_idx).coord.size());

  struct Message {
    std::uint32_t to;
    Zone zone;
  };
  std::deque<Message> queue;
  std::vector<char> reached(topo.size(), 0);
  queue.push_back({root_idx, Zone{HyperRect::all_space(d)}});
  reached[root_idx] = 1;
  tree.zone_trace.emplace(root, Zone{HyperRect::all_space(d)});

  struct OrthantGroup {
    std::vector<std::pair<double, std::uint32_t>> members;  // (L1 dist, idx)
  };

  while (!queue.empty()) {
    const Message msg = std::move(queue.front());
    queue.pop_front();
    const Peer& p = topo.peer(msg.to);

    // Neighbours inside Z(P), grouped by orthant relative to P.
    std::map<std::uint64_t, OrthantGroup> groups;
    for (auto j : topo.out(msg.to)) {
      const Peer& q = topo.peer(j);
      if (!msg.zone.rect.contains(q.coord)) continue;
      const auto key = orthant_of(p.coord, q.coord).key();
      groups[key].members.push_back({l1_distance(p.coord, q.coord), j});
    }

    for (auto& [key, group] : groups) {
      auto& m = group.members;
      std::sort(m.begin(), m.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return topo.peer(a.second).id < topo.peer(b.second).id;
      });
      // Lower median: index ceil(m/2) - 1.
      const std::size_t pick = (m.size() + 1) / 2 - 1;
      const std::uint32_t q_idx = m[pick].second;
      const Peer& q = topo.peer(q_idx);

      RegionId region = orthant_of(p.coord, q.coord);
      auto zq = intersect(msg.zone.rect, orthant_rect(p.coord, region));
      if (!zq) continue;  // cannot occur: q lies in both operands

      ++tree.messages_sent;
      if (reached[q_idx]) {
        ++tree.duplicates;
        continue;
      }
      reached[q_idx] = 1;
      tree.parent.emplace(q.id, p.id);
      tree.zone_trace.emplace(q.id, Zone{*zq});
      queue.push_back({q_idx, Zone{*zq}});
    }
  }

  for (std::uint32_t i = 0; i < topo.size(); ++i)
    if (!reached[i]) tree.unreached.insert(topo.peer(i).id);
  return tree;
}

// ---------------------------------------------------------------------------
// Step verification

struct StepReport {
  bool zones_disjoint = true;
  bool parent_excluded = true;
  bool children_inside_own_zone = true;
  std::vector<PeerId> coverage_gaps;     // peers in zone claimed by no child
  std::vector<PeerId> multiply_covered;  // peers claimed by >1 child

  bool pass() const {
    return zones_disjoint && parent_excluded && children_inside_own_zone &&
           coverage_gaps.empty() && multiply_covered.empty();
  }
};

// Checks the partition produced by one forwarding step: disjoint child
// zones that exclude P, each child inside its own zone, and every other
// peer of the zone claimed by exactly one child.
inline StepReport verify_step_partition(const Peer& p, const Zone& zone,
                                        const std::vector<std::pair<const Peer*, Zone>>& children,
                                        std::span<const Peer> all_peers) {
  StepReport report;
  for (std::size_t i = 0; i < children.size(); ++i) {
    if (!children[i].second.rect.contains(children[i].first->coord))
      report.children_inside_own_zone = false;
    if (children[i].second.rect.contains(p.coord)) report.parent_excluded = false;
    for (std::size_t j = i + 1; j < children.size(); ++j)
      if (intersect(children[i].second.rect, children[j].second.rect))
        report.zones_disjoint = false;
  }
  for (const Peer& q : all_peers) {
    if (q.id == p.id || !zone.rect.contains(q.coord)) continue;
    int owners = 0;
    for (const auto& [child, cz] : children)
      if (cz.rect.contains(q.coord)) ++owners;
    if (owners == 0) report.coverage_gaps.push_back(q.id);
    if (owners > 1) report.multiply_covered.push_back(q.id);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Tree metrics

struct TreeMetrics {
  int max_tree_degree = 0;          // tree edges incident to a peer
  int children_max = 0;             // largest child count of any peer
  int longest_root_leaf_hops = 0;
  int diameter_hops = 0;
};

namespace detail {

// Hop distances from src over undirected tree edges; unreachable stays -1.
inline std::map<PeerId, int> tree_distances(const std::map<PeerId, std::vector<PeerId>>& adj,
                                            PeerId src) {
  std::map<PeerId, int> dist;
  dist[src] = 0;
  std::deque<PeerId> queue{src};
  while (!queue.empty()) {
    const PeerId u = queue.front();
    queue.pop_front();
    auto it = adj.find(u);
    if (it == adj.end()) continue;
    for (PeerId v : it->second)
      if (!dist.count(v)) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
  }
  return dist;
}

}  // namespace detail

inline TreeMetrics tree_metrics(const MulticastTree& tree) {
  TreeMetrics m;
  std::map<PeerId, std::vector<PeerId>> adj;
  adj[tree.root];
  for (const auto& [c, p] : tree.parent) {
    adj[p].push_back(c);
    adj[c].push_back(p);
  }
  std::map<PeerId, int> child_count;
  for (const auto& [c, p] : tree.parent) ++child_count[p];
  for (const auto& [id, nbrs] : adj)
    m.max_tree_degree = std::max(m.max_tree_degree, static_cast<int>(nbrs.size()));
  for (const auto& [id, cnt] : child_count) m.children_max = std::max(m.children_max, cnt);

  auto from_root = detail::tree_distances(adj, tree.root);
  PeerId far = tree.root;
  for (const auto& [id, dd] : from_root)
    if (dd > from_root[far]) far = id;
  m.longest_root_leaf_hops = from_root[far];

  // Double traversal for the diameter.
  auto from_far = detail::tree_distances(adj, far);
  for (const auto& [id, dd] : from_far) m.diameter_hops = std::max(m.diameter_hops, dd);
  return m;
}

}  // namespace geomcast
