#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "geomcast/geometry.hpp"
#include "geomcast/multicast.hpp"
#include "geomcast/overlay.hpp"

// Brute-force reference implementations, deliberately independent of the
// optimized selection and propagation code they validate. Only geometry
// primitives plus exhaustive loops. Intended for N <= 500.

namespace geomcast::oracle {

struct Mismatch {
  PeerId subject;
  std::string expected;
  std::string actual;
};

struct OracleReport {
  std::string subject;
  std::size_t n = 0;
  int d = 0;
  std::vector<Mismatch> mismatches;

  bool pass() const { return mismatches.empty(); }
};

inline constexpr std::size_t kDefaultInstanceCap = 500;

namespace detail {

inline std::string join_ids(const std::set<PeerId>& ids) {
  std::ostringstream os;
  bool first = true;
  for (PeerId id : ids) {
    if (!first) os << ",";
    os << id;
    first = false;
  }
  return os.str();
}

}  // namespace detail

// All nodes at undirected hop distance in [1, limit] from src.
inline std::set<PeerId> bfs_hops(const std::map<PeerId, std::vector<PeerId>>& graph,
                                 PeerId src, int limit) {
  if (!graph.count(src)) throw error("bfs_hops: unknown source " + std::to_string(src));
  std::map<PeerId, int> dist;
  dist[src] = 0;
  std::vector<PeerId> frontier{src};
  std::set<PeerId> result;
  for (int hop = 1; hop <= limit && !frontier.empty(); ++hop) {
    std::vector<PeerId> next;
    for (PeerId u : frontier) {
      auto it = graph.find(u);
      if (it == graph.end()) continue;
      for (PeerId v : it->second)
        if (!dist.count(v)) {
          dist[v] = hop;
          result.insert(v);
          next.push_back(v);
        }
    }
    frontier = std::move(next);
  }
  return result;
}

// Naive all-triples empty-rectangle rule; O(n^2) per call.
inline std::vector<PeerId> brute_empty_rect(const Peer& p,
                                            const std::vector<const Peer*>& candidates) {
  std::vector<PeerId> selected;
  for (const Peer* q : candidates) {
    const HyperRect box = rect_between(p.coord, q->coord);
    bool empty = true;
    for (const Peer* r : candidates) {
      if (r == q) continue;
      if (box.contains(r->coord)) {
        empty = false;
        break;
      }
    }
    if (empty) selected.push_back(q->id);
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

namespace detail {

// Independent naive selection for the hyperplane and k-closest strategies.
inline std::set<PeerId> brute_select(const Peer& p,
                                     const std::vector<const Peer*>& candidates,
                                     const SelectionStrategy& s) {
  std::set<PeerId> out;
  if (s.kind == SelectionStrategy::Kind::EmptyRect) {
    for (PeerId id : brute_empty_rect(p, candidates)) out.insert(id);
    return out;
  }
  if (s.kind == SelectionStrategy::Kind::KClosest) {
    std::vector<std::pair<double, PeerId>> ranked;
    for (const Peer* c : candidates)
      ranked.push_back({distance(p.coord, c->coord, s.distance), c->id});
    std::sort(ranked.begin(), ranked.end());
    for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(s.k); ++i)
      out.insert(ranked[i].second);
    return out;
  }
  // Hyperplane kinds: classify every candidate, then exhaustively pick the
  // k best of each region.
  std::map<std::vector<std::int8_t>, std::vector<std::pair<double, PeerId>>> regions;
  for (const Peer* c : candidates) {
    RegionId region;
    if (s.kind == SelectionStrategy::Kind::OrthogonalHyperplanes) {
      region = orthant_of(p.coord, c->coord);
    } else {
      Coord offset(p.coord.size());
      for (std::size_t i = 0; i < offset.size(); ++i) offset[i] = c->coord[i] - p.coord[i];
      region = hyperplane_region(s.planes, offset);
    }
    regions[region.signs].push_back({distance(p.coord, c->coord, s.distance), c->id});
  }
  for (auto& [signs, group] : regions) {
    std::sort(group.begin(), group.end());
    for (std::size_t i = 0; i < group.size() && i < static_cast<std::size_t>(s.k); ++i)
      out.insert(group[i].second);
  }
  return out;
}

}  // namespace detail

// Compares every converged knowledge set against an independent limited-hop
// BFS over the undirected closure of the selection edges.
inline OracleReport check_knowledge(const Topology& topo, int br) {
  OracleReport report;
  report.subject = "knowledge_vs_bfs";
  report.n = topo.size();
  report.d = topo.empty() ? 0 : static_cast<int>(topo.peer(0).coord.size());
  if (report.n > kDefaultInstanceCap)
    throw error("oracle: instance exceeds the N <= " +
                std::to_string(kDefaultInstanceCap) + " cap");

  std::map<PeerId, std::vector<PeerId>> graph;
  const auto adj = topo.undirected_adjacency();
  for (std::uint32_t i = 0; i < topo.size(); ++i) {
    auto& nbrs = graph[topo.peer(i).id];
    for (auto j : adj[i]) nbrs.push_back(topo.peer(j).id);
  }
  for (std::uint32_t i = 0; i < topo.size(); ++i) {
    const PeerId id = topo.peer(i).id;
    const std::set<PeerId> expected = bfs_hops(graph, id, br);
    const std::set<PeerId> actual = topo.knowledge_ids(id);
    if (expected != actual)
      report.mismatches.push_back(
          {id, detail::join_ids(expected), detail::join_ids(actual)});
  }
  return report;
}

// Recomputes every peer's neighbour set from scratch against all peers and
// reports mismatches with the topology's selected sets.
inline OracleReport check_full_knowledge_equilibrium(const Topology& topo,
                                                     const SelectionStrategy& strategy) {
  OracleReport report;
  report.subject = "full_knowledge_equilibrium";
  report.n = topo.size();
  report.d = topo.empty() ? 0 : static_cast<int>(topo.peer(0).coord.size());
  if (report.n > kDefaultInstanceCap)
    throw error("oracle: instance exceeds the N <= " +
                std::to_string(kDefaultInstanceCap) + " cap");

  for (std::uint32_t i = 0; i < topo.size(); ++i) {
    const Peer& p = topo.peer(i);
    std::vector<const Peer*> others;
    for (std::uint32_t j = 0; j < topo.size(); ++j)
      if (j != i) others.push_back(&topo.peer(j));
    const std::set<PeerId> expected = detail::brute_select(p, others, strategy);
    std::set<PeerId> actual;
    for (auto j : topo.out(i)) actual.insert(topo.peer(j).id);
    if (expected != actual)
      report.mismatches.push_back(
          {p.id, detail::join_ids(expected), detail::join_ids(actual)});
  }
  return report;
}

// Confirms reached/unreached accounting, message counts, parent edges that
// reach the root, and every zone-membership claim in the trace.
inline OracleReport check_delivery(const MulticastTree& tree, std::span<const Peer> peers) {
  OracleReport report;
  report.subject = "delivery";
  report.n = peers.size();
  report.d = peers.empty() ? 0 : static_cast<int>(peers[0].coord.size());
  if (report.n > kDefaultInstanceCap)
    throw error("oracle: instance exceeds the N <= " +
                std::to_string(kDefaultInstanceCap) + " cap");

  std::map<PeerId, const Peer*> by_id;
  for (const Peer& p : peers) by_id[p.id] = &p;

  std::set<PeerId> reached;
  for (const auto& [id, z] : tree.zone_trace) reached.insert(id);

  for (const Peer& p : peers) {
    const bool r = reached.count(p.id) != 0;
    const bool u = tree.unreached.count(p.id) != 0;
    if (r == u)
      report.mismatches.push_back({p.id, "exactly one of reached/unreached",
                                   r ? "both" : "neither"});
  }
  for (PeerId id : reached)
    if (!by_id.count(id))
      report.mismatches.push_back({id, "known peer", "reached but not a peer"});

  if (tree.messages_sent != tree.parent.size() + tree.duplicates)
    report.mismatches.push_back(
        {tree.root,
         "messages_sent = reached non-root + duplicates = " +
             std::to_string(tree.parent.size() + tree.duplicates),
         std::to_string(tree.messages_sent)});

  // Every reached non-root peer's parent chain must end at the root.
  for (const auto& [child, parent] : tree.parent) {
    if (!reached.count(parent))
      report.mismatches.push_back({child, "reached parent", "orphaned (parent " +
                                                                std::to_string(parent) +
                                                                " not reached)"});
    PeerId cur = child;
    std::size_t steps = 0;
    while (cur != tree.root) {
      auto it = tree.parent.find(cur);
      if (it == tree.parent.end() || ++steps > tree.parent.size()) {
        report.mismatches.push_back({child, "parent chain reaching root",
                                     "broken at " + std::to_string(cur)});
        break;
      }
      cur = it->second;
    }
  }

  // Zone-membership claims: every reached peer sits inside the zone it got.
  for (const auto& [id, zone] : tree.zone_trace) {
    auto it = by_id.find(id);
    if (it == by_id.end()) continue;
    if (!zone.rect.contains(it->second->coord))
      report.mismatches.push_back({id, "coordinate inside received zone", "outside"});
  }
  return report;
}

// Walks a built tree and runs verify_step_partition at every forwarding
// step. Each child step only needs the peers inside its own zone, so the
// candidate list shrinks along the way instead of rescanning all peers.
inline OracleReport verify_tree_partitions(const MulticastTree& tree, const Topology& topo) {
  OracleReport report;
  report.subject = "tree_partitions";
  report.n = topo.size();
  report.d = topo.empty() ? 0 : static_cast<int>(topo.peer(0).coord.size());

  const auto children = tree.children();

  struct Frame {
    PeerId id;
    std::vector<const Peer*> in_zone;  // peers inside this node's zone
  };
  std::vector<Frame> stack;
  {
    Frame root{tree.root, {}};
    for (const Peer& p : topo.peers()) root.in_zone.push_back(&p);
    stack.push_back(std::move(root));
  }

  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const Peer& p = topo.peer(topo.index_of(frame.id));
    const Zone& zone = tree.zone_trace.at(frame.id);

    std::vector<std::pair<const Peer*, Zone>> child_zones;
    auto it = children.find(frame.id);
    if (it != children.end())
      for (PeerId c : it->second)
        child_zones.emplace_back(&topo.peer(topo.index_of(c)), tree.zone_trace.at(c));

    // Restrict to this zone before checking; membership is re-tested inside.
    std::vector<const Peer*> scoped;
    for (const Peer* q : frame.in_zone)
      if (zone.rect.contains(q->coord)) scoped.push_back(q);

    std::vector<Peer> scoped_peers;
    scoped_peers.reserve(scoped.size());
    for (const Peer* q : scoped) scoped_peers.push_back(*q);
    const StepReport step = verify_step_partition(p, zone, child_zones, scoped_peers);
    if (!step.pass()) {
      std::string what;
      if (!step.zones_disjoint) what += "zones_overlap;";
      if (!step.parent_excluded) what += "parent_inside_child_zone;";
      if (!step.children_inside_own_zone) what += "child_outside_zone;";
      if (!step.coverage_gaps.empty())
        what += "coverage_gaps=" + std::to_string(step.coverage_gaps.size()) + ";";
      if (!step.multiply_covered.empty())
        what += "multiply_covered=" + std::to_string(step.multiply_covered.size()) + ";";
      report.mismatches.push_back({frame.id, "clean step partition", what});
    }

    for (const auto& [child, cz] : child_zones) {
      Frame next{child->id, {}};
      for (const Peer* q : scoped)
        if (cz.rect.contains(q->coord)) next.in_zone.push_back(q);
      stack.push_back(std::move(next));
    }
  }
  return report;
}

}  // namespace geomcast::oracle
