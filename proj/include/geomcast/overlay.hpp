#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "geomcast/geometry.hpp"
#include "geomcast/random.hpp"

namespace geomcast {

using PeerId = std::uint32_t;

struct Peer {
  PeerId id = 0;
  Coord coord;
  std::string addr;                  // opaque stand-in for a network address
  std::optional<double> lifetime;    // T(P), simulated seconds
};

struct GossipConfig {
  int br = 2;                // existence announcements travel this many hops
  int freshness_rounds = 2;  // rounds an entry survives without being re-heard

  void validate() const {
    if (br < 2) throw error("GossipConfig: br must be >= 2");
    if (freshness_rounds < 1) throw error("GossipConfig: freshness_rounds must be >= 1");
  }
};

enum class KnowledgeMode { Gossip, Full };

struct SelectionStrategy {
  enum class Kind { EmptyRect, OrthogonalHyperplanes, GeneralHyperplanes, KClosest };

  Kind kind = Kind::EmptyRect;
  int k = 1;                         // per-region count (hyperplane/k-closest kinds)
  HyperplaneSet planes;              // GeneralHyperplanes only
  Distance distance = Distance::L1;

  static SelectionStrategy empty_rect() { return {}; }

  static SelectionStrategy orthogonal_hp(int k, Distance d = Distance::L1) {
    SelectionStrategy s;
    s.kind = Kind::OrthogonalHyperplanes;
    s.k = k;
    s.distance = d;
    return s;
  }

  static SelectionStrategy general_hp(HyperplaneSet planes, int k,
                                      Distance d = Distance::L1) {
    SelectionStrategy s;
    s.kind = Kind::GeneralHyperplanes;
    s.planes = std::move(planes);
    s.k = k;
    s.distance = d;
    return s;
  }

  static SelectionStrategy k_closest(int k, Distance d = Distance::L1) {
    SelectionStrategy s;
    s.kind = Kind::KClosest;
    s.k = k;
    s.distance = d;
    return s;
  }

  void validate() const {
    if (kind != Kind::EmptyRect && k < 1) throw error("SelectionStrategy: k must be >= 1");
  }

  std::string name() const {
    switch (kind) {
      case Kind::EmptyRect: return "empty-rect";
      case Kind::OrthogonalHyperplanes: return "ortho-hp";
      case Kind::GeneralHyperplanes: return "gen-hp";
      case Kind::KClosest: return "k-closest";
    }
    return "?";
  }
};

// One I(P) entry: peer index plus the number of rounds since it was last
// heard (0 = heard this round).
struct KnowledgeEntry {
  std::uint32_t idx;
  int age;

  bool operator==(const KnowledgeEntry&) const = default;
};

// Sorted by idx.
using KnowledgeSet = std::vector<KnowledgeEntry>;

// The overlay state: peers, their selected out-neighbours, and the
// per-peer knowledge sets I(P).
class Topology {
 public:
  Topology() = default;

  std::size_t size() const { return peers_.size(); }
  bool empty() const { return peers_.empty(); }

  const Peer& peer(std::uint32_t idx) const { return peers_[idx]; }
  Peer& peer(std::uint32_t idx) { return peers_[idx]; }
  std::span<const Peer> peers() const { return peers_; }

  std::uint32_t index_of(PeerId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw error("unknown peer id " + std::to_string(id));
    return it->second;
  }

  bool has_peer(PeerId id) const { return index_.count(id) != 0; }

  const std::vector<std::uint32_t>& out(std::uint32_t idx) const { return out_[idx]; }
  void set_out(std::uint32_t idx, std::vector<std::uint32_t> v) { out_[idx] = std::move(v); }

  std::vector<PeerId> out_ids(PeerId id) const {
    std::vector<PeerId> v;
    for (auto j : out_[index_of(id)]) v.push_back(peers_[j].id);
    return v;
  }

  const KnowledgeSet& knowledge(std::uint32_t idx) const { return knowledge_[idx]; }
  KnowledgeSet& knowledge(std::uint32_t idx) { return knowledge_[idx]; }

  std::set<PeerId> knowledge_ids(PeerId id) const {
    std::set<PeerId> v;
    for (const auto& e : knowledge_[index_of(id)]) v.insert(peers_[e.idx].id);
    return v;
  }

  void add_peer(Peer p, const std::vector<PeerId>& bootstrap) {
    if (index_.count(p.id)) throw error("duplicate peer id " + std::to_string(p.id));
    if (bootstrap.empty() && !peers_.empty())
      throw error("empty bootstrap set is allowed only for the first peer");
    std::vector<std::uint32_t> boot_idx;
    for (PeerId b : bootstrap) boot_idx.push_back(index_of(b));
    std::sort(boot_idx.begin(), boot_idx.end());
    boot_idx.erase(std::unique(boot_idx.begin(), boot_idx.end()), boot_idx.end());
    KnowledgeSet know;
    for (auto j : boot_idx) know.push_back({j, 0});
    const auto idx = static_cast<std::uint32_t>(peers_.size());
    index_.emplace(p.id, idx);
    peers_.push_back(std::move(p));
    out_.push_back(std::move(boot_idx));
    knowledge_.push_back(std::move(know));
    converged_ = false;
  }

  // Union of out-edges treated undirected, as index-based adjacency lists.
  std::vector<std::vector<std::uint32_t>> undirected_adjacency() const {
    std::vector<std::vector<std::uint32_t>> adj(peers_.size());
    for (std::uint32_t i = 0; i < peers_.size(); ++i)
      for (auto j : out_[i]) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    for (auto& nbrs : adj) {
      std::sort(nbrs.begin(), nbrs.end());
      nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    return adj;
  }

  bool is_converged() const { return converged_; }
  void mark_converged(bool v) { converged_ = v; }

  bool operator==(const Topology& other) const {
    if (out_ != other.out_ || knowledge_ != other.knowledge_) return false;
    if (peers_.size() != other.peers_.size()) return false;
    for (std::size_t i = 0; i < peers_.size(); ++i)
      if (peers_[i].id != other.peers_[i].id) return false;
    return true;
  }

 private:
  std::vector<Peer> peers_;
  std::unordered_map<PeerId, std::uint32_t> index_;
  std::vector<std::vector<std::uint32_t>> out_;
  std::vector<KnowledgeSet> knowledge_;
  bool converged_ = false;
};

struct non_convergence : error {
  non_convergence(const std::string& msg, Topology prev_state, Topology last_state)
      : error(msg),
        prev(std::make_shared<Topology>(std::move(prev_state))),
        last(std::make_shared<Topology>(std::move(last_state))) {}

  std::shared_ptr<const Topology> prev;  // for oscillation diagnosis
  std::shared_ptr<const Topology> last;
};

// ---------------------------------------------------------------------------
// Peer generation

// Uniform coordinates over [0, vmax]^D with per-dimension pairwise distinct
// components; colliding components are resampled. Lifetimes, when requested,
// are uniform in [0, lifetime_span) and pairwise distinct.
inline std::vector<Peer> generate_peers(std::size_t n, const SpaceSpec& spec,
                                        std::uint64_t seed, bool with_lifetimes = false,
                                        double lifetime_span = 1.0e6) {
  spec.validate();
  if (n < 1) throw error("generate_peers: n must be >= 1");
  Rng rng(mix64(seed));

  std::vector<Peer> peers(n);
  for (std::size_t i = 0; i < n; ++i) {
    peers[i].id = static_cast<PeerId>(i);
    peers[i].addr = "peer:" + std::to_string(i);
    peers[i].coord.resize(static_cast<std::size_t>(spec.d));
    for (auto& c : peers[i].coord) c = rng.next_real(spec.vmax);
  }

  constexpr int kMaxPasses = 1000;
  for (int dim = 0; dim < spec.d; ++dim) {
    const auto di = static_cast<std::size_t>(dim);
    for (int pass = 0;; ++pass) {
      if (pass >= kMaxPasses)
        throw error("generate_peers: could not produce distinct coordinates");
      std::vector<std::uint32_t> order(n);
      for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](auto a, auto b) {
        return peers[a].coord[di] < peers[b].coord[di];
      });
      bool clash = false;
      for (std::size_t i = 1; i < n; ++i)
        if (peers[order[i]].coord[di] == peers[order[i - 1]].coord[di]) {
          peers[order[i]].coord[di] = rng.next_real(spec.vmax);
          clash = true;
        }
      if (!clash) break;
    }
  }

  if (with_lifetimes) {
    for (auto& p : peers) p.lifetime = rng.next_real(lifetime_span);
    for (int pass = 0;; ++pass) {
      if (pass >= kMaxPasses) throw error("generate_peers: could not produce distinct lifetimes");
      std::vector<std::uint32_t> order(n);
      for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](auto a, auto b) {
        return *peers[a].lifetime < *peers[b].lifetime;
      });
      bool clash = false;
      for (std::size_t i = 1; i < n; ++i)
        if (*peers[order[i]].lifetime == *peers[order[i - 1]].lifetime) {
          peers[order[i]].lifetime = rng.next_real(lifetime_span);
          clash = true;
        }
      if (!clash) break;
    }
  }
  return peers;
}

// ---------------------------------------------------------------------------
// Neighbour selection

namespace detail {

inline bool closed_rect_contains(const Coord& p, const Coord& q, const Coord& r) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double lo = p[i] < q[i] ? p[i] : q[i];
    const double hi = p[i] < q[i] ? q[i] : p[i];
    if (r[i] < lo || r[i] > hi) return false;
  }
  return true;
}

struct RankedCandidate {
  double dist;
  PeerId id;
  const Peer* peer;

  bool operator<(const RankedCandidate& o) const {
    if (dist != o.dist) return dist < o.dist;
    return id < o.id;
  }
};

inline std::vector<RankedCandidate> rank_by_distance(
    const Peer& p, const std::vector<const Peer*>& candidates, Distance metric) {
  std::vector<RankedCandidate> ranked;
  ranked.reserve(candidates.size());
  for (const Peer* c : candidates)
    ranked.push_back({distance(p.coord, c->coord, metric), c->id, c});
  std::sort(ranked.begin(), ranked.end());
  return ranked;
}

// Empty-rectangle rule. Candidates are processed in increasing L1 distance;
// any candidate inside rect(P,Q) is strictly closer to P than Q, and the
// closest one inside a non-empty rectangle is itself an empty-rectangle
// neighbour, so testing Q against the already-kept neighbours suffices.
inline std::vector<const Peer*> select_empty_rect(
    const Peer& p, const std::vector<const Peer*>& candidates) {
  auto ranked = rank_by_distance(p, candidates, Distance::L1);
  std::vector<const Peer*> kept;
  for (const auto& rc : ranked) {
    bool blocked = false;
    for (const Peer* r : kept)
      if (closed_rect_contains(p.coord, rc.peer->coord, r->coord)) {
        blocked = true;
        break;
      }
    if (!blocked) kept.push_back(rc.peer);
  }
  return kept;
}

inline std::vector<const Peer*> select_hyperplanes(
    const Peer& p, const std::vector<const Peer*>& candidates,
    const SelectionStrategy& s) {
  const bool orthogonal = s.kind == SelectionStrategy::Kind::OrthogonalHyperplanes;
  std::map<std::uint64_t, std::vector<RankedCandidate>> regions;
  Coord offset(p.coord.size());
  for (const Peer* c : candidates) {
    std::uint64_t key;
    if (orthogonal) {
      key = orthant_of(p.coord, c->coord).key();
    } else {
      for (std::size_t i = 0; i < offset.size(); ++i) offset[i] = c->coord[i] - p.coord[i];
      key = hyperplane_region(s.planes, offset).key();
    }
    regions[key].push_back({distance(p.coord, c->coord, s.distance), c->id, c});
  }
  std::vector<const Peer*> kept;
  for (auto& [key, group] : regions) {
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(s.k), group.size());
    std::partial_sort(group.begin(), group.begin() + static_cast<std::ptrdiff_t>(take),
                      group.end());
    for (std::size_t i = 0; i < take; ++i) kept.push_back(group[i].peer);
  }
  return kept;
}

inline std::vector<const Peer*> select_k_closest(
    const Peer& p, const std::vector<const Peer*>& candidates,
    const SelectionStrategy& s) {
  auto ranked = rank_by_distance(p, candidates, s.distance);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(s.k), ranked.size());
  std::vector<const Peer*> kept;
  for (std::size_t i = 0; i < take; ++i) kept.push_back(ranked[i].peer);
  return kept;
}

inline std::vector<const Peer*> select_peers(const Peer& p,
                                             const std::vector<const Peer*>& candidates,
                                             const SelectionStrategy& s) {
  switch (s.kind) {
    case SelectionStrategy::Kind::EmptyRect:
      return select_empty_rect(p, candidates);
    case SelectionStrategy::Kind::OrthogonalHyperplanes:
    case SelectionStrategy::Kind::GeneralHyperplanes:
      return select_hyperplanes(p, candidates, s);
    case SelectionStrategy::Kind::KClosest:
      return select_k_closest(p, candidates, s);
  }
  return {};
}

}  // namespace detail

inline std::vector<PeerId> select_neighbors(const Peer& p,
                                            const std::vector<const Peer*>& candidates,
                                            const SelectionStrategy& strategy) {
  strategy.validate();
  for (const Peer* c : candidates)
    if (c->id == p.id) throw error("select_neighbors: P must not be a candidate");
  std::vector<PeerId> out;
  for (const Peer* q : detail::select_peers(p, candidates, strategy)) out.push_back(q->id);
  return out;
}

// ---------------------------------------------------------------------------
// Gossip knowledge

// One synchronous knowledge round; returns true when any I(P) changed.
// Gossip mode: I(P) becomes every peer within br undirected hops, plus
// entries heard within the freshness window. Full mode: every other peer.
inline bool knowledge_round(Topology& topo, const GossipConfig& cfg,
                            KnowledgeMode mode = KnowledgeMode::Gossip) {
  cfg.validate();
  const auto n = static_cast<std::uint32_t>(topo.size());
  bool changed = false;

  if (mode == KnowledgeMode::Full) {
    for (std::uint32_t i = 0; i < n; ++i) {
      auto& know = topo.knowledge(i);
      bool ok = know.size() == n - 1;
      if (ok)
        for (const auto& e : know)
          if (e.age != 0) { ok = false; break; }
      if (ok) continue;
      know.clear();
      know.reserve(n - 1);
      for (std::uint32_t j = 0; j < n; ++j)
        if (j != i) know.push_back({j, 0});
      changed = true;
    }
    return changed;
  }

  const auto adj = topo.undirected_adjacency();
  std::vector<int> dist(n);
  for (std::uint32_t src = 0; src < n; ++src) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[src] = 0;
    std::deque<std::uint32_t> queue{src};
    std::vector<std::uint32_t> fresh;
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      if (dist[u] >= cfg.br) continue;
      for (auto v : adj[u])
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          fresh.push_back(v);
          queue.push_back(v);
        }
    }
    std::sort(fresh.begin(), fresh.end());

    KnowledgeSet next;
    next.reserve(fresh.size());
    auto fit = fresh.begin();
    for (const auto& e : topo.knowledge(src)) {
      while (fit != fresh.end() && *fit < e.idx) next.push_back({*fit++, 0});
      if (fit != fresh.end() && *fit == e.idx) {
        next.push_back({*fit++, 0});
      } else if (e.age + 1 < cfg.freshness_rounds) {
        next.push_back({e.idx, e.age + 1});
      }
    }
    while (fit != fresh.end()) next.push_back({*fit++, 0});

    if (next != topo.knowledge(src)) {
      topo.knowledge(src) = std::move(next);
      changed = true;
    }
  }
  return changed;
}

// ---------------------------------------------------------------------------
// Convergence

struct ConvergeOptions {
  int max_rounds = 0;       // 0 -> 10 * N
  bool sequential = false;  // Gauss-Seidel update order, for diagnosis
};

// Runs {knowledge_round; reselect all} until a full round changes neither
// knowledge nor any neighbour set. Returns the number of rounds used.
inline int converge(Topology& topo, const GossipConfig& cfg,
                    const SelectionStrategy& strategy,
                    KnowledgeMode mode = KnowledgeMode::Gossip,
                    ConvergeOptions opts = {}) {
  strategy.validate();
  const auto n = static_cast<std::uint32_t>(topo.size());
  const int max_rounds =
      opts.max_rounds > 0 ? opts.max_rounds : 10 * std::max<int>(1, static_cast<int>(n));

  Topology prev = topo;
  for (int round = 1; round <= max_rounds; ++round) {
    Topology snapshot = topo;
    bool changed = knowledge_round(topo, cfg, mode);

    std::vector<const Peer*> candidates;
    std::vector<std::vector<std::uint32_t>> next_out(opts.sequential ? 0 : n);
    for (std::uint32_t i = 0; i < n; ++i) {
      candidates.clear();
      for (const auto& e : topo.knowledge(i)) candidates.push_back(&topo.peer(e.idx));
      auto picked = detail::select_peers(topo.peer(i), candidates, strategy);
      std::vector<std::uint32_t> idxs;
      idxs.reserve(picked.size());
      for (const Peer* q : picked) idxs.push_back(topo.index_of(q->id));
      if (idxs != topo.out(i)) changed = true;
      if (opts.sequential) {
        topo.set_out(i, std::move(idxs));
      } else {
        next_out[i] = std::move(idxs);
      }
    }
    if (!opts.sequential)
      for (std::uint32_t i = 0; i < n; ++i) topo.set_out(i, std::move(next_out[i]));

    if (!changed) {
      topo.mark_converged(true);
      return round;
    }
    prev = std::move(snapshot);
  }
  throw non_convergence("no fixed point within " + std::to_string(max_rounds) + " rounds",
                        std::move(prev), topo);
}

inline void insert_peer(Topology& topo, Peer peer, const std::vector<PeerId>& bootstrap) {
  topo.add_peer(std::move(peer), bootstrap);
}

// ---------------------------------------------------------------------------
// Metrics

struct DegreeMetrics {
  int max_degree = 0;
  double avg_degree = 0.0;
};

// Degree over the undirected closure of selection edges.
inline DegreeMetrics topology_metrics(const Topology& topo) {
  DegreeMetrics m;
  if (topo.empty()) return m;
  const auto adj = topo.undirected_adjacency();
  double total = 0.0;
  for (const auto& nbrs : adj) {
    const int deg = static_cast<int>(nbrs.size());
    m.max_degree = std::max(m.max_degree, deg);
    total += deg;
  }
  m.avg_degree = total / static_cast<double>(adj.size());
  return m;
}

// Mean per-peer Jaccard similarity of out-neighbour sets, matched by peer id.
inline double topology_jaccard(const Topology& a, const Topology& b) {
  if (a.empty()) return 1.0;
  double total = 0.0;
  for (std::uint32_t i = 0; i < a.size(); ++i) {
    const PeerId id = a.peer(i).id;
    std::set<PeerId> sa, sb;
    for (auto j : a.out(i)) sa.insert(a.peer(j).id);
    if (b.has_peer(id))
      for (auto j : b.out(b.index_of(id))) sb.insert(b.peer(j).id);
    std::vector<PeerId> uni, inter;
    std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(uni));
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                          std::back_inserter(inter));
    total += uni.empty() ? 1.0
                         : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
  }
  return total / static_cast<double>(a.size());
}

// Builds a converged overlay where every peer knows every other peer.
inline Topology full_knowledge_overlay(const std::vector<Peer>& peers,
                                       const SelectionStrategy& strategy) {
  Topology topo;
  for (std::size_t i = 0; i < peers.size(); ++i)
    topo.add_peer(peers[i],
                  i == 0 ? std::vector<PeerId>{} : std::vector<PeerId>{peers[0].id});
  GossipConfig cfg;
  converge(topo, cfg, strategy, KnowledgeMode::Full);
  return topo;
}

}  // namespace geomcast
