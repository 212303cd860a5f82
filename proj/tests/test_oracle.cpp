#include <catch2/catch_amalgamated.hpp>

#include "geomcast/harness.hpp"
#include "geomcast/oracle.hpp"

using namespace geomcast;

namespace {

Peer make_peer(PeerId id, Coord c) {
  return Peer{id, std::move(c), "peer:" + std::to_string(id), std::nullopt};
}

Topology make_topology(const std::vector<Peer>& peers,
                       const std::vector<std::vector<PeerId>>& out) {
  Topology t;
  for (std::size_t i = 0; i < peers.size(); ++i)
    t.add_peer(peers[i], i == 0 ? std::vector<PeerId>{}
                                : std::vector<PeerId>{peers[0].id});
  for (std::size_t i = 0; i < peers.size(); ++i) {
    std::vector<std::uint32_t> idxs;
    for (PeerId id : out[i]) idxs.push_back(t.index_of(id));
    t.set_out(static_cast<std::uint32_t>(i), std::move(idxs));
  }
  t.mark_converged(true);
  return t;
}

}  // namespace

TEST_CASE("bfs_hops on a chain") {
  std::map<PeerId, std::vector<PeerId>> g = {
      {0, {1}}, {1, {0, 2}}, {2, {1, 3}}, {3, {2, 4}}, {4, {3}}};
  CHECK(oracle::bfs_hops(g, 0, 1) == std::set<PeerId>{1});
  CHECK(oracle::bfs_hops(g, 0, 2) == std::set<PeerId>{1, 2});
  CHECK(oracle::bfs_hops(g, 2, 2) == std::set<PeerId>{0, 1, 3, 4});
  CHECK(oracle::bfs_hops(g, 0, 0).empty());
  CHECK(oracle::bfs_hops(g, 0, 99) == std::set<PeerId>{1, 2, 3, 4});
  CHECK_THROWS_AS(oracle::bfs_hops(g, 77, 2), error);
}

TEST_CASE("bfs_hops on a 5-clique") {
  std::map<PeerId, std::vector<PeerId>> g;
  for (PeerId i = 0; i < 5; ++i)
    for (PeerId j = 0; j < 5; ++j)
      if (i != j) g[i].push_back(j);
  CHECK(oracle::bfs_hops(g, 0, 1).size() == 4);
  CHECK(oracle::bfs_hops(g, 0, 3).size() == 4);
}

TEST_CASE("brute_empty_rect hand instances") {
  const Peer p = make_peer(0, {5, 5});
  const Peer q = make_peer(1, {7, 6});
  const Peer r = make_peer(2, {9, 8});
  // rect(p,r) contains q, so only q survives in that direction.
  CHECK(oracle::brute_empty_rect(p, {&q, &r}) == std::vector<PeerId>{1});
  CHECK(oracle::brute_empty_rect(p, {&q}) == std::vector<PeerId>{1});
  CHECK(oracle::brute_empty_rect(p, {}).empty());

  // Collinear diagonal chain: only the nearest survives.
  const Peer o = make_peer(0, {0, 0});
  const Peer a = make_peer(1, {1, 1});
  const Peer b = make_peer(2, {2, 2});
  const Peer c = make_peer(3, {3, 3});
  CHECK(oracle::brute_empty_rect(o, {&c, &a, &b}) == std::vector<PeerId>{1});

  // Incomparable points do not block each other.
  const Peer u = make_peer(1, {6, 2});
  const Peer v = make_peer(2, {2, 6});
  CHECK(oracle::brute_empty_rect(p, {&u, &v}) == std::vector<PeerId>{1, 2});
}

TEST_CASE("check_knowledge matches gossip output and flags tampering") {
  SpaceSpec spec{2, 1000.0};
  auto peers = generate_peers(80, spec, 7);
  Rng rng(derive_seed(7, "bootstrap"));
  Topology topo;
  for (std::size_t i = 0; i < peers.size(); ++i) {
    std::vector<PeerId> bootstrap;
    if (i > 0) bootstrap.push_back(topo.peer(static_cast<std::uint32_t>(rng.next_below(i))).id);
    topo.add_peer(peers[i], bootstrap);
  }
  GossipConfig cfg{2, 2};
  converge(topo, cfg, SelectionStrategy::empty_rect(), KnowledgeMode::Gossip, {});
  CHECK(oracle::check_knowledge(topo, 2).pass());
}

TEST_CASE("check_full_knowledge_equilibrium") {
  SpaceSpec spec{2, 1000.0};
  auto peers = generate_peers(120, spec, 21);

  for (const auto& strategy :
       {SelectionStrategy::empty_rect(), SelectionStrategy::orthogonal_hp(2),
        SelectionStrategy::general_hp(HyperplaneSet::full_family(2), 1),
        SelectionStrategy::k_closest(4)}) {
    auto topo = full_knowledge_overlay(peers, strategy);
    auto report = oracle::check_full_knowledge_equilibrium(topo, strategy);
    INFO(strategy.name());
    CHECK(report.pass());
  }

  // Tampering with one peer's out-set is pinpointed.
  auto topo = full_knowledge_overlay(peers, SelectionStrategy::empty_rect());
  auto out = std::vector<std::uint32_t>(topo.out(5).begin(), topo.out(5).end());
  REQUIRE(!out.empty());
  out.pop_back();
  topo.set_out(5, std::move(out));
  auto report = oracle::check_full_knowledge_equilibrium(topo, SelectionStrategy::empty_rect());
  REQUIRE(report.mismatches.size() == 1);
  CHECK(report.mismatches[0].subject == topo.peer(5).id);
}

TEST_CASE("equilibrium check is vacuous for a single peer") {
  auto topo = make_topology({make_peer(0, {1, 1})}, {{}});
  CHECK(oracle::check_full_knowledge_equilibrium(topo, SelectionStrategy::empty_rect()).pass());
}

TEST_CASE("check_delivery pass and failure modes") {
  SpaceSpec spec{2, 1000.0};
  auto peers = generate_peers(90, spec, 5);
  auto topo = full_knowledge_overlay(peers, SelectionStrategy::empty_rect());
  auto tree = build_tree(topo, peers[0].id);
  CHECK(oracle::check_delivery(tree, peers).pass());

  // Drop one parent edge: the peer is now neither reached-consistent nor
  // chained to the root.
  auto broken = tree;
  REQUIRE(!broken.parent.empty());
  const PeerId victim = broken.parent.begin()->first;
  broken.parent.erase(victim);
  auto report = oracle::check_delivery(broken, peers);
  CHECK_FALSE(report.pass());

  // Miscounting messages is caught too.
  auto miscounted = tree;
  miscounted.messages_sent += 1;
  CHECK_FALSE(oracle::check_delivery(miscounted, peers).pass());
}

TEST_CASE("check_delivery single peer") {
  std::vector<Peer> peers = {make_peer(0, {1, 1})};
  auto topo = make_topology(peers, {{}});
  auto tree = build_tree(topo, 0);
  CHECK(oracle::check_delivery(tree, peers).pass());
}

TEST_CASE("oracle instance cap is enforced") {
  SpaceSpec spec{2, 1000.0};
  auto peers = generate_peers(501, spec, 2);
  auto topo = full_knowledge_overlay(peers, SelectionStrategy::k_closest(3));
  CHECK_THROWS_AS(oracle::check_knowledge(topo, 2), error);
  CHECK_THROWS_AS(
      oracle::check_full_knowledge_equilibrium(topo, SelectionStrategy::k_closest(3)),
      error);
}

TEST_CASE("optimized selection agrees with the brute oracle on random instances") {
  for (std::uint64_t seed : {3ull, 11ull, 27ull}) {
    SpaceSpec spec{3, 1000.0};
    auto peers = generate_peers(150, spec, seed);
    std::vector<const Peer*> others;
    for (std::size_t i = 1; i < peers.size(); ++i) others.push_back(&peers[i]);
    auto fast_ids = select_neighbors(peers[0], others, SelectionStrategy::empty_rect());
    std::sort(fast_ids.begin(), fast_ids.end());
    CHECK(fast_ids == oracle::brute_empty_rect(peers[0], others));
  }
}
