#include <catch2/catch_amalgamated.hpp>

#include "geomcast/multicast.hpp"
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

TEST_CASE("build_tree trivial sizes") {
  auto single = make_topology({make_peer(0, {1, 1})}, {{}});
  auto t1 = build_tree(single, 0);
  CHECK(t1.messages_sent == 0);
  CHECK(t1.unreached.empty());
  CHECK(tree_metrics(t1).longest_root_leaf_hops == 0);

  auto two = make_topology({make_peer(0, {1, 1}), make_peer(1, {2, 2})}, {{1}, {0}});
  auto t2 = build_tree(two, 0);
  CHECK(t2.messages_sent == 1);
  CHECK(t2.parent.at(1) == 0);
  CHECK(t2.duplicates == 0);

  CHECK_THROWS_AS(build_tree(two, 99), error);
}

TEST_CASE("build_tree flags unconverged topologies") {
  auto two = make_topology({make_peer(0, {1, 1}), make_peer(1, {2, 2})}, {{1}, {0}});
  two.mark_converged(false);
  CHECK_FALSE(build_tree(two, 0).topology_converged);
}

TEST_CASE("median rule picks the lower median per orthant") {
  // Three same-orthant neighbours at L1 distances 2, 4, 6: the lower median
  // (index ceil(3/2)-1 = 1) is the middle one.
  std::vector<Peer> peers = {make_peer(0, {0, 0}), make_peer(1, {1, 1}),
                             make_peer(2, {2, 2}), make_peer(3, {3, 3})};
  auto topo = make_topology(peers, {{1, 2, 3}, {}, {}, {}});
  auto tree = build_tree(topo, 0);
  CHECK(tree.parent.at(2) == 0);
  CHECK(tree.parent.count(1) == 0);
  CHECK(tree.parent.count(3) == 0);
  CHECK(tree.messages_sent == 1);
  CHECK(tree.unreached == std::set<PeerId>{1, 3});

  // Two neighbours: lower median is the closer one.
  std::vector<Peer> pair = {make_peer(0, {0, 0}), make_peer(1, {1, 1}),
                            make_peer(2, {2, 2})};
  auto topo2 = make_topology(pair, {{1, 2}, {}, {}});
  auto tree2 = build_tree(topo2, 0);
  CHECK(tree2.parent.at(1) == 0);
}

TEST_CASE("full-knowledge empty-rect delivery is exact") {
  SpaceSpec spec{3, 1000.0};
  auto peers = generate_peers(300, spec, 12);
  auto topo = full_knowledge_overlay(peers, SelectionStrategy::empty_rect());
  for (std::uint32_t r = 0; r < 300; r += 23) {
    auto tree = build_tree(topo, topo.peer(r).id);
    CHECK(tree.messages_sent == 299);
    CHECK(tree.duplicates == 0);
    CHECK(tree.unreached.empty());
    CHECK(tree_metrics(tree).children_max <= 8);
  }
}

TEST_CASE("zones nest and contain their peers") {
  SpaceSpec spec{2, 1000.0};
  auto peers = generate_peers(150, spec, 3);
  auto topo = full_knowledge_overlay(peers, SelectionStrategy::empty_rect());
  auto tree = build_tree(topo, peers[0].id);
  for (const auto& [id, zone] : tree.zone_trace) {
    CHECK(zone.rect.contains(topo.peer(topo.index_of(id)).coord));
    auto it = tree.parent.find(id);
    if (it == tree.parent.end()) continue;
    const Zone& parent_zone = tree.zone_trace.at(it->second);
    auto both = intersect(zone.rect, parent_zone.rect);
    REQUIRE(both.has_value());
    CHECK(*both == zone.rect);  // child zone is a subset of the parent zone
  }
}

TEST_CASE("build_tree is deterministic") {
  SpaceSpec spec{2, 1000.0};
  auto peers = generate_peers(120, spec, 31);
  auto topo = full_knowledge_overlay(peers, SelectionStrategy::empty_rect());
  auto a = build_tree(topo, peers[5].id);
  auto b = build_tree(topo, peers[5].id);
  CHECK(a.parent == b.parent);
  CHECK(a.messages_sent == b.messages_sent);
  CHECK(a.zone_trace.size() == b.zone_trace.size());
}

TEST_CASE("verify_step_partition on the direct formula") {
  const Peer p = make_peer(0, {5, 5});
  const Peer q = make_peer(1, {7, 6});
  Zone zp;
  zp.rect.sides = {Interval{0, 10, true, true}, Interval{0, 10, true, true}};
  auto zq = intersect(zp.rect, orthant_rect(p.coord, orthant_of(p.coord, q.coord)));
  REQUIRE(zq.has_value());
  CHECK(zq->sides[0].lo == 5.0);
  CHECK(zq->sides[0].hi == 10.0);
  CHECK(zq->sides[1].lo == 5.0);
  CHECK(zq->sides[1].hi == 10.0);

  std::vector<Peer> all = {p, q};
  auto report = verify_step_partition(p, zp, {{&q, Zone{*zq}}}, all);
  CHECK(report.zones_disjoint);
  CHECK(report.parent_excluded);
  CHECK(report.children_inside_own_zone);
  CHECK(report.coverage_gaps.empty());
}

TEST_CASE("verify_step_partition children in all four orthants are disjoint") {
  const Peer p = make_peer(0, {5, 5});
  std::vector<Peer> children = {make_peer(1, {7, 7}), make_peer(2, {3, 7}),
                                make_peer(3, {3, 3}), make_peer(4, {7, 3})};
  Zone zp{HyperRect::all_space(2)};
  std::vector<std::pair<const Peer*, Zone>> pairs;
  for (const auto& c : children)
    pairs.emplace_back(&c, Zone{orthant_rect(p.coord, orthant_of(p.coord, c.coord))});
  std::vector<Peer> all = children;
  all.push_back(p);
  auto report = verify_step_partition(p, zp, pairs, all);
  CHECK(report.pass());
}

TEST_CASE("verify_step_partition records coverage gaps") {
  const Peer p = make_peer(0, {5, 5});
  const Peer q = make_peer(1, {7, 6});
  const Peer stranded = make_peer(2, {3, 3});  // (-,-) orthant, no child there
  Zone zp{HyperRect::all_space(2)};
  Zone zq{orthant_rect(p.coord, orthant_of(p.coord, q.coord))};
  std::vector<Peer> all = {p, q, stranded};
  auto report = verify_step_partition(p, zp, {{&q, zq}}, all);
  CHECK(report.coverage_gaps == std::vector<PeerId>{2});
  CHECK_FALSE(report.pass());
}

TEST_CASE("every step of a full-knowledge run partitions cleanly") {
  SpaceSpec spec{2, 1000.0};
  auto peers = generate_peers(300, spec, 44);
  auto topo = full_knowledge_overlay(peers, SelectionStrategy::empty_rect());
  for (std::uint32_t r = 0; r < 300; r += 37) {
    auto tree = build_tree(topo, topo.peer(r).id);
    CHECK(oracle::verify_tree_partitions(tree, topo).pass());
  }
}

TEST_CASE("tree_metrics") {
  MulticastTree single;
  single.root = 0;
  single.zone_trace.emplace(0, Zone{HyperRect::all_space(2)});
  auto m0 = tree_metrics(single);
  CHECK(m0.max_tree_degree == 0);
  CHECK(m0.longest_root_leaf_hops == 0);
  CHECK(m0.diameter_hops == 0);

  MulticastTree path;  // 0 -> 1 -> 2, rooted at an end
  path.root = 0;
  path.parent = {{1, 0}, {2, 1}};
  auto m1 = tree_metrics(path);
  CHECK(m1.max_tree_degree == 2);
  CHECK(m1.children_max == 1);
  CHECK(m1.longest_root_leaf_hops == 2);
  CHECK(m1.diameter_hops == 2);

  MulticastTree star;  // root with 3 children
  star.root = 0;
  star.parent = {{1, 0}, {2, 0}, {3, 0}};
  auto m2 = tree_metrics(star);
  CHECK(m2.max_tree_degree == 3);
  CHECK(m2.children_max == 3);
  CHECK(m2.longest_root_leaf_hops == 1);
  CHECK(m2.diameter_hops == 2);
}

TEST_CASE("gossip-mode message accounting") {
  // Sparse hand-built topology where parts of the space go unreached.
  std::vector<Peer> peers = {make_peer(0, {5, 5}), make_peer(1, {7, 6}),
                             make_peer(2, {9, 8}), make_peer(3, {3, 2})};
  auto topo = make_topology(peers, {{1}, {}, {3}, {}});
  auto tree = build_tree(topo, 0);
  CHECK(tree.messages_sent ==
        peers.size() - 1 - tree.unreached.size() + tree.duplicates);
  CHECK(tree.duplicates == 0);
}
