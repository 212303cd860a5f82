#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "geomcast/multicast.hpp"
#include "geomcast/oracle.hpp"
#include "geomcast/overlay.hpp"
#include "geomcast/random.hpp"
#include "geomcast/stability.hpp"

namespace geomcast {

struct RunConfig {
  std::string experiment = "fig1ab";
  std::uint64_t seed = 1;       // master seed; per-cell seeds are derived
  int num_seeds = 10;
  int n = 1000;
  int d = 2;
  double vmax = 1000.0;
  int br = 2;
  int freshness_rounds = 2;
  int k = 1;
  std::string strategy = "empty-rect";   // empty-rect|ortho-hp|gen-hp|k-closest
  std::string knowledge = "full";        // gossip|full
  std::string insertion = "batch";       // incremental|batch
  std::string distance = "l1";           // l1|l2
  int time_coord_index = 1;
  int max_rounds = 0;                    // 0 -> 10 * N
  int jobs = 0;                          // 0 -> hardware concurrency
  int root_sample = 0;                   // roots per multicast sweep; 0 -> all (N<=300) or 50

  KnowledgeMode knowledge_mode() const {
    if (knowledge == "gossip") return KnowledgeMode::Gossip;
    if (knowledge == "full") return KnowledgeMode::Full;
    throw error("unknown knowledge mode: " + knowledge);
  }

  Distance distance_metric() const {
    if (distance == "l1") return Distance::L1;
    if (distance == "l2") return Distance::L2;
    throw error("unknown distance: " + distance);
  }

  bool incremental() const {
    if (insertion == "incremental") return true;
    if (insertion == "batch") return false;
    throw error("unknown insertion mode: " + insertion);
  }

  SelectionStrategy make_strategy(int dim) const {
    if (strategy == "empty-rect") return SelectionStrategy::empty_rect();
    if (strategy == "ortho-hp")
      return SelectionStrategy::orthogonal_hp(k, distance_metric());
    if (strategy == "gen-hp")
      return SelectionStrategy::general_hp(HyperplaneSet::full_family(dim), k,
                                           distance_metric());
    if (strategy == "k-closest") return SelectionStrategy::k_closest(k, distance_metric());
    throw error("unknown strategy: " + strategy);
  }

  void validate() const {
    if (num_seeds < 1) throw error("num_seeds must be >= 1");
    if (n < 1) throw error("n must be >= 1");
    if (d < 1) throw error("d must be >= 1");
    if (!(vmax > 0)) throw error("vmax must be positive");
    if (br < 2) throw error("br must be >= 2");
    if (k < 1) throw error("k must be >= 1");
    knowledge_mode();
    distance_metric();
    incremental();
    (void)make_strategy(d);
  }
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{{"experiment", c.experiment},
                     {"seed", c.seed},
                     {"num_seeds", c.num_seeds},
                     {"n", c.n},
                     {"d", c.d},
                     {"vmax", c.vmax},
                     {"br", c.br},
                     {"freshness_rounds", c.freshness_rounds},
                     {"k", c.k},
                     {"strategy", c.strategy},
                     {"knowledge", c.knowledge},
                     {"insertion", c.insertion},
                     {"distance", c.distance},
                     {"time_coord_index", c.time_coord_index},
                     {"max_rounds", c.max_rounds},
                     {"jobs", c.jobs},
                     {"root_sample", c.root_sample}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  c.experiment = j.value("experiment", c.experiment);
  c.seed = j.value("seed", c.seed);
  c.num_seeds = j.value("num_seeds", c.num_seeds);
  c.n = j.value("n", c.n);
  c.d = j.value("d", c.d);
  c.vmax = j.value("vmax", c.vmax);
  c.br = j.value("br", c.br);
  c.freshness_rounds = j.value("freshness_rounds", c.freshness_rounds);
  c.k = j.value("k", c.k);
  c.strategy = j.value("strategy", c.strategy);
  c.knowledge = j.value("knowledge", c.knowledge);
  c.insertion = j.value("insertion", c.insertion);
  c.distance = j.value("distance", c.distance);
  c.time_coord_index = j.value("time_coord_index", c.time_coord_index);
  c.max_rounds = j.value("max_rounds", c.max_rounds);
  c.jobs = j.value("jobs", c.jobs);
  c.root_sample = j.value("root_sample", c.root_sample);
}

struct MetricsRow {
  std::string experiment;
  std::string run_id;
  std::uint64_t seed = 0;
  int n = 0;
  int d = 0;
  int k = 0;
  std::string strategy;
  std::string metric_name;
  double value = 0.0;

  auto key() const {
    return std::tie(experiment, run_id, seed, n, d, k, strategy, metric_name);
  }
};

inline void write_csv(std::vector<MetricsRow> rows, std::ostream& os) {
  std::sort(rows.begin(), rows.end(),
            [](const MetricsRow& a, const MetricsRow& b) { return a.key() < b.key(); });
  os << "experiment,run_id,seed,N,D,K,strategy,metric_name,value\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f", r.value);
    os << r.experiment << ',' << r.run_id << ',' << r.seed << ',' << r.n << ',' << r.d
       << ',' << r.k << ',' << r.strategy << ',' << r.metric_name << ',' << buf << '\n';
  }
}

inline void write_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw error("cannot write " + path);
  write_csv(rows, os);
}

// ---------------------------------------------------------------------------
// Parallel sweep utility: cells are independent jobs; results land in
// per-cell slots, so the merged output is scheduling-independent.

template <typename F>
inline void parallel_for(int jobs, std::size_t count, F&& f) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  if (jobs == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      f(i);
    }
  };
  std::vector<std::thread> threads;
  const int nthreads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  for (int t = 0; t < nthreads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

// ---------------------------------------------------------------------------
// Overlay construction per run configuration

struct OverlayBuild {
  Topology topo;
  int convergence_rounds = 0;      // rounds of the final convergence
  double jaccard_vs_full = 1.0;    // incremental mode only
  bool has_jaccard = false;
};

inline OverlayBuild build_overlay(const std::vector<Peer>& peers, const RunConfig& cfg,
                                  const SelectionStrategy& strategy,
                                  std::uint64_t cell_seed) {
  GossipConfig gossip{cfg.br, cfg.freshness_rounds};
  const KnowledgeMode mode = cfg.knowledge_mode();
  ConvergeOptions opts;
  opts.max_rounds = cfg.max_rounds;

  OverlayBuild result;
  if (cfg.incremental()) {
    // Peers enter one at a time, each bootstrapped to one random existing
    // peer, and the overlay converges after every insertion.
    Rng rng(derive_seed(cell_seed, "bootstrap"));
    for (std::size_t i = 0; i < peers.size(); ++i) {
      std::vector<PeerId> bootstrap;
      if (i > 0) {
        const auto pick = static_cast<std::uint32_t>(rng.next_below(i));
        bootstrap.push_back(result.topo.peer(pick).id);
      }
      result.topo.add_peer(peers[i], bootstrap);
      result.convergence_rounds = converge(result.topo, gossip, strategy, mode, opts);
    }
    const Topology reference = full_knowledge_overlay(peers, strategy);
    result.jaccard_vs_full = topology_jaccard(result.topo, reference);
    result.has_jaccard = true;
  } else {
    // Batch: all peers enter at once, each bootstrapped to one random
    // earlier peer, followed by a single convergence.
    Rng rng(derive_seed(cell_seed, "bootstrap"));
    for (std::size_t i = 0; i < peers.size(); ++i) {
      std::vector<PeerId> bootstrap;
      if (i > 0)
        bootstrap.push_back(
            result.topo.peer(static_cast<std::uint32_t>(rng.next_below(i))).id);
      result.topo.add_peer(peers[i], bootstrap);
    }
    result.convergence_rounds = converge(result.topo, gossip, strategy, mode, opts);
  }
  return result;
}

// Evenly spaced deterministic root sample; 0 picks the documented default
// (all roots at N <= 300, 50 otherwise).
inline std::vector<std::uint32_t> sample_roots(std::size_t n, int root_sample) {
  std::size_t want = root_sample > 0 ? static_cast<std::size_t>(root_sample)
                                     : (n <= 300 ? n : 50);
  want = std::min(want, n);
  std::vector<std::uint32_t> roots;
  roots.reserve(want);
  for (std::size_t i = 0; i < want; ++i)
    roots.push_back(static_cast<std::uint32_t>(i * n / want));
  return roots;
}

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  std::vector<std::pair<std::string, bool>> assertions;

  bool all_pass() const {
    for (const auto& [name, ok] : assertions)
      if (!ok) return false;
    return true;
  }
};

namespace detail {

struct CellOutput {
  std::vector<MetricsRow> rows;
  std::vector<std::pair<std::string, bool>> assertions;
  std::string failure;  // non-empty when the cell threw
};

// Topology degree sweep + multicast sessions for one overlay cell.
inline void run_multicast_cell(const RunConfig& cfg, int d, int seed_idx,
                               const std::string& run_id, CellOutput& out) {
  const std::uint64_t cell_seed = derive_seed(cfg.seed, cfg.experiment,
                                              static_cast<std::uint64_t>(d),
                                              static_cast<std::uint64_t>(cfg.n),
                                              static_cast<std::uint64_t>(seed_idx));
  SpaceSpec spec{d, cfg.vmax};
  const auto peers = generate_peers(static_cast<std::size_t>(cfg.n), spec, cell_seed);
  const auto strategy = cfg.make_strategy(d);
  auto build = build_overlay(peers, cfg, strategy, cell_seed);

  auto add = [&](const std::string& name, double value) {
    out.rows.push_back({cfg.experiment, run_id, cell_seed, cfg.n, d, cfg.k,
                        strategy.name(), name, value});
  };
  const auto deg = topology_metrics(build.topo);
  add("max_topo_degree", deg.max_degree);
  add("avg_topo_degree", deg.avg_degree);
  add("convergence_rounds", build.convergence_rounds);
  if (build.has_jaccard) add("jaccard_vs_full", build.jaccard_vs_full);

  const auto roots = sample_roots(peers.size(), cfg.root_sample);
  const bool full = cfg.knowledge_mode() == KnowledgeMode::Full;
  const int child_bound = d < 30 ? (1 << d) : std::numeric_limits<int>::max();

  std::uint64_t duplicates = 0;
  double msg_sum = 0, unreached_sum = 0, path_sum = 0;
  int path_max = 0, children_max = 0;
  bool delivery_ok = true, accounting_ok = true, children_ok = true;
  for (auto r : roots) {
    const auto tree = build_tree(build.topo, build.topo.peer(r).id);
    const auto tm = tree_metrics(tree);
    duplicates += tree.duplicates;
    msg_sum += static_cast<double>(tree.messages_sent);
    unreached_sum += static_cast<double>(tree.unreached.size());
    path_sum += tm.longest_root_leaf_hops;
    path_max = std::max(path_max, tm.longest_root_leaf_hops);
    children_max = std::max(children_max, tm.children_max);
    if (tm.children_max > child_bound) children_ok = false;
    if (tree.messages_sent !=
        static_cast<std::uint64_t>(peers.size()) - 1 - tree.unreached.size() +
            tree.duplicates)
      accounting_ok = false;
    if (full && strategy.kind == SelectionStrategy::Kind::EmptyRect &&
        (tree.messages_sent != peers.size() - 1 || tree.duplicates != 0 ||
         !tree.unreached.empty()))
      delivery_ok = false;
  }
  const auto nroots = static_cast<double>(roots.size());
  add("messages_sent", msg_sum / nroots);
  add("duplicates", static_cast<double>(duplicates));
  add("unreached", unreached_sum / nroots);
  add("max_root_leaf_path", path_max);
  add("avg_max_root_leaf_path", path_sum / nroots);
  add("children_max", children_max);

  out.assertions.emplace_back(run_id + "/children_bound", children_ok);
  out.assertions.emplace_back(run_id + "/message_accounting", accounting_ok);
  if (full && strategy.kind == SelectionStrategy::Kind::EmptyRect)
    out.assertions.emplace_back(run_id + "/exact_delivery", delivery_ok);
}

}  // namespace detail

// N=1000-style sweep over D=2..5: overlay degree metrics plus multicast
// sessions from sampled (or all) roots.
inline ExperimentResult exp_fig1ab(const RunConfig& cfg) {
  cfg.validate();
  struct Cell {
    int d;
    int seed_idx;
    std::string run_id;
  };
  std::vector<Cell> cells;
  for (int d = 2; d <= 5; ++d)
    for (int s = 0; s < cfg.num_seeds; ++s)
      cells.push_back({d, s, "d" + std::to_string(d) + "_s" + std::to_string(s)});

  std::vector<detail::CellOutput> outputs(cells.size());
  parallel_for(cfg.jobs, cells.size(), [&](std::size_t i) {
    try {
      detail::run_multicast_cell(cfg, cells[i].d, cells[i].seed_idx, cells[i].run_id,
                                 outputs[i]);
    } catch (const std::exception& e) {
      outputs[i].failure = e.what();
    }
  });

  ExperimentResult result;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!outputs[i].failure.empty())
      throw error("cell " + cells[i].run_id + " failed: " + outputs[i].failure);
    result.rows.insert(result.rows.end(), outputs[i].rows.begin(), outputs[i].rows.end());
    result.assertions.insert(result.assertions.end(), outputs[i].assertions.begin(),
                             outputs[i].assertions.end());
  }
  return result;
}

// D=2 degree growth over the peer-count sweep.
inline ExperimentResult exp_fig1c(const RunConfig& cfg) {
  cfg.validate();
  // Reduced preset below the oracle cap, standard sweep otherwise.
  const std::vector<int> sweep = cfg.n <= 300 ? std::vector<int>{50, 100, 200, 300}
                                              : std::vector<int>{100, 500, 1000, 2000, 5000};
  struct Cell {
    int n;
    int seed_idx;
    std::string run_id;
  };
  std::vector<Cell> cells;
  for (int n : sweep)
    for (int s = 0; s < cfg.num_seeds; ++s)
      cells.push_back({n, s, "n" + std::to_string(n) + "_s" + std::to_string(s)});

  std::vector<detail::CellOutput> outputs(cells.size());
  parallel_for(cfg.jobs, cells.size(), [&](std::size_t i) {
    auto& out = outputs[i];
    try {
      const auto& cell = cells[i];
      const std::uint64_t cell_seed =
          derive_seed(cfg.seed, cfg.experiment, static_cast<std::uint64_t>(cell.n), 2,
                      static_cast<std::uint64_t>(cell.seed_idx));
      SpaceSpec spec{2, cfg.vmax};
      const auto peers = generate_peers(static_cast<std::size_t>(cell.n), spec, cell_seed);
      const auto strategy = cfg.make_strategy(2);
      auto build = build_overlay(peers, cfg, strategy, cell_seed);
      const auto deg = topology_metrics(build.topo);
      out.rows.push_back({cfg.experiment, cell.run_id, cell_seed, cell.n, 2, cfg.k,
                          strategy.name(), "max_topo_degree",
                          static_cast<double>(deg.max_degree)});
      out.rows.push_back({cfg.experiment, cell.run_id, cell_seed, cell.n, 2, cfg.k,
                          strategy.name(), "avg_topo_degree", deg.avg_degree});
    } catch (const std::exception& e) {
      out.failure = e.what();
    }
  });

  ExperimentResult result;
  std::map<int, std::map<int, double>> avg_by_seed;  // seed_idx -> n -> avg degree
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!outputs[i].failure.empty())
      throw error("cell " + cells[i].run_id + " failed: " + outputs[i].failure);
    for (const auto& row : outputs[i].rows) {
      result.rows.push_back(row);
      if (row.metric_name == "avg_topo_degree")
        avg_by_seed[cells[i].seed_idx][cells[i].n] = row.value;
    }
  }

  // Per seed: avg_degree / log2(N) within a factor of 2 across the sweep,
  // and sublinear monotone growth.
  for (const auto& [seed_idx, by_n] : avg_by_seed) {
    double ratio_min = kInf, ratio_max = -kInf;
    bool sublinear = true;
    const int n_lo = by_n.begin()->first;
    const double deg_lo = by_n.begin()->second;
    double prev_avg = -kInf;
    for (const auto& [n, avg] : by_n) {
      const double ratio = avg / std::log2(static_cast<double>(n));
      ratio_min = std::min(ratio_min, ratio);
      ratio_max = std::max(ratio_max, ratio);
      if (n > n_lo && avg / deg_lo >= static_cast<double>(n) / n_lo) sublinear = false;
      if (avg < prev_avg) sublinear = false;
      prev_avg = avg;
    }
    const std::string tag = "s" + std::to_string(seed_idx);
    result.assertions.emplace_back(tag + "/log_ratio_factor2", ratio_max <= 2.0 * ratio_min);
    result.assertions.emplace_back(tag + "/sublinear_growth", sublinear);
  }
  return result;
}

// Stability-tree grid: embed lifetimes, build the overlay with orthogonal
// hyperplanes, derive preferred links, verify, and simulate departures.
inline ExperimentResult exp_fig1de(const RunConfig& cfg,
                                   std::vector<int> d_values = {2, 3, 5, 7, 10},
                                   std::vector<int> k_values = {1, 2, 5, 10, 20, 50}) {
  cfg.validate();
  struct Cell {
    int d;
    int k;
    int seed_idx;
    std::string run_id;
  };
  std::vector<Cell> cells;
  for (int d : d_values)
    for (int k : k_values)
      for (int s = 0; s < cfg.num_seeds; ++s)
        cells.push_back({d, k, s,
                         "d" + std::to_string(d) + "_k" + std::to_string(k) + "_s" +
                             std::to_string(s)});

  std::vector<detail::CellOutput> outputs(cells.size());
  parallel_for(cfg.jobs, cells.size(), [&](std::size_t i) {
    auto& out = outputs[i];
    try {
      const auto& cell = cells[i];
      const std::uint64_t cell_seed =
          derive_seed(cfg.seed, cfg.experiment, static_cast<std::uint64_t>(cell.d),
                      static_cast<std::uint64_t>(cell.k),
                      static_cast<std::uint64_t>(cell.seed_idx));
      SpaceSpec spec{cell.d, cfg.vmax};
      auto peers = generate_peers(static_cast<std::size_t>(cfg.n), spec, cell_seed, true);
      StabilityConfig stab{cfg.time_coord_index};
      embed_lifetimes(peers, stab, spec);
      const auto strategy = SelectionStrategy::orthogonal_hp(cell.k, cfg.distance_metric());
      auto build = build_overlay(peers, cfg, strategy, cell_seed);

      const auto tree = build_stability_tree(build.topo);
      const auto mono = verify_monotone(tree, build.topo.peers());
      const auto departures = simulate_departures(tree, build.topo.peers());

      auto add = [&](const std::string& name, double value) {
        out.rows.push_back({cfg.experiment, cell.run_id, cell_seed, cfg.n, cell.d, cell.k,
                            strategy.name(), name, value});
      };
      add("is_single_tree", tree.is_single_tree ? 1.0 : 0.0);
      add("stab_tree_max_degree", mono.max_degree);
      add("tree_diameter", mono.diameter_hops);
      add("convergence_rounds", build.convergence_rounds);
      if (build.has_jaccard) add("jaccard_vs_full", build.jaccard_vs_full);

      out.assertions.emplace_back(cell.run_id + "/single_tree", tree.is_single_tree);
      out.assertions.emplace_back(cell.run_id + "/monotone_lifetimes", mono.pass);
      out.assertions.emplace_back(cell.run_id + "/leaf_departures",
                                  departures.all_departures_were_leaves &&
                                      departures.disconnections == 0);
    } catch (const std::exception& e) {
      out.failure = e.what();
    }
  });

  ExperimentResult result;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!outputs[i].failure.empty())
      throw error("cell " + cells[i].run_id + " failed: " + outputs[i].failure);
    result.rows.insert(result.rows.end(), outputs[i].rows.begin(), outputs[i].rows.end());
    result.assertions.insert(result.assertions.end(), outputs[i].assertions.begin(),
                             outputs[i].assertions.end());
  }
  return result;
}

inline ExperimentResult run_experiment(const RunConfig& cfg) {
  if (cfg.experiment == "fig1ab") return exp_fig1ab(cfg);
  if (cfg.experiment == "fig1c") return exp_fig1c(cfg);
  if (cfg.experiment == "fig1de") return exp_fig1de(cfg);
  throw error("unknown experiment id: " + cfg.experiment);
}

// Deterministic run report: config echo plus per-assertion pass/fail.
// Timing is intentionally excluded so identical runs serialize identically.
inline nlohmann::json run_report(const RunConfig& cfg, const ExperimentResult& result) {
  nlohmann::json assertions = nlohmann::json::array();
  for (const auto& [name, ok] : result.assertions)
    assertions.push_back({{"name", name}, {"pass", ok}});
  return nlohmann::json{{"experiment", cfg.experiment},
                        {"config", cfg},
                        {"rows", result.rows.size()},
                        {"assertions", assertions},
                        {"all_pass", result.all_pass()}};
}

}  // namespace geomcast
