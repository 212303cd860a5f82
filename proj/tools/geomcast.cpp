// geomcast command-line front end: overlay construction, multicast tree
// construction, stability runs, experiment sweeps, and oracle verification.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geomcast/harness.hpp"
#include "geomcast/oracle.hpp"

namespace {

using geomcast::RunConfig;
using nlohmann::json;

void report_error(const std::string& kind, const std::string& msg) {
  json err{{"error", kind}, {"message", msg}};
  std::cerr << err.dump() << "\n";
  std::cerr << "error: " << msg << "\n";
}

void write_report(const std::string& out_path, const json& report) {
  const std::string path = out_path + ".report.json";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw geomcast::error("cannot write " + path);
  os << report.dump(2) << "\n";
}

int finish(const RunConfig& cfg, const geomcast::ExperimentResult& result,
           const std::string& out_path) {
  geomcast::write_csv(result.rows, out_path);
  write_report(out_path, geomcast::run_report(cfg, result));
  int failed = 0;
  for (const auto& [name, ok] : result.assertions)
    if (!ok) {
      ++failed;
      std::cout << "FAIL " << name << "\n";
    }
  std::cout << out_path << ": " << result.rows.size() << " rows, "
            << result.assertions.size() << " assertions, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}

// Single-configuration overlay build, reported per seed.
geomcast::ExperimentResult cmd_overlay(const RunConfig& cfg) {
  cfg.validate();
  geomcast::ExperimentResult result;
  for (int s = 0; s < cfg.num_seeds; ++s) {
    const auto cell_seed = geomcast::derive_seed(cfg.seed, "overlay",
                                                 static_cast<std::uint64_t>(cfg.d),
                                                 static_cast<std::uint64_t>(cfg.n),
                                                 static_cast<std::uint64_t>(s));
    geomcast::SpaceSpec spec{cfg.d, cfg.vmax};
    const auto peers =
        geomcast::generate_peers(static_cast<std::size_t>(cfg.n), spec, cell_seed);
    const auto strategy = cfg.make_strategy(cfg.d);
    auto build = geomcast::build_overlay(peers, cfg, strategy, cell_seed);
    const auto deg = geomcast::topology_metrics(build.topo);
    const std::string run_id = "s" + std::to_string(s);
    auto add = [&](const std::string& name, double value) {
      result.rows.push_back({"overlay", run_id, cell_seed, cfg.n, cfg.d, cfg.k,
                             strategy.name(), name, value});
    };
    add("max_topo_degree", deg.max_degree);
    add("avg_topo_degree", deg.avg_degree);
    add("convergence_rounds", build.convergence_rounds);
    if (build.has_jaccard) add("jaccard_vs_full", build.jaccard_vs_full);
  }
  return result;
}

geomcast::ExperimentResult cmd_multicast(const RunConfig& base) {
  RunConfig cfg = base;
  cfg.experiment = "multicast";
  cfg.validate();
  geomcast::ExperimentResult result;
  std::vector<geomcast::detail::CellOutput> outputs(
      static_cast<std::size_t>(cfg.num_seeds));
  geomcast::parallel_for(cfg.jobs, outputs.size(), [&](std::size_t s) {
    try {
      geomcast::detail::run_multicast_cell(cfg, cfg.d, static_cast<int>(s),
                                           "s" + std::to_string(s), outputs[s]);
    } catch (const std::exception& e) {
      outputs[s].failure = e.what();
    }
  });
  for (auto& out : outputs) {
    if (!out.failure.empty()) throw geomcast::error(out.failure);
    result.rows.insert(result.rows.end(), out.rows.begin(), out.rows.end());
    result.assertions.insert(result.assertions.end(), out.assertions.begin(),
                             out.assertions.end());
  }
  return result;
}

geomcast::ExperimentResult cmd_stability(const RunConfig& base) {
  RunConfig cfg = base;
  cfg.experiment = "stability";
  return geomcast::exp_fig1de(cfg, {cfg.d}, {cfg.k});
}

// Oracle verification: knowledge vs BFS, brute-force equilibrium, step
// partitions, and delivery accounting, over num_seeds seeded instances.
geomcast::ExperimentResult cmd_verify(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.n > static_cast<int>(geomcast::oracle::kDefaultInstanceCap))
    throw geomcast::error("verify: n exceeds the oracle cap of " +
                          std::to_string(geomcast::oracle::kDefaultInstanceCap));
  geomcast::ExperimentResult result;
  for (int s = 0; s < cfg.num_seeds; ++s) {
    const auto cell_seed = geomcast::derive_seed(cfg.seed, "verify",
                                                 static_cast<std::uint64_t>(cfg.d),
                                                 static_cast<std::uint64_t>(cfg.n),
                                                 static_cast<std::uint64_t>(s));
    geomcast::SpaceSpec spec{cfg.d, cfg.vmax};
    const auto peers =
        geomcast::generate_peers(static_cast<std::size_t>(cfg.n), spec, cell_seed);
    const auto strategy = cfg.make_strategy(cfg.d);
    const std::string tag = "s" + std::to_string(s);

    // (a) gossip knowledge sets match limited-hop BFS at the fixed point
    {
      geomcast::Topology topo;
      geomcast::Rng rng(geomcast::derive_seed(cell_seed, "bootstrap"));
      for (std::size_t i = 0; i < peers.size(); ++i) {
        std::vector<geomcast::PeerId> bootstrap;
        if (i > 0)
          bootstrap.push_back(
              topo.peer(static_cast<std::uint32_t>(rng.next_below(i))).id);
        topo.add_peer(peers[i], bootstrap);
      }
      geomcast::GossipConfig gossip{cfg.br, cfg.freshness_rounds};
      geomcast::converge(topo, gossip, strategy, geomcast::KnowledgeMode::Gossip,
                         {cfg.max_rounds, false});
      const auto rep = geomcast::oracle::check_knowledge(topo, cfg.br);
      result.assertions.emplace_back(tag + "/knowledge_vs_bfs", rep.pass());
    }

    // (b)-(d) full-knowledge equilibrium, step partitions, delivery
    const auto topo = geomcast::full_knowledge_overlay(peers, strategy);
    const auto eq = geomcast::oracle::check_full_knowledge_equilibrium(topo, strategy);
    result.assertions.emplace_back(tag + "/equilibrium_vs_brute", eq.pass());

    bool partitions_ok = true, delivery_ok = true;
    for (std::uint32_t r = 0; r < topo.size(); ++r) {
      const auto tree = geomcast::build_tree(topo, topo.peer(r).id);
      if (!geomcast::oracle::verify_tree_partitions(tree, topo).pass())
        partitions_ok = false;
      if (!geomcast::oracle::check_delivery(tree, topo.peers()).pass())
        delivery_ok = false;
    }
    result.assertions.emplace_back(tag + "/step_partitions", partitions_ok);
    result.assertions.emplace_back(tag + "/delivery", delivery_ok);
  }
  return result;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;

  // --config is applied first so explicit flags override file values.
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    std::string path;
    if (arg == "--config" && i + 1 < argc) {
      path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      path = arg.substr(9);
    } else {
      continue;
    }
    std::ifstream is(path);
    if (!is) {
      report_error("usage", "cannot read config file " + path);
      return 2;
    }
    try {
      json j = json::parse(is);
      cfg = j.get<RunConfig>();
    } catch (const std::exception& e) {
      report_error("usage", std::string("bad config file: ") + e.what());
      return 2;
    }
  }

  CLI::App app{"geomcast: geometric P2P overlay and multicast tree simulator"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path, out_path = "geomcast_out.csv", experiment_id = cfg.experiment;
  app.add_option("--config", config_path, "JSON config file (keys mirror flag names)");
  app.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  app.add_option("--num-seeds", cfg.num_seeds, "seeds per configuration")
      ->capture_default_str();
  app.add_option("--n", cfg.n, "peer count")->capture_default_str();
  app.add_option("--d", cfg.d, "dimension count")->capture_default_str();
  app.add_option("--vmax", cfg.vmax, "coordinate upper bound")->capture_default_str();
  app.add_option("--br", cfg.br, "gossip hop radius (>= 2)")->capture_default_str();
  app.add_option("--freshness-rounds", cfg.freshness_rounds,
                 "rounds a knowledge entry survives unheard")
      ->capture_default_str();
  app.add_option("--k", cfg.k, "per-region neighbour count")->capture_default_str();
  app.add_option("--strategy", cfg.strategy,
                 "empty-rect | ortho-hp | gen-hp | k-closest")
      ->capture_default_str();
  app.add_option("--knowledge", cfg.knowledge, "gossip | full")->capture_default_str();
  app.add_option("--insertion", cfg.insertion, "incremental | batch")
      ->capture_default_str();
  app.add_option("--distance", cfg.distance, "l1 | l2")->capture_default_str();
  app.add_option("--time-coord-index", cfg.time_coord_index,
                 "1-based lifetime coordinate index")
      ->capture_default_str();
  app.add_option("--max-rounds", cfg.max_rounds, "convergence round cap (0 = 10*N)")
      ->capture_default_str();
  app.add_option("--jobs", cfg.jobs, "worker threads (0 = machine parallelism)")
      ->capture_default_str();
  app.add_option("--root-sample", cfg.root_sample,
                 "multicast roots per run (0 = all at N<=300, else 50)")
      ->capture_default_str();
  app.add_option("--out", out_path, "output CSV path")->capture_default_str();

  auto* sub_overlay = app.add_subcommand("overlay", "build one overlay configuration");
  auto* sub_multicast =
      app.add_subcommand("multicast", "build an overlay and multicast trees");
  auto* sub_stability =
      app.add_subcommand("stability", "lifetime-embedded stability trees");
  auto* sub_experiment = app.add_subcommand("experiment", "run an experiment sweep");
  sub_experiment->add_option("--id", experiment_id, "fig1ab | fig1c | fig1de")
      ->capture_default_str();
  auto* sub_verify =
      app.add_subcommand("verify", "run all oracle checks at small scale");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (sub_experiment->parsed()) cfg.experiment = experiment_id;
  try {
    cfg.validate();
    if (sub_experiment->parsed() && cfg.experiment != "fig1ab" &&
        cfg.experiment != "fig1c" && cfg.experiment != "fig1de")
      throw geomcast::error("unknown experiment id: " + cfg.experiment);
  } catch (const geomcast::error& e) {
    report_error("usage", e.what());
    return 2;
  }

  try {
    geomcast::ExperimentResult result;
    if (sub_overlay->parsed()) {
      result = cmd_overlay(cfg);
    } else if (sub_multicast->parsed()) {
      result = cmd_multicast(cfg);
    } else if (sub_stability->parsed()) {
      result = cmd_stability(cfg);
    } else if (sub_experiment->parsed()) {
      result = geomcast::run_experiment(cfg);
    } else if (sub_verify->parsed()) {
      result = cmd_verify(cfg);
    }
    return finish(cfg, result, out_path);
  } catch (const geomcast::non_convergence& e) {
    report_error("non_convergence", e.what());
    return 1;
  } catch (const geomcast::error& e) {
    report_error("run", e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 1;
  }
}
