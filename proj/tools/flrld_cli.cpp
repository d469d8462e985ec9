// flrld: desk-scale route-leak-detection experiments on AS topologies.
//
// Subcommands: ingest, gen-triples, train, deploy-analysis, cost.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 invariant violation.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "flrld/experiment.hpp"
#include "flrld/flrld.hpp"

namespace fs = std::filesystem;
using namespace flrld;

namespace {

// Missing or contradictory flags; exits with the usage code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TopologyCliOptions {
  std::string file;
  std::string synthetic;
};

void add_topology_flags(CLI::App* cmd, TopologyCliOptions& opts) {
  auto* file = cmd->add_option("--topology", opts.file,
                               "AS relationship file (CAIDA serial-1, optionally .gz)");
  auto* synthetic =
      cmd->add_option("--synthetic", opts.synthetic,
                      "synthetic topology spec, e.g. n=400,seed=7[,peer_prob=0.3,...]");
  file->excludes(synthetic);
}

SyntheticParams parse_synthetic_spec(const std::string& spec) {
  SyntheticParams p;
  for (const std::string& field : detail::split(spec, ',')) {
    if (field.empty()) continue;
    auto eq = field.find('=');
    if (eq == std::string::npos) throw DataError("synthetic spec wants key=value: " + field);
    std::string key = field.substr(0, eq);
    std::string value = field.substr(eq + 1);
    try {
      if (key == "n" || key == "nodes") p.nodes = std::uint32_t(std::stoul(value));
      else if (key == "seed") p.seed = std::stoull(value);
      else if (key == "core") p.core_size = std::uint32_t(std::stoul(value));
      else if (key == "max_providers") p.max_providers = std::uint32_t(std::stoul(value));
      else if (key == "extra_provider_prob") p.extra_provider_prob = std::stod(value);
      else if (key == "peer_prob") p.peer_prob = std::stod(value);
      else if (key == "peer_geometric_p") p.peer_geometric_p = std::stod(value);
      else if (key == "hub_prob") p.hub_prob = std::stod(value);
      else if (key == "hub_peer_frac") p.hub_peer_frac = std::stod(value);
      else if (key == "triadic_closure_prob") p.triadic_closure_prob = std::stod(value);
      else throw DataError("unknown synthetic key: " + key);
    } catch (const std::invalid_argument&) {
      throw DataError("bad value for synthetic key " + key + ": " + value);
    }
  }
  return p;
}

TopologySpec topology_spec_from(const TopologyCliOptions& opts) {
  TopologySpec spec;
  if (!opts.file.empty()) {
    spec.kind = TopologySpec::Kind::File;
    spec.path = opts.file;
  } else if (!opts.synthetic.empty()) {
    spec.kind = TopologySpec::Kind::Synthetic;
    spec.synthetic = parse_synthetic_spec(opts.synthetic);
  } else {
    throw UsageError("one of --topology or --synthetic is required");
  }
  return spec;
}

ParticipantSpec parse_participants(const std::string& text) {
  ParticipantSpec spec;
  if (text.empty()) return spec;
  auto fields = detail::split(text, ':');
  if (fields[0] == "all") {
    spec.kind = ParticipantSpec::Kind::All;
  } else if (fields[0] == "top") {
    spec.kind = ParticipantSpec::Kind::TopDegree;
    if (fields.size() > 1) spec.top_k = std::stoul(fields[1]);
  } else if (fields[0] == "band") {
    spec.kind = ParticipantSpec::Kind::DegreeBand;
    if (fields.size() < 2) throw DataError("band spec wants band:MIN-MAX[:K[:MAXCUST]]");
    auto range = detail::split(fields[1], '-');
    if (range.size() != 2) throw DataError("band range wants MIN-MAX");
    spec.min_degree = std::stoul(range[0]);
    spec.max_degree = std::stoul(range[1]);
    if (fields.size() > 2) spec.top_k = std::stoul(fields[2]);
    if (fields.size() > 3) spec.max_customers = std::stoul(fields[3]);
  } else {
    throw DataError("participants spec must start with all, top, or band");
  }
  return spec;
}

fs::path output_root() {
  if (const char* env = std::getenv("FLRLD_OUT")) return fs::path(env);
  return fs::path("flrld-out");
}

std::string topology_summary(const AsGraph& g, const std::vector<std::string>& warnings) {
  std::ostringstream out;
  out << g.node_count() << " ASes, " << g.edge_count() << " links ("
      << g.p2p_count() << " p2p, " << g.p2c_count() << " p2c), "
      << g.component_count() << " connected component"
      << (g.component_count() == 1 ? "" : "s");
  for (const std::string& w : warnings) out << "\nwarning: " << w;
  return out.str();
}

// --------------------------------------------------------------------------
// ingest

int cmd_ingest(const TopologyCliOptions& topo, const std::string& out_dir) {
  std::vector<std::string> warnings;
  TopologySpec spec = topology_spec_from(topo);
  AsGraph g = load_topology(spec, &warnings);
  std::cout << topology_summary(g, warnings) << "\n";
  if (spec.kind == TopologySpec::Kind::Synthetic)
    std::cout << "generated: " << spec.synthetic.describe() << "\n";
  if (!out_dir.empty()) {
    RunDirectory run(out_dir);
    std::vector<std::string> header;
    if (spec.kind == TopologySpec::Kind::Synthetic)
      header.push_back(spec.synthetic.describe());
    std::ofstream canon(run.file("topology.txt"));
    serialize_as_rel(g, canon, header);
    run.write_input_digest(g);
    std::cout << "wrote " << run.file("topology.txt").string() << "\n";
  }
  return 0;
}

// --------------------------------------------------------------------------
// gen-triples

int cmd_gen_triples(const ExperimentConfig& config, const std::string& out_dir) {
  PreparedExperiment prep = prepare_experiment(config);
  RunDirectory run(out_dir);
  run.write_config(config);
  run.write_input_digest(prep.graph);

  for (const ClientDataset& client : prep.clients) {
    std::ofstream out(run.file("client" + std::to_string(client.id) + ".csv"));
    write_dataset(client, out,
                  {"client " + std::to_string(client.id) + " of group preset " +
                   std::to_string(config.group)});
  }
  DistributionReport report = dataset_distribution(prep.clients);
  {
    std::ofstream out(run.file("distribution.csv"));
    out << "client,total,malicious,regular,malicious_pct,regular_pct,inference_fraction,"
           "inference_reverse_fraction\n";
    for (const ClientDistribution& c : report.per_client)
      out << c.id << ',' << c.total << ',' << c.malicious << ',' << c.regular << ','
          << c.malicious_pct << ',' << c.regular_pct << ',' << c.inference_fraction << ','
          << c.inference_reverse_fraction << '\n';
    out << "aggregate," << report.aggregate.total << ',' << report.aggregate.malicious << ','
        << report.aggregate.regular << ',' << report.aggregate.malicious_pct << ','
        << report.aggregate.regular_pct << ',' << report.aggregate.inference_fraction << ','
        << report.aggregate.inference_reverse_fraction << '\n';
  }
  {
    NetworkDistribution census = triple_distribution_report(prep.graph);
    std::ofstream out(run.file("network_distribution.csv"));
    write_distribution_csv(census, out);
    std::cout << "network malicious share " << census.malicious_share
              << ", median per-AS inference fraction " << census.median_inference_fraction
              << "\n";
  }
  std::cout << "group " << config.group << ": " << report.aggregate.total << " samples, "
            << report.aggregate.malicious_pct << "% malicious across 5 clients\n";
  for (const ClientDistribution& c : report.per_client)
    std::cout << "  client " << c.id << ": " << c.total << " samples, " << c.malicious_pct
              << "% malicious\n";
  std::cout << "wrote " << run.root().string() << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// train

int cmd_train(const ExperimentConfig& config, const std::string& mode,
              const std::string& out_dir) {
  const std::set<std::string> known{"fl",   "central",   "compare",
                                    "ml-0", "ml-random", "ml-1"};
  if (!known.count(mode) && mode.rfind("single:", 0) != 0)
    throw UsageError("unknown mode: " + mode);
  PreparedExperiment prep = prepare_experiment(config);
  RunDirectory run(out_dir);
  run.write_config(config);
  run.write_input_digest(prep.graph);

  std::vector<ModeResult> results;
  auto run_one = [&](const std::string& m) {
    if (m == "fl") {
      Ledger ledger(config.ledger);
      ModeResult r = run_fl_mode(prep, config, ledger);
      ChainVerdict verdict = ledger.verify_chain();
      if (!verdict.ok) throw InvariantError("ledger verification failed after training");
      ModelParams replayed = replay_chain(ledger);
      if (replayed.values != r.params->values)
        throw InvariantError("ledger replay does not reproduce the trained model");
      ledger.export_chain_file(run.file("ledger.flc"));
      ledger.store().export_directory(run.file("store"));
      {
        std::ofstream history(run.file("history.jsonl"));
        write_history_jsonl(r.fl->history, history);
      }
      Bytes blob = serialize_params(*r.params);
      std::ofstream model(run.file("model.flp"), std::ios::binary);
      model.write(reinterpret_cast<const char*>(blob.data()), std::streamsize(blob.size()));
      results.push_back(std::move(r));
    } else if (m == "central") {
      results.push_back(run_central_mode(prep, config));
    } else if (m.rfind("single:", 0) == 0) {
      std::string index = m.substr(7);
      if (index.empty() || index.find_first_not_of("0123456789") != std::string::npos)
        throw UsageError("single mode wants single:<client 1-5>, got " + m);
      results.push_back(run_single_mode(prep, config, std::stoi(index)));
    } else if (m == "ml-random") {
      results.push_back(run_repository_mode(prep, config, RepoPolicy::Random));
    } else if (m == "ml-0") {
      results.push_back(run_repository_mode(prep, config, RepoPolicy::AllMalicious));
    } else if (m == "ml-1") {
      results.push_back(run_repository_mode(prep, config, RepoPolicy::AllRegular));
    } else {
      throw UsageError("unknown mode: " + m);
    }
  };

  if (mode == "compare") {
    for (const char* m : {"fl", "central", "single:1", "single:2", "single:3", "single:4",
                          "single:5", "ml-random", "ml-0", "ml-1"})
      run_one(m);
  } else {
    run_one(mode);
  }

  std::ofstream csv(run.file("metrics.csv"));
  write_metrics_csv_header(csv);
  std::cout << "mode        accuracy precision recall  f1\n";
  for (const ModeResult& r : results) {
    write_metrics_csv_row(csv, r.mode, r.metrics);
    char line[160];
    std::snprintf(line, sizeof line, "%-11s %.4f   %.4f    %.4f  %.4f", r.mode.c_str(),
                  r.metrics.accuracy, r.metrics.precision, r.metrics.recall, r.metrics.f1);
    std::cout << line << "\n";
  }
  std::cout << "wrote " << run.root().string() << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// deploy-analysis

int cmd_deploy_analysis(const TopologyCliOptions& topo, const std::string& strategies_csv,
                        const std::string& rates_csv, const std::string& out_dir) {
  TopologySpec spec = topology_spec_from(topo);
  AsGraph g = load_topology(spec);
  std::vector<DeployStrategy> strategies;
  for (const std::string& s : detail::split(strategies_csv, ',')) {
    if (s == "peer") strategies.push_back(DeployStrategy::Peer);
    else if (s == "customer") strategies.push_back(DeployStrategy::Customer);
    else if (s == "provider") strategies.push_back(DeployStrategy::Provider);
    else if (!s.empty()) throw DataError("unknown strategy: " + s);
  }
  if (strategies.empty()) throw DataError("no strategies given");
  std::vector<double> rates;
  for (const std::string& r : detail::split(rates_csv, ','))
    if (!r.empty()) rates.push_back(std::stod(r));
  if (rates.empty()) throw DataError("no rates given");

  std::vector<CoverageCurve> curves;
  for (DeployStrategy s : strategies) curves.push_back(deployment_coverage(g, s, rates));

  for (const CoverageCurve& curve : curves) {
    std::cout << to_string(curve.strategy) << " strategy (total malicious "
              << curve.total_malicious << "):\n";
    for (const CoveragePoint& p : curve.points) {
      char line[120];
      std::snprintf(line, sizeof line, "  rate %.5f -> %zu ASes, coverage %.4f", p.rate,
                    p.deployed, p.coverage);
      std::cout << line << "\n";
    }
  }
  if (!out_dir.empty()) {
    RunDirectory run(out_dir);
    run.write_input_digest(g);
    std::ofstream out(run.file("coverage.csv"));
    write_coverage_csv(curves, out);
    std::cout << "wrote " << run.file("coverage.csv").string() << "\n";
  }
  return 0;
}

// --------------------------------------------------------------------------
// cost

int cmd_cost(const std::string& params_path, bool per_round, const std::string& out_dir) {
  std::ifstream in(params_path);
  if (!in) throw DataError("cannot open " + params_path);
  json j = json::parse(in);
  CostParams params = CostParams::uniform(
      j.at("ge").get<std::size_t>(), j.at("ce").get<std::size_t>(),
      j.at("participants").get<std::size_t>(), j.value("local_epoch_cost", 0.0),
      j.value("aggregation_cost", 0.0), j.value("broadcast_cost", 0.0),
      j.value("consensus_cost", 0.0), j.value("storage_cost", 0.0));
  if (j.contains("dataset_sizes"))
    params.dataset_sizes = j.at("dataset_sizes").get<std::vector<std::size_t>>();
  params.per_round_consensus_and_storage = per_round || j.value("per_round", false);

  CostBreakdown b = total_cost(params);
  std::cout << "local_computation " << b.local_computation << "\n"
            << "exchange          " << b.exchange << "\n"
            << "consensus         " << b.consensus << "\n"
            << "storage           " << b.storage << "\n"
            << "total             " << b.total << "\n";
  if (!out_dir.empty()) {
    RunDirectory run(out_dir);
    std::ofstream out(run.file("cost.csv"));
    out << "component,cost\n"
        << "local_computation," << b.local_computation << "\n"
        << "exchange," << b.exchange << "\n"
        << "consensus," << b.consensus << "\n"
        << "storage," << b.storage << "\n"
        << "total," << b.total << "\n";
    std::cout << "wrote " << run.file("cost.csv").string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"route-leak detection experiments over AS topologies"};
  app.require_subcommand(1);

  TopologyCliOptions topo;
  std::string out_dir;
  std::string config_path;
  std::string participants_text;
  std::string mode = "fl";
  std::string strategies = "peer,customer,provider";
  std::string rates = "0.01,0.02,0.05,0.1";
  std::string cost_params_path;
  bool per_round = false;
  int group = 0;
  int ge = 0, ce = 0, batch = 0;
  int eval_every = -1;
  double lr = 0.0;
  std::uint64_t seed = 0;
  std::size_t pool_cap = 0;
  double cluster_fraction = -1.0;

  auto add_experiment_flags = [&](CLI::App* cmd) {
    add_topology_flags(cmd, topo);
    cmd->add_option("--config", config_path, "experiment config JSON (flags override)");
    cmd->add_option("--group", group, "group preset 1-4");
    cmd->add_option("--participants", participants_text,
                    "participant selection: all | top:K | band:MIN-MAX[:K[:MAXCUST]]");
    cmd->add_option("--pool-cap", pool_cap, "cap on partitioned sample count");
    cmd->add_option("--cluster-fraction", cluster_fraction,
                    "owner-coherent share of each client in [0,1]");
    cmd->add_option("--ge", ge, "global training epochs");
    cmd->add_option("--eval-every", eval_every,
                    "log pooled-set metrics every N rounds (0 disables)");
    cmd->add_option("--ce", ce, "local training epochs");
    cmd->add_option("--lr", lr, "learning rate");
    cmd->add_option("--batch", batch, "batch size");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--out", out_dir, "output directory");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "load or generate a topology and summarize it");
  add_topology_flags(ingest, topo);
  ingest->add_option("--out", out_dir, "write canonical topology here");

  CLI::App* gen = app.add_subcommand("gen-triples", "generate labeled triples and group datasets");
  add_experiment_flags(gen);

  CLI::App* train = app.add_subcommand("train", "train and evaluate detection models");
  add_experiment_flags(train);
  train->add_option("--mode", mode,
                    "fl | central | single:K | ml-random | ml-0 | ml-1 | compare");

  CLI::App* deploy = app.add_subcommand("deploy-analysis", "deployment coverage curves");
  add_topology_flags(deploy, topo);
  deploy->add_option("--strategy", strategies, "comma list of peer,customer,provider");
  deploy->add_option("--rates", rates, "comma list of deployment rates in [0,1]");
  deploy->add_option("--out", out_dir, "output directory");

  CLI::App* cost = app.add_subcommand("cost", "evaluate the training cost model");
  cost->add_option("--params", cost_params_path, "cost parameter JSON file")->required();
  cost->add_flag("--per-round", per_round,
                 "count consensus and storage once per round instead of per participant");
  cost->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    auto build_config = [&]() {
      ExperimentConfig config;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw DataError("cannot open " + config_path);
        config = experiment_from_json(json::parse(in));
      }
      if (!topo.file.empty() || !topo.synthetic.empty()) config.topology = topology_spec_from(topo);
      else if (config_path.empty()) throw UsageError("one of --topology/--synthetic/--config required");
      if (!participants_text.empty()) config.participants = parse_participants(participants_text);
      if (group != 0) config.group = group;
      if (pool_cap != 0) config.pool_cap = pool_cap;
      if (cluster_fraction >= 0.0) config.cluster_fraction = cluster_fraction;
      if (ge != 0) config.global_epochs = ge;
      if (ce != 0) config.local_epochs = ce;
      if (lr != 0.0) config.model.learning_rate = lr;
      if (batch != 0) config.model.batch_size = batch;
      if (seed != 0) config.master_seed = seed;
      if (eval_every >= 0) config.eval_every = eval_every;
      return config;
    };
    auto out_or = [&](const std::string& name) {
      return out_dir.empty() ? (output_root() / name).string() : out_dir;
    };

    if (app.got_subcommand(ingest)) return cmd_ingest(topo, out_dir);
    if (app.got_subcommand(gen)) return cmd_gen_triples(build_config(), out_or("gen-triples"));
    if (app.got_subcommand(train)) return cmd_train(build_config(), mode, out_or("train"));
    if (app.got_subcommand(deploy)) return cmd_deploy_analysis(topo, strategies, rates, out_dir);
    if (app.got_subcommand(cost)) return cmd_cost(cost_params_path, per_round, out_dir);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
