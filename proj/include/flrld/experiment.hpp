#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "flrld/baselines.hpp"
#include "flrld/fedlearn.hpp"
#include "flrld/gzio.hpp"
#include "flrld/ledger.hpp"
#include "flrld/tripledata.hpp"

namespace flrld {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Experiment configuration. A saved config re-runs to identical results: all
// randomness is derived from the seeds recorded here.

struct TopologySpec {
  enum class Kind { File, Synthetic };
  Kind kind = Kind::Synthetic;
  std::string path;
  SyntheticParams synthetic;
};

struct ParticipantSpec {
  enum class Kind { TopDegree, DegreeBand, All, List };
  Kind kind = Kind::TopDegree;
  std::size_t top_k = 25;
  // DegreeBand keeps every AS whose degree falls in [min_degree, max_degree];
  // a mid/low band yields repositories that genuinely miss most links. The
  // customer cap narrows it to edge-style deployers (stubs and open peers).
  std::size_t min_degree = 2;
  std::size_t max_degree = 16;
  std::size_t max_customers = std::size_t(-1);
  std::vector<Asn> list;
};

struct ExperimentConfig {
  TopologySpec topology;
  ParticipantSpec participants;
  int group = 1;               // group regime preset (1-4)
  std::size_t pool_cap = 6000; // bound on the partitioned sample count
  double cluster_fraction = 0.75;  // share of each client drawn owner-coherently
  ModelConfig model;
  int global_epochs = 40;
  int local_epochs = 2;
  Weighting weighting = Weighting::SizeProportional;
  int eval_every = 1;
  LedgerOptions ledger;
  std::uint64_t master_seed = 1;

  std::uint64_t partition_seed() const { return mix_seed(master_seed, 2); }
  std::uint64_t model_seed() const { return model.seed != 0 ? model.seed : mix_seed(master_seed, 3); }
  std::uint64_t fl_seed() const { return mix_seed(master_seed, 4); }
  std::uint64_t repo_seed() const { return mix_seed(master_seed, 5); }
  std::uint64_t central_seed() const { return mix_seed(master_seed, 6); }
  std::uint64_t single_seed(int k) const { return mix_seed(master_seed, 16 + std::uint64_t(k)); }
};

inline json to_json(const ExperimentConfig& c) {
  json j;
  if (c.topology.kind == TopologySpec::Kind::File) {
    j["topology"] = {{"kind", "file"}, {"path", c.topology.path}};
  } else {
    const SyntheticParams& s = c.topology.synthetic;
    j["topology"] = {{"kind", "synthetic"},
                     {"nodes", s.nodes},
                     {"seed", s.seed},
                     {"core_size", s.core_size},
                     {"max_providers", s.max_providers},
                     {"extra_provider_prob", s.extra_provider_prob},
                     {"peer_prob", s.peer_prob},
                     {"peer_geometric_p", s.peer_geometric_p},
                     {"hub_prob", s.hub_prob},
                     {"hub_peer_frac", s.hub_peer_frac},
                     {"triadic_closure_prob", s.triadic_closure_prob}};
  }
  switch (c.participants.kind) {
    case ParticipantSpec::Kind::TopDegree:
      j["participants"] = {{"kind", "top_degree"}, {"top_k", c.participants.top_k}};
      break;
    case ParticipantSpec::Kind::DegreeBand:
      j["participants"] = {{"kind", "degree_band"},
                           {"min_degree", c.participants.min_degree},
                           {"max_degree", c.participants.max_degree},
                           {"max_customers", c.participants.max_customers},
                           {"top_k", c.participants.top_k}};
      break;
    case ParticipantSpec::Kind::All:
      j["participants"] = {{"kind", "all"}};
      break;
    case ParticipantSpec::Kind::List:
      j["participants"] = {{"kind", "list"}, {"asns", c.participants.list}};
      break;
  }
  j["group"] = c.group;
  j["pool_cap"] = c.pool_cap;
  j["cluster_fraction"] = c.cluster_fraction;
  j["model"] = {{"architecture",
                 c.model.architecture == Architecture::RecurrentGated ? "gated" : "dense"},
                {"hidden1", c.model.hidden1},
                {"hidden2", c.model.hidden2},
                {"seed", c.model.seed},
                {"learning_rate", c.model.learning_rate},
                {"batch_size", c.model.batch_size}};
  j["fl"] = {{"global_epochs", c.global_epochs},
             {"local_epochs", c.local_epochs},
             {"weighting", c.weighting == Weighting::Uniform ? "uniform" : "size"},
             {"eval_every", c.eval_every}};
  j["ledger"] = {{"ttl", c.ledger.ttl},
                 {"clock_start", c.ledger.clock_start},
                 {"clock_tick", c.ledger.clock_tick},
                 {"key_seed", c.ledger.key_seed}};
  j["master_seed"] = c.master_seed;
  return j;
}

inline ExperimentConfig experiment_from_json(const json& j) {
  ExperimentConfig c;
  const json& topo = j.at("topology");
  if (topo.at("kind") == "file") {
    c.topology.kind = TopologySpec::Kind::File;
    c.topology.path = topo.at("path").get<std::string>();
  } else if (topo.at("kind") == "synthetic") {
    c.topology.kind = TopologySpec::Kind::Synthetic;
    SyntheticParams& s = c.topology.synthetic;
    s.nodes = topo.at("nodes").get<std::uint32_t>();
    s.seed = topo.at("seed").get<std::uint64_t>();
    s.core_size = topo.value("core_size", s.core_size);
    s.max_providers = topo.value("max_providers", s.max_providers);
    s.extra_provider_prob = topo.value("extra_provider_prob", s.extra_provider_prob);
    s.peer_prob = topo.value("peer_prob", s.peer_prob);
    s.peer_geometric_p = topo.value("peer_geometric_p", s.peer_geometric_p);
    s.hub_prob = topo.value("hub_prob", s.hub_prob);
    s.hub_peer_frac = topo.value("hub_peer_frac", s.hub_peer_frac);
    s.triadic_closure_prob = topo.value("triadic_closure_prob", s.triadic_closure_prob);
  } else {
    throw DataError("topology.kind must be file or synthetic");
  }
  if (j.contains("participants")) {
    const json& p = j.at("participants");
    std::string kind = p.at("kind").get<std::string>();
    if (kind == "top_degree") {
      c.participants.kind = ParticipantSpec::Kind::TopDegree;
      c.participants.top_k = p.value("top_k", c.participants.top_k);
    } else if (kind == "degree_band") {
      c.participants.kind = ParticipantSpec::Kind::DegreeBand;
      c.participants.min_degree = p.value("min_degree", c.participants.min_degree);
      c.participants.max_degree = p.value("max_degree", c.participants.max_degree);
      c.participants.max_customers = p.value("max_customers", c.participants.max_customers);
      c.participants.top_k = p.value("top_k", c.participants.top_k);
    } else if (kind == "all") {
      c.participants.kind = ParticipantSpec::Kind::All;
    } else if (kind == "list") {
      c.participants.kind = ParticipantSpec::Kind::List;
      c.participants.list = p.at("asns").get<std::vector<Asn>>();
    } else {
      throw DataError("participants.kind must be top_degree, degree_band, all, or list");
    }
  }
  c.group = j.value("group", c.group);
  c.pool_cap = j.value("pool_cap", c.pool_cap);
  c.cluster_fraction = j.value("cluster_fraction", c.cluster_fraction);
  if (j.contains("model")) {
    const json& m = j.at("model");
    std::string arch = m.value("architecture", std::string("gated"));
    if (arch == "gated") c.model.architecture = Architecture::RecurrentGated;
    else if (arch == "dense") c.model.architecture = Architecture::Dense;
    else throw DataError("model.architecture must be gated or dense");
    c.model.hidden1 = m.value("hidden1", c.model.hidden1);
    c.model.hidden2 = m.value("hidden2", c.model.hidden2);
    c.model.seed = m.value("seed", c.model.seed);
    c.model.learning_rate = m.value("learning_rate", c.model.learning_rate);
    c.model.batch_size = m.value("batch_size", c.model.batch_size);
  }
  if (j.contains("fl")) {
    const json& f = j.at("fl");
    c.global_epochs = f.value("global_epochs", c.global_epochs);
    c.local_epochs = f.value("local_epochs", c.local_epochs);
    std::string w = f.value("weighting", std::string("size"));
    if (w == "uniform") c.weighting = Weighting::Uniform;
    else if (w == "size") c.weighting = Weighting::SizeProportional;
    else throw DataError("fl.weighting must be uniform or size");
    c.eval_every = f.value("eval_every", c.eval_every);
  }
  if (j.contains("ledger")) {
    const json& l = j.at("ledger");
    c.ledger.ttl = l.value("ttl", c.ledger.ttl);
    c.ledger.clock_start = l.value("clock_start", c.ledger.clock_start);
    c.ledger.clock_tick = l.value("clock_tick", c.ledger.clock_tick);
    c.ledger.key_seed = l.value("key_seed", c.ledger.key_seed);
  }
  c.master_seed = j.value("master_seed", c.master_seed);
  return c;
}

// ---------------------------------------------------------------------------
// Data preparation shared by every training mode.

struct PreparedExperiment {
  AsGraph graph;
  std::vector<Asn> participant_asns;      // ASes whose local data feeds the pool
  std::vector<LabeledTriple> pool;        // their generated samples, owner-sorted
  std::vector<ClientDataset> clients;     // the partitioned group
  std::vector<LabeledTriple> eval_set;    // the group's pooled training data
  std::vector<Asn> training_owners;       // owners present in client samples
};

inline AsGraph load_topology(const TopologySpec& spec, std::vector<std::string>* warnings = nullptr) {
  if (spec.kind == TopologySpec::Kind::File) return load_as_rel(spec.path, warnings);
  return generate_synthetic_topology(spec.synthetic);
}

inline std::vector<Asn> select_participants(const AsGraph& g, const ParticipantSpec& spec) {
  std::vector<Asn> out;
  switch (spec.kind) {
    case ParticipantSpec::Kind::All:
      out = g.nodes();
      break;
    case ParticipantSpec::Kind::List:
      for (Asn a : spec.list)
        if (!g.has_node(a)) throw DataError("participant AS " + std::to_string(a) +
                                            " is not in the topology");
      out = spec.list;
      break;
    case ParticipantSpec::Kind::DegreeBand: {
      std::vector<std::pair<std::size_t, Asn>> band;
      for (Asn a : g.nodes()) {
        std::size_t d = g.neighbors(a).size();
        if (d < spec.min_degree || d > spec.max_degree) continue;
        if (g.degree_profile(a).customers > spec.max_customers) continue;
        band.emplace_back(d, a);
      }
      std::sort(band.begin(), band.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
      });
      if (spec.top_k == 0 || band.size() <= spec.top_k) {
        for (const auto& [d, a] : band) out.push_back(a);
      } else {
        // Evenly spaced picks across the band keep the size mix.
        for (std::size_t i = 0; i < spec.top_k; ++i)
          out.push_back(band[i * band.size() / spec.top_k].second);
      }
      break;
    }
    case ParticipantSpec::Kind::TopDegree: {
      std::vector<std::pair<std::size_t, Asn>> ranked;
      for (Asn a : g.nodes()) ranked.emplace_back(g.neighbors(a).size(), a);
      std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
      });
      std::size_t k = std::min(spec.top_k, ranked.size());
      for (std::size_t i = 0; i < k; ++i) out.push_back(ranked[i].second);
      break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw DataError("no participants selected");
  return out;
}

inline PreparedExperiment prepare_experiment(const ExperimentConfig& config) {
  PreparedExperiment prep;
  prep.graph = load_topology(config.topology);
  if (prep.graph.node_count() == 0) throw DataError("empty topology");
  prep.participant_asns = select_participants(prep.graph, config.participants);
  for (Asn m : prep.participant_asns) {
    if (prep.graph.neighbors(m).size() < 2) continue;  // no triples to generate
    ClientDataset local = generate_local_dataset(prep.graph, m);
    prep.pool.insert(prep.pool.end(), local.samples.begin(), local.samples.end());
  }
  if (prep.pool.empty()) throw DataError("participants generated no training samples");
  prep.clients = partition_groups(prep.pool, config.group, config.partition_seed(),
                                  config.pool_cap, config.cluster_fraction);
  std::set<Asn> owners;
  for (const ClientDataset& c : prep.clients) {
    prep.eval_set.insert(prep.eval_set.end(), c.samples.begin(), c.samples.end());
    for (const LabeledTriple& lt : c.samples) owners.insert(lt.owner);
  }
  prep.training_owners.assign(owners.begin(), owners.end());
  return prep;
}

// ---------------------------------------------------------------------------
// Training modes.

struct ModeResult {
  std::string mode;
  Metrics metrics;
  std::optional<ModelParams> params;
  std::optional<FlRunResult> fl;
};

inline ModeResult run_fl_mode(const PreparedExperiment& prep, const ExperimentConfig& config,
                              Ledger& ledger) {
  ModeResult result;
  result.mode = "fl";
  ModelConfig model = config.model;
  model.seed = config.model_seed();
  FlConfig fl;
  fl.global_epochs = config.global_epochs;
  fl.local_epochs = config.local_epochs;
  fl.weighting = config.weighting;
  fl.base_seed = config.fl_seed();
  fl.eval_set = config.eval_every > 0 ? &prep.eval_set : nullptr;
  fl.eval_every = config.eval_every;
  FlRunResult run = run_fl(prep.clients, model, fl, ledger);
  result.metrics = evaluate(run.global_params, prep.eval_set);
  result.params = run.global_params;
  result.fl = std::move(run);
  return result;
}

// CL trains for the same total pass budget as FL.
inline ModeResult run_central_mode(const PreparedExperiment& prep,
                                   const ExperimentConfig& config) {
  ModeResult result;
  result.mode = "central";
  ModelConfig model = config.model;
  model.seed = config.model_seed();
  ModelParams params = train_central(prep.clients, model,
                                     config.global_epochs * config.local_epochs,
                                     config.central_seed());
  result.metrics = evaluate(params, prep.eval_set);
  result.params = std::move(params);
  return result;
}

inline ModeResult run_single_mode(const PreparedExperiment& prep, const ExperimentConfig& config,
                                  int client_index) {
  if (client_index < 1 || std::size_t(client_index) > prep.clients.size())
    throw DataError("single-client index out of range");
  ModeResult result;
  result.mode = "single:" + std::to_string(client_index);
  ModelConfig model = config.model;
  model.seed = config.model_seed();
  ModelParams params = train_single(prep.clients[std::size_t(client_index - 1)], model,
                                    config.global_epochs * config.local_epochs,
                                    config.single_seed(client_index));
  result.metrics = evaluate(params, prep.eval_set);
  result.params = std::move(params);
  return result;
}

inline ModeResult run_repository_mode(const PreparedExperiment& prep,
                                      const ExperimentConfig& config, RepoPolicy policy) {
  ModeResult result;
  result.mode = to_string(policy);
  GlobalRepository repo = build_global_repository(prep.graph, prep.training_owners);
  std::vector<Label> preds, truths;
  preds.reserve(prep.eval_set.size());
  for (const LabeledTriple& lt : prep.eval_set) {
    preds.push_back(ml_predict(repo, lt.triple, policy, config.repo_seed()));
    truths.push_back(lt.label);
  }
  result.metrics = compute_metrics(preds, truths);
  return result;
}

// ---------------------------------------------------------------------------
// Report writers. Everything is machine-first: CSV tables plus JSON-lines for
// the round history.

inline void write_metrics_csv_header(std::ostream& out) {
  out << "mode,accuracy,precision,recall,f1,tp,fp,tn,fn\n";
}

inline void write_metrics_csv_row(std::ostream& out, const std::string& mode, const Metrics& m) {
  out << mode << ',' << m.accuracy << ',' << m.precision << ',' << m.recall << ',' << m.f1 << ','
      << m.tp << ',' << m.fp << ',' << m.tn << ',' << m.fn << '\n';
}

inline json round_record(const RoundResult& r) {
  json j;
  j["round"] = r.round;
  j["winner"] = r.winner;
  j["block"] = to_hex(r.block_hash);
  json clients = json::array();
  for (const ClientRoundStat& s : r.client_stats)
    clients.push_back({{"id", s.id},
                       {"samples", s.samples},
                       {"mean_loss", s.mean_epoch_loss},
                       {"update_norm", s.update_norm}});
  j["clients"] = clients;
  if (r.metrics) {
    j["metrics"] = {{"accuracy", r.metrics->accuracy},
                    {"precision", r.metrics->precision},
                    {"recall", r.metrics->recall},
                    {"f1", r.metrics->f1}};
  }
  return j;
}

inline void write_history_jsonl(const std::vector<RoundResult>& history, std::ostream& out) {
  for (const RoundResult& r : history) out << round_record(r).dump() << '\n';
}

inline void write_coverage_csv(const std::vector<CoverageCurve>& curves, std::ostream& out) {
  out << "strategy,rate,deployed,covered_malicious,total_malicious,coverage\n";
  for (const CoverageCurve& curve : curves)
    for (const CoveragePoint& p : curve.points)
      out << to_string(curve.strategy) << ',' << p.rate << ',' << p.deployed << ','
          << p.covered_malicious << ',' << curve.total_malicious << ',' << p.coverage << '\n';
}

inline void write_distribution_csv(const NetworkDistribution& dist, std::ostream& out) {
  out << "asn,degree,total,malicious,regular,inference_fraction\n";
  for (const TripleCensus& c : dist.per_as)
    out << c.asn << ',' << c.degree << ',' << c.total() << ',' << c.malicious() << ','
        << c.regular() << ',' << c.inference_fraction() << '\n';
}

// A self-describing run directory: the config that produced the run, a digest
// of the inputs, and every artifact the run emitted.
class RunDirectory {
 public:
  explicit RunDirectory(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
  }

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path file(const std::string& name) const { return root_ / name; }

  void write_text(const std::string& name, const std::string& content) const {
    std::ofstream out(root_ / name, std::ios::binary);
    if (!out) throw DataError("cannot write " + (root_ / name).string());
    out << content;
  }

  void write_config(const ExperimentConfig& config) const {
    write_text("config.json", to_json(config).dump(2) + "\n");
  }

  void write_input_digest(const AsGraph& graph) const {
    std::string canonical = serialize_as_rel(graph);
    write_text("topology.digest", to_hex(sha256(canonical)) + "\n");
  }

 private:
  std::filesystem::path root_;
};

}  // namespace flrld
