// Minimal library walk-through: synthesize a topology, build a five-client
// group from its labeled triples, train federally with a chained ledger, and
// compare against one single-AS model.

#include <cstdio>

#include "flrld/flrld.hpp"

using namespace flrld;

int main() {
  SyntheticParams topo;
  topo.nodes = 200;
  topo.seed = 42;
  AsGraph graph = generate_synthetic_topology(topo);
  std::printf("topology: %zu ASes, %zu links, %zu component(s)\n", graph.node_count(),
              graph.edge_count(), graph.component_count());

  // Local training data of the ten best-connected ASes.
  std::vector<std::pair<std::size_t, Asn>> ranked;
  for (Asn a : graph.nodes()) ranked.emplace_back(graph.neighbors(a).size(), a);
  std::sort(ranked.rbegin(), ranked.rend());
  std::vector<LabeledTriple> pool;
  for (int i = 0; i < 10; ++i) {
    ClientDataset local = generate_local_dataset(graph, ranked[std::size_t(i)].second);
    pool.insert(pool.end(), local.samples.begin(), local.samples.end());
  }
  std::vector<ClientDataset> clients = partition_groups(pool, 2, /*seed=*/7, /*max_total=*/1200);
  std::vector<LabeledTriple> eval_set;
  for (const ClientDataset& c : clients)
    eval_set.insert(eval_set.end(), c.samples.begin(), c.samples.end());

  ModelConfig model;
  model.seed = 3;
  FlConfig fl;
  fl.global_epochs = 10;
  fl.local_epochs = 2;
  Ledger ledger;
  FlRunResult run = run_fl(clients, model, fl, ledger);

  Metrics fl_metrics = evaluate(run.global_params, eval_set);
  Metrics single = evaluate(train_single(clients[0], model, 20, 5), eval_set);
  std::printf("federated: accuracy %.3f f1 %.3f | single client 1: accuracy %.3f\n",
              fl_metrics.accuracy, fl_metrics.f1, single.accuracy);

  ChainVerdict verdict = ledger.verify_chain();
  ModelParams replayed = replay_chain(ledger);
  std::printf("ledger: %zu blocks, verified %s, replay %s\n", ledger.size(),
              verdict.ok ? "ok" : "BROKEN",
              replayed.values == run.global_params.values ? "matches" : "DIVERGES");
  return verdict.ok && replayed.values == run.global_params.values ? 0 : 1;
}
