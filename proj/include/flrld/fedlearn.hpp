#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flrld/analysis.hpp"
#include "flrld/ledger.hpp"
#include "flrld/neuralnet.hpp"
#include "flrld/tripledata.hpp"

namespace flrld {

enum class Weighting : std::uint8_t { SizeProportional, Uniform };

struct FlConfig {
  int local_epochs = 2;    // ce
  int global_epochs = 70;  // ge
  Weighting weighting = Weighting::SizeProportional;
  // Base seed for the shuffle schedule. Client i trains round k's epochs with
  // seeds client_seed(i) + (k-1)*ce + e, so no shuffle seed ever repeats and
  // a single-client run reproduces plain sequential training exactly.
  std::uint64_t base_seed = 1;
  std::vector<std::uint64_t> client_seeds;  // optional explicit override
  // Held-out evaluation: when set, global metrics are logged every
  // `eval_every` rounds (0 disables).
  const std::vector<LabeledTriple>* eval_set = nullptr;
  int eval_every = 1;
  bool keep_client_updates = false;
  // Train clients on worker threads. Aggregation order stays fixed by sorted
  // client id, so results are identical to the sequential schedule.
  bool parallel_clients = false;

  std::uint64_t client_seed(std::size_t index) const {
    if (!client_seeds.empty()) {
      if (index >= client_seeds.size()) throw DataError("missing client seed");
      return client_seeds[index];
    }
    return base_seed + (std::uint64_t(index) << 32);
  }
};

struct ClientRoundStat {
  Asn id = 0;
  std::size_t samples = 0;
  double mean_epoch_loss = 0;
  double update_norm = 0;
};

struct RoundResult {
  std::uint64_t round = 0;
  std::vector<ClientRoundStat> client_stats;
  std::vector<ModelUpdate> client_updates;  // kept only when configured
  ModelUpdate global_update;
  Asn winner = 0;
  Digest block_hash = zero_digest();
  std::optional<Metrics> metrics;
};

// Cumulative local update over ce epochs from the current global model; the
// per-epoch deltas telescope into one difference.
inline ModelUpdate local_round(const ClientDataset& client, const ModelParams& global_params,
                               int ce, const ModelConfig& config, std::uint64_t seed,
                               TrainTrace* trace = nullptr) {
  if (client.samples.empty()) throw DataError("client dataset is empty");
  ModelParams after = train_epochs(global_params, client, ce, config, seed, trace);
  return model_get_update(global_params, after);
}

// Weight-normalized element-wise mean of updates. Accumulation runs in
// extended precision so each element lands within one ulp of the exact
// weighted mean.
inline ModelUpdate fed_avg(std::span<const ModelUpdate> updates, std::span<const double> weights) {
  if (updates.empty()) throw DataError("fed_avg: no updates");
  if (updates.size() != weights.size()) throw DataError("fed_avg: weight count mismatch");
  long double weight_sum = 0;
  for (double w : weights) {
    if (w < 0) throw DataError("fed_avg: negative weight");
    weight_sum += w;
  }
  if (weight_sum <= 0) throw DataError("fed_avg: weights sum to zero");
  ModelUpdate out;
  out.spec = updates[0].spec;
  out.base_version = updates[0].base_version;
  for (const ModelUpdate& u : updates) {
    require_same_shape(u.spec, out.spec, "fed_avg");
    if (u.delta.size() != updates[0].delta.size())
      throw InvariantError("fed_avg: delta length mismatch");
  }
  out.delta.resize(updates[0].delta.size());
  std::vector<long double> acc(out.delta.size(), 0.0L);
  for (std::size_t u = 0; u < updates.size(); ++u) {
    long double w = weights[u];
    for (std::size_t i = 0; i < acc.size(); ++i)
      acc[i] += w * static_cast<long double>(updates[u].delta[i]);
  }
  for (std::size_t i = 0; i < acc.size(); ++i)
    out.delta[i] = static_cast<Scalar>(acc[i] / weight_sum);
  return out;
}

inline Metrics evaluate(const ModelParams& params, std::span<const LabeledTriple> test) {
  if (test.empty()) throw DataError("empty test set");
  std::vector<Label> predictions, truths;
  predictions.reserve(test.size());
  truths.reserve(test.size());
  for (const LabeledTriple& lt : test) {
    predictions.push_back(predict(params, lt.triple));
    truths.push_back(lt.label);
  }
  return compute_metrics(predictions, truths);
}

struct FlRunResult {
  ModelParams global_params;
  std::vector<RoundResult> history;
};

// The full training loop: every global round each client trains locally from
// the current global model, the updates are averaged, the consensus winner
// appends the round's block, and the aggregated update is applied. The run
// is deterministic end-to-end for fixed seeds; clients execute in sorted-id
// order and could train concurrently without changing the result.
inline FlRunResult run_fl(const std::vector<ClientDataset>& clients,
                          const ModelConfig& model_config, const FlConfig& fl_config,
                          Ledger& ledger) {
  if (clients.empty()) throw DataError("run_fl: no clients");
  for (const ClientDataset& c : clients)
    if (c.samples.empty())
      throw DataError("run_fl: client " + std::to_string(c.id) + " has no samples");
  if (fl_config.global_epochs < 1 || fl_config.local_epochs < 1)
    throw DataError("run_fl: global and local epoch counts must be >= 1");
  if (!ledger.empty()) throw DataError("run_fl: ledger already in use");

  std::vector<std::size_t> order(clients.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return clients[a].id < clients[b].id; });
  std::vector<Asn> participants;
  participants.reserve(clients.size());
  for (std::size_t i : order) participants.push_back(clients[i].id);
  if (std::adjacent_find(participants.begin(), participants.end()) != participants.end())
    throw DataError("run_fl: duplicate client ids");

  ModelParams global = init_model(model_config);
  Bytes init_blob = serialize_params(global);
  Digest init_digest = sha256(std::span<const std::uint8_t>(init_blob));
  std::string task_note = "flrld task ge=" + std::to_string(fl_config.global_epochs) +
                          " ce=" + std::to_string(fl_config.local_epochs) +
                          " weighting=" +
                          (fl_config.weighting == Weighting::Uniform ? "uniform" : "size");
  ledger.append_genesis(init_digest, std::move(init_blob),
                        Bytes(task_note.begin(), task_note.end()), participants);

  FlRunResult result;
  result.history.reserve(std::size_t(fl_config.global_epochs));
  const int ce = fl_config.local_epochs;

  for (int k = 1; k <= fl_config.global_epochs; ++k) {
    RoundResult round;
    round.round = std::uint64_t(k);
    std::vector<ModelUpdate> updates;
    std::vector<double> weights;
    updates.reserve(clients.size());
    std::vector<TrainTrace> traces(order.size());
    std::vector<ModelUpdate> local_updates(order.size());
    auto train_client = [&](std::size_t pos) {
      const ClientDataset& client = clients[order[pos]];
      std::uint64_t seed = fl_config.client_seed(pos) + std::uint64_t(k - 1) * std::uint64_t(ce);
      local_updates[pos] = local_round(client, global, ce, model_config, seed, &traces[pos]);
    };
    if (fl_config.parallel_clients) {
      std::vector<std::future<void>> jobs;
      for (std::size_t pos = 0; pos < order.size(); ++pos)
        jobs.push_back(std::async(std::launch::async, train_client, pos));
      for (auto& job : jobs) job.get();
    } else {
      for (std::size_t pos = 0; pos < order.size(); ++pos) train_client(pos);
    }
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const ClientDataset& client = clients[order[pos]];
      TrainTrace& trace = traces[pos];
      ModelUpdate& u = local_updates[pos];
      ClientRoundStat stat;
      stat.id = client.id;
      stat.samples = client.samples.size();
      double norm2 = 0;
      for (Scalar d : u.delta) norm2 += double(d) * double(d);
      stat.update_norm = std::sqrt(norm2);
      stat.mean_epoch_loss =
          trace.epoch_loss.empty()
              ? 0.0
              : std::accumulate(trace.epoch_loss.begin(), trace.epoch_loss.end(), 0.0) /
                    double(trace.epoch_loss.size());
      round.client_stats.push_back(stat);
      weights.push_back(fl_config.weighting == Weighting::Uniform
                            ? 1.0
                            : double(client.samples.size()));
      if (fl_config.keep_client_updates) round.client_updates.push_back(u);
      updates.push_back(std::move(u));
    }

    round.global_update = fed_avg(updates, weights);
    round.winner = select_winner(std::uint64_t(k), participants, ledger.tip_hash());
    Bytes gamma_blob = serialize_update(round.global_update);
    HmacSigner signer = ledger.registry().signer_for(round.winner);
    const Block& block =
        ledger.append_round(std::uint64_t(k), round.winner, std::move(gamma_blob), signer);
    round.block_hash = block.hash();

    global = apply_update(global, round.global_update);

    if (fl_config.eval_set && fl_config.eval_every > 0 &&
        (k % fl_config.eval_every == 0 || k == fl_config.global_epochs))
      round.metrics = evaluate(global, *fl_config.eval_set);

    result.history.push_back(std::move(round));
  }

  result.global_params = std::move(global);
  return result;
}

// Rebuilds the final global model from the chain alone: deserialize the
// initial parameters from the genesis payload, then apply every stored round
// update in order. Byte-exact against the live run.
inline ModelParams replay_chain(const Ledger& ledger) {
  if (ledger.empty()) throw DataError("replay_chain: empty ledger");
  const Block& genesis = ledger.block(0);
  auto init_blob = ledger.store().get(genesis.payload_digest);
  if (!init_blob) throw DataError("replay_chain: genesis payload missing");
  ModelParams params = deserialize_params(std::span<const std::uint8_t>(init_blob->get()));
  for (std::size_t i = 1; i < ledger.size(); ++i) {
    auto blob = ledger.store().get(ledger.block(i).payload_digest);
    if (!blob)
      throw DataError("replay_chain: payload missing for block " + std::to_string(i));
    params = apply_update(params, deserialize_update(std::span<const std::uint8_t>(blob->get())));
  }
  return params;
}

}  // namespace flrld
