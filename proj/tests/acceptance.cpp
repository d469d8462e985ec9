// Acceptance suite: one self-contained check per criterion, each printing a
// single [PASS]/[FAIL]/[SKIP] line. Run all by default or one with --only N.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "flrld/experiment.hpp"
#include "flrld/flrld.hpp"

using namespace flrld;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  enum Kind { Pass, Fail, Skip } kind = Fail;
  std::string detail;
};

Outcome pass(std::string detail) { return {Outcome::Pass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Outcome::Fail, std::move(detail)}; }
Outcome skip(std::string detail) { return {Outcome::Skip, std::move(detail)}; }

// Random connected relationship graph on up to max_nodes nodes.
AsGraph random_small_graph(DetRng& rng, int max_nodes = 8) {
  int n = 3 + int(rng.next_below(std::uint64_t(max_nodes - 2)));
  std::vector<Edge> edges;
  std::set<std::pair<Asn, Asn>> used;
  auto add = [&](Asn a, Asn b) {
    if (a == b || used.count({std::min(a, b), std::max(a, b)})) return;
    used.insert({std::min(a, b), std::max(a, b)});
    int kind = int(rng.next_below(3));
    edges.push_back(kind == 0 ? p2p_edge(a, b) : kind == 1 ? p2c_edge(a, b) : p2c_edge(b, a));
  };
  for (Asn v = 2; v <= Asn(n); ++v) add(1 + Asn(rng.next_below(v - 1)), v);
  for (Asn a = 1; a <= Asn(n); ++a)
    for (Asn b = a + 1; b <= Asn(n); ++b)
      if (rng.next_bool(0.4)) add(a, b);
  return AsGraph::from_edges(edges);
}

// ---------------------------------------------------------------------------
// Criterion 1: Alg.-1 labels equal a brute-force valley-free checker on at
// least 10,000 random connected graphs with <= 8 nodes.

Outcome criterion1() {
  DetRng rng(0xACCE9701);
  std::size_t graphs = 0, samples = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    AsGraph g = random_small_graph(rng);
    ++graphs;
    for (Asn m : g.nodes()) {
      // Brute-force reference, written against raw roles: direct triples by
      // the valley-free rule, inference by edge-plus-export legality.
      std::map<std::pair<Triple, int>, Label> expect;
      const std::vector<Asn>& nbrs = g.neighbors(m);
      for (Asn ni : nbrs) {
        for (Asn nj : nbrs) {
          if (ni == nj) continue;
          bool ni_pp = is_provider_or_peer(*g.role_from(m, ni));
          bool nj_pp = is_provider_or_peer(*g.role_from(m, nj));
          expect[{Triple{ni, m, nj}, 0}] = ni_pp && nj_pp ? Label::Malicious : Label::Regular;
          bool visible = false;
          if (g.has_edge(ni, nj)) {
            bool from_pp = is_provider_or_peer(*g.role_from(nj, ni));
            bool to_pp = is_provider_or_peer(*g.role_from(nj, m));
            visible = !(from_pp && to_pp);
          }
          expect[{Triple{ni, nj, m}, 1}] = visible ? Label::Regular : Label::Malicious;
          if (visible) expect[{Triple{m, nj, ni}, 2}] = Label::Regular;
        }
      }
      ClientDataset data = generate_local_dataset(g, m);
      if (data.samples.size() != expect.size())
        return fail("sample count mismatch at AS " + std::to_string(m));
      for (const LabeledTriple& lt : data.samples) {
        auto it = expect.find({lt.triple, int(lt.origin)});
        if (it == expect.end()) return fail("unexpected sample emitted");
        if (it->second != lt.label) return fail("label mismatch against brute force");
        ++samples;
      }
    }
  }
  return pass(std::to_string(graphs) + " graphs, " + std::to_string(samples) +
              " samples, zero mismatches");
}

// ---------------------------------------------------------------------------
// Criterion 2: analytic gradients vs central finite differences, relative
// error < 1e-4 over >= 100 random draws of a miniature network.

Outcome criterion2() {
  DetRng rng(0xACCE9702);
  double worst = 0;
  int draws = 0;
  for (Architecture arch : {Architecture::RecurrentGated, Architecture::Dense}) {
    ModelConfig config;
    config.architecture = arch;
    config.hidden1 = 4;
    config.hidden2 = 3;
    for (int draw = 0; draw < 60; ++draw) {
      config.seed = rng.next_u64();
      ModelParams params = init_model(config);
      for (double& v : params.values) v += rng.next_range(-0.05, 0.05);
      std::vector<LabeledTriple> batch;
      for (int i = 0; i < 3; ++i)
        batch.push_back({Triple{Asn(rng.next_u64() % 4096), Asn(rng.next_u64() % 4096),
                                Asn(rng.next_u64() % 4096)},
                         rng.next_bool(0.5) ? Label::Malicious : Label::Regular, Origin::Direct,
                         1});
      std::vector<double> grad(params.values.size(), 0.0);
      {
        detail::NetView pv = detail::NetView::map(params.spec, params.values.data());
        detail::NetView gv = detail::NetView::map(params.spec, grad.data());
        detail::ForwardCache cache;
        cache.resize(params.spec);
        std::vector<double> scratch;
        for (const LabeledTriple& lt : batch) {
          TripleEncoding enc = encode_triple(lt.triple);
          detail::backward_accumulate(pv, enc.bits.data(), class_index(lt.label), cache, gv,
                                      scratch);
        }
        for (double& gi : grad) gi /= double(batch.size());
      }
      ++draws;
      for (std::size_t index = std::size_t(draw) % 5; index < params.values.size();
           index += params.values.size() / 37 + 1) {
        const double h = 1e-5;
        ModelParams probe = params;
        probe.values[index] += h;
        double up = mean_loss(probe, batch);
        probe.values[index] -= 2 * h;
        double down = mean_loss(probe, batch);
        double fd = (up - down) / (2 * h);
        double rel = std::abs(grad[index] - fd) /
                     std::max(1e-8, std::abs(grad[index]) + std::abs(fd));
        worst = std::max(worst, rel);
        if (rel >= 1e-4)
          return fail("relative error " + std::to_string(rel) + " at parameter " +
                      std::to_string(index));
      }
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d draws, worst relative error %.2e", draws, worst);
  return pass(buf);
}

// ---------------------------------------------------------------------------
// Criterion 3: fed_avg equals hand-computed weighted means to <= 1 ulp per
// element, and single-client FL reproduces sequential training.

Outcome criterion3() {
  NetSpec spec{Architecture::Dense, 96, 6, 4, 2};
  // Hand-computed reference: group-1 fractions over five fixed updates,
  // worked out in exact rational arithmetic.
  std::vector<std::array<double, 3>> rows{
      {1, 0, 2}, {0, 1, -1}, {10, 10, 10}, {-2, 3, 0.5}, {4, -4, 4}};
  std::vector<ModelUpdate> updates;
  for (auto& row : rows) {
    ModelUpdate u;
    u.spec = spec;
    u.delta.assign(param_count(spec), 0.0);
    for (int j = 0; j < 3; ++j) u.delta[std::size_t(j)] = row[std::size_t(j)];
    updates.push_back(std::move(u));
  }
  std::vector<double> weights{51.19, 30.92, 0.51, 14.18, 3.20};
  ModelUpdate avg = fed_avg(updates, weights);
  const std::array<double, 3> expect{0.4073, 0.6576, 0.9645};
  for (int j = 0; j < 3; ++j) {
    double got = avg.delta[std::size_t(j)], want = expect[std::size_t(j)];
    double ulp = std::nextafter(want, INFINITY) - want;
    if (std::abs(got - want) > ulp)
      return fail("weighted mean off by more than 1 ulp at element " + std::to_string(j));
  }

  // Single-client equivalence. The only difference between the two routes is
  // the per-round update round-trip, bounded at one ulp per element per
  // round, so the relative deviation must sit at rounding-noise level.
  ModelConfig config;
  config.hidden1 = 6;
  config.hidden2 = 4;
  config.seed = 40;
  DetRng rng(0xACCE9703);
  ClientDataset client;
  client.id = 501;
  for (int i = 0; i < 24; ++i)
    client.samples.push_back({Triple{Asn(1 + rng.next_below(300)), Asn(1 + rng.next_below(300)),
                                     Asn(1 + rng.next_below(300))},
                              rng.next_bool(0.6) ? Label::Malicious : Label::Regular,
                              Origin::Direct, 501});
  FlConfig fl;
  fl.global_epochs = 5;
  fl.local_epochs = 2;
  fl.weighting = Weighting::Uniform;
  fl.client_seeds = {900};
  Ledger ledger;
  FlRunResult fl_run = run_fl({client}, config, fl, ledger);
  ModelParams sequential = train_epochs(init_model(config), client, 10, config, 900);
  double worst = 0;
  for (std::size_t i = 0; i < sequential.values.size(); ++i) {
    double a = fl_run.global_params.values[i], b = sequential.values[i];
    worst = std::max(worst, std::abs(a - b) / std::max({1e-12, std::abs(a), std::abs(b)}));
  }
  if (worst >= 1e-9)
    return fail("single-client FL deviates from sequential training by " + std::to_string(worst));
  char buf[96];
  std::snprintf(buf, sizeof buf, "weighted means within 1 ulp; single-client deviation %.1e",
                worst);
  return pass(buf);
}

// ---------------------------------------------------------------------------
// Criterion 4: on a 400-node Internet-like graph with five clients built
// from the size/class-unbalanced group preset, FL accuracy beats every
// single-client model and stays within 0.1 of central learning.

ExperimentConfig criterion4_config() {
  ExperimentConfig config;
  config.topology.synthetic.nodes = 400;
  config.topology.synthetic.seed = 7;
  config.participants.kind = ParticipantSpec::Kind::TopDegree;
  config.participants.top_k = 25;
  config.group = 1;
  config.pool_cap = 6000;
  config.cluster_fraction = 0.5;
  config.global_epochs = 40;
  config.local_epochs = 2;
  config.master_seed = 1;
  return config;
}

Outcome criterion4() {
  ExperimentConfig config = criterion4_config();
  PreparedExperiment prep = prepare_experiment(config);
  Ledger ledger(config.ledger);
  ModeResult fl = run_fl_mode(prep, config, ledger);
  ModeResult cl = run_central_mode(prep, config);
  double best_single = 0;
  for (int k = 1; k <= 5; ++k)
    best_single = std::max(best_single, run_single_mode(prep, config, k).metrics.accuracy);
  double gap = std::abs(fl.metrics.accuracy - cl.metrics.accuracy);
  char buf[160];
  std::snprintf(buf, sizeof buf, "FL %.4f vs best single %.4f, |FL-CL| = %.4f",
                fl.metrics.accuracy, best_single, gap);
  if (fl.metrics.accuracy <= best_single) return fail(std::string(buf) + ": single wins");
  if (gap > 0.1) return fail(std::string(buf) + ": gap above 0.1");
  return pass(buf);
}

// ---------------------------------------------------------------------------
// Criterion 5: with malicious-majority test data and a partial-participant
// repository, Recall(ML-1) < Recall(ML-0) and FL's F1 is at least every
// repository baseline's F1.

Outcome criterion5() {
  ExperimentConfig config;
  config.topology.synthetic.nodes = 400;
  config.topology.synthetic.seed = 7;
  config.participants.kind = ParticipantSpec::Kind::DegreeBand;
  config.participants.min_degree = 2;
  config.participants.max_degree = 30;
  config.participants.max_customers = 0;
  config.participants.top_k = 20;
  config.group = 2;
  config.pool_cap = 8000;
  config.cluster_fraction = 0.75;
  config.global_epochs = 100;
  config.local_epochs = 2;
  config.model.learning_rate = 0.002;
  config.master_seed = 11;

  PreparedExperiment prep = prepare_experiment(config);
  std::size_t malicious = 0;
  for (const LabeledTriple& lt : prep.eval_set) malicious += lt.label == Label::Malicious;
  if (malicious * 2 <= prep.eval_set.size()) return fail("test data is not malicious-majority");

  Ledger ledger(config.ledger);
  ModeResult fl = run_fl_mode(prep, config, ledger);
  ModeResult ml0 = run_repository_mode(prep, config, RepoPolicy::AllMalicious);
  ModeResult ml1 = run_repository_mode(prep, config, RepoPolicy::AllRegular);
  ModeResult mlr = run_repository_mode(prep, config, RepoPolicy::Random);

  char buf[200];
  std::snprintf(buf, sizeof buf,
                "Recall ml-1 %.4f < ml-0 %.4f; F1 fl %.4f vs ml-0 %.4f, ml-1 %.4f, ml-random %.4f",
                ml1.metrics.recall, ml0.metrics.recall, fl.metrics.f1, ml0.metrics.f1,
                ml1.metrics.f1, mlr.metrics.f1);
  if (ml1.metrics.recall >= ml0.metrics.recall)
    return fail(std::string(buf) + ": recall order violated");
  if (fl.metrics.f1 < ml0.metrics.f1 || fl.metrics.f1 < ml1.metrics.f1 ||
      fl.metrics.f1 < mlr.metrics.f1)
    return fail(std::string(buf) + ": a repository baseline beats FL on F1");
  return pass(buf);
}

// ---------------------------------------------------------------------------
// Criterion 6: the Peer strategy covers at least as many malicious triples as
// Customer at every tested rate <= 0.1 on Internet-like synthetic graphs, and
// reaches 0.95 coverage at rate 0.06878 on the real 2021 file when supplied.

Outcome criterion6() {
  std::vector<double> rates;
  for (int i = 1; i <= 10; ++i) rates.push_back(double(i) / 100.0);
  std::string detail;
  for (auto [nodes, seed] : std::vector<std::pair<std::uint32_t, std::uint64_t>>{
           {400, 7}, {400, 42}, {400, 99}, {500, 7}}) {
    SyntheticParams params;
    params.nodes = nodes;
    params.seed = seed;
    AsGraph g = generate_synthetic_topology(params);
    CoverageCurve peer = deployment_coverage(g, DeployStrategy::Peer, rates);
    CoverageCurve customer = deployment_coverage(g, DeployStrategy::Customer, rates);
    for (std::size_t i = 0; i < rates.size(); ++i) {
      if (peer.points[i].coverage < customer.points[i].coverage) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "n=%u seed=%llu rate %.2f: peer %.4f < customer %.4f", nodes,
                      (unsigned long long)seed, rates[i], peer.points[i].coverage,
                      customer.points[i].coverage);
        return fail(buf);
      }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "[n=%u seed=%llu peer %.3f vs customer %.3f at 0.10] ", nodes,
                  (unsigned long long)seed, peer.points.back().coverage,
                  customer.points.back().coverage);
    detail += buf;
  }
  if (const char* path = std::getenv("FLRLD_CAIDA_FILE")) {
    AsGraph g = load_as_rel(path);
    CoverageCurve peer = deployment_coverage(g, DeployStrategy::Peer, {0.06878});
    char buf[96];
    std::snprintf(buf, sizeof buf, "[real file peer coverage %.4f at 0.06878]",
                  peer.points[0].coverage);
    detail += buf;
    if (peer.points[0].coverage < 0.95) return fail(detail + ": below 0.95 on the real file");
  } else {
    detail += "[real-file check skipped: FLRLD_CAIDA_FILE not set]";
  }
  return pass(detail);
}

// ---------------------------------------------------------------------------
// Criterion 7: real-file triple distribution bands.

Outcome criterion7() {
  const char* path = std::getenv("FLRLD_CAIDA_FILE");
  if (!path)
    return skip("requires the real CAIDA relationship file; set FLRLD_CAIDA_FILE to run");
  AsGraph g = load_as_rel(path);
  NetworkDistribution dist = triple_distribution_report(g);
  char buf[128];
  std::snprintf(buf, sizeof buf, "malicious share %.4f, median inference fraction %.4f",
                dist.malicious_share, dist.median_inference_fraction);
  if (dist.malicious_share < 0.55 || dist.malicious_share > 0.75)
    return fail(std::string(buf) + ": malicious share outside [0.55, 0.75]");
  if (dist.median_inference_fraction < 0.2 || dist.median_inference_fraction > 0.4)
    return fail(std::string(buf) + ": median inference fraction outside [0.2, 0.4]");
  return pass(buf);
}

// ---------------------------------------------------------------------------
// Criterion 8: ledger audit after an FL run: chain verifies, replay
// reproduces the final model exactly, and injected single-bit tampering is
// detected.

Outcome criterion8() {
  ModelConfig model;
  model.hidden1 = 6;
  model.hidden2 = 4;
  model.seed = 9;
  DetRng rng(0xACCE9708);
  std::vector<ClientDataset> clients;
  for (Asn id : {65001, 65002, 65003}) {
    ClientDataset c;
    c.id = id;
    for (int i = 0; i < 16; ++i)
      c.samples.push_back({Triple{Asn(1 + rng.next_below(200)), Asn(1 + rng.next_below(200)),
                                  Asn(1 + rng.next_below(200))},
                           rng.next_bool(0.6) ? Label::Malicious : Label::Regular,
                           Origin::Direct, id});
    clients.push_back(std::move(c));
  }
  FlConfig fl;
  fl.global_epochs = 8;
  fl.local_epochs = 2;
  Ledger ledger;
  FlRunResult run = run_fl(clients, model, fl, ledger);
  if (!ledger.verify_chain().ok) return fail("chain does not verify after the run");
  ModelParams replayed = replay_chain(ledger);
  if (replayed.values != run.global_params.values)
    return fail("replayed parameters differ from the trained model");

  int tampers = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Ledger copy = Ledger::import_chain(ledger.export_chain());
    copy.store() = ledger.store();
    std::size_t target = rng.next_below(copy.size());
    Bytes raw = copy.block(target).canonical_bytes();
    std::size_t bit = rng.next_below(raw.size() * 8);
    raw[bit / 8] ^= std::uint8_t(1u << (bit % 8));
    bool detected = false;
    try {
      copy.mutable_block(target) = deserialize_block(raw);
      ChainVerdict verdict = copy.verify_chain();
      detected = !verdict.ok && verdict.first_failure <= target;
    } catch (const DataError&) {
      detected = true;
    }
    if (!detected)
      return fail("bit flip in block " + std::to_string(target) + " went undetected");
    ++tampers;
  }
  return pass("chain verified, replay byte-exact, " + std::to_string(tampers) +
              " random bit flips all detected");
}

// ---------------------------------------------------------------------------
// Criterion 9: with theta = 1 and full deployment every valley-free violation
// on every simple path of <= 6 hops in small graphs is detected; with
// theta = 0 none is.

Outcome criterion9() {
  DetRng rng(0xACCE9709);
  std::size_t violations = 0, paths_checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    AsGraph g = random_small_graph(rng);
    std::vector<Asn> everyone = g.nodes();
    DetectionOracle oracle = DetectionOracle::build(g, everyone, 1.0, 1);
    DetectionOracle blind = DetectionOracle::build(g, everyone, 0.0, 1);

    // Exhaustive simple-path enumeration up to 7 nodes (6 hops).
    std::vector<Asn> path;
    std::set<Asn> on_path;
    bool ok = true;
    std::function<void()> check = [&]() {
      if (!ok) return;
      if (path.size() >= 3) {
        for (std::size_t h = 1; h + 1 < path.size(); ++h) {
          Asn from = path[h - 1], middle = path[h], to = path[h + 1];
          if (!is_valley_violation(*g.role_from(middle, from), *g.role_from(middle, to)))
            continue;
          ++violations;
          if (theorem1_detect(g, everyone, path, h, oracle) != DetectionVerdict::Detected) {
            ok = false;
            return;
          }
          if (theorem1_detect(g, everyone, path, h, blind) != DetectionVerdict::NotDetected) {
            ok = false;
            return;
          }
        }
        ++paths_checked;
      }
      if (path.size() == 7) return;
      for (Asn next : g.neighbors(path.back())) {
        if (!ok) return;
        if (on_path.count(next)) continue;
        path.push_back(next);
        on_path.insert(next);
        check();
        on_path.erase(next);
        path.pop_back();
      }
    };
    for (Asn start : everyone) {
      path = {start};
      on_path = {start};
      check();
    }
    if (!ok) return fail("a path violation was missed (or detected at theta 0)");
  }
  return pass(std::to_string(paths_checked) + " simple paths, " + std::to_string(violations) +
              " injected violations all detected at theta 1 and none at theta 0");
}

// ---------------------------------------------------------------------------
// Criterion 10: the cost calculator reproduces the hand-evaluated example and
// is linear in each unit cost.

Outcome criterion10() {
  CostParams p = CostParams::uniform(2, 3, 5, 1.0, 2.0, 1.0, 4.0, 10.0);
  CostBreakdown b = total_cost(p);
  if (b.local_computation != 50.0 || b.exchange != 40.0 || b.consensus != 40.0 ||
      b.storage != 100.0 || b.total != 230.0)
    return fail("hand-evaluated breakdown mismatch");
  p.per_round_consensus_and_storage = true;
  CostBreakdown hoisted = total_cost(p);
  if (hoisted.consensus != 8.0 || hoisted.storage != 20.0 || hoisted.total != 118.0)
    return fail("per-round accounting mismatch");

  DetRng rng(0xACCE970A);
  for (int trial = 0; trial < 50; ++trial) {
    double v[5];
    for (double& x : v) x = rng.next_unit() * 10.0;
    std::size_t ge = 1 + rng.next_below(5), ce = 1 + rng.next_below(5), n = 1 + rng.next_below(7);
    double factor = 0.5 + rng.next_unit() * 4.0;
    CostBreakdown base = total_cost(CostParams::uniform(ge, ce, n, v[0], v[1], v[2], v[3], v[4]));
    CostBreakdown sc_broadcast =
        total_cost(CostParams::uniform(ge, ce, n, v[0], v[1], factor * v[2], v[3], v[4]));
    CostBreakdown sc_consensus =
        total_cost(CostParams::uniform(ge, ce, n, v[0], v[1], v[2], factor * v[3], v[4]));
    CostBreakdown sc_storage =
        total_cost(CostParams::uniform(ge, ce, n, v[0], v[1], v[2], v[3], factor * v[4]));
    CostBreakdown sc_local =
        total_cost(CostParams::uniform(ge, ce, n, factor * v[0], factor * v[1], v[2], v[3], v[4]));
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
    if (!close(sc_broadcast.exchange, factor * base.exchange) ||
        !close(sc_consensus.consensus, factor * base.consensus) ||
        !close(sc_storage.storage, factor * base.storage) ||
        !close(sc_local.local_computation, factor * base.local_computation))
      return fail("linearity violated");
  }
  return pass("pinned example exact (230 literal / 118 per-round); linearity holds");
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
  }
  struct Criterion {
    int number;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "labeling oracle equivalence", criterion1},
      {2, "gradient check", criterion2},
      {3, "fedavg exactness", criterion3},
      {4, "fl beats single-AS", criterion4},
      {5, "baseline ordering", criterion5},
      {6, "deployment coverage", criterion6},
      {7, "triple-distribution bands", criterion7},
      {8, "ledger audit", criterion8},
      {9, "theorem-1 oracle", criterion9},
      {10, "cost calculator", criterion10},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.number != only) continue;
    auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = fail(std::string("exception: ") + e.what());
    }
    double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    const char* tag = outcome.kind == Outcome::Pass ? "PASS"
                      : outcome.kind == Outcome::Skip ? "SKIP"
                                                      : "FAIL";
    std::printf("criterion %2d [%s] %s: %s (%.1fs)\n", c.number, tag, c.name,
                outcome.detail.c_str(), elapsed);
    std::fflush(stdout);
    if (outcome.kind == Outcome::Fail) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
