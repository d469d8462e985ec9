#include <catch2/catch_amalgamated.hpp>

#include "flrld/baselines.hpp"
#include "flrld/fedlearn.hpp"
#include "flrld/rng.hpp"

using namespace flrld;

namespace {

AsGraph fig1a() {
  return AsGraph::from_edges(
      {p2c_edge(1, 4), p2c_edge(2, 4), p2p_edge(1, 2), p2c_edge(2, 3)});
}

AsGraph random_graph(DetRng& rng, int max_nodes = 8) {
  int n = 3 + int(rng.next_below(std::uint64_t(max_nodes - 2)));
  std::vector<Edge> edges;
  for (Asn v = 2; v <= Asn(n); ++v) {
    Asn u = 1 + Asn(rng.next_below(v - 1));
    int kind = int(rng.next_below(3));
    edges.push_back(kind == 0 ? p2p_edge(u, v) : kind == 1 ? p2c_edge(u, v) : p2c_edge(v, u));
  }
  for (Asn a = 1; a <= Asn(n); ++a)
    for (Asn b = a + 1; b <= Asn(n); ++b) {
      bool exists = false;
      for (const Edge& e : edges)
        if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) exists = true;
      if (exists || !rng.next_bool(0.4)) continue;
      int kind = int(rng.next_below(3));
      edges.push_back(kind == 0 ? p2p_edge(a, b) : kind == 1 ? p2c_edge(a, b) : p2c_edge(b, a));
    }
  return AsGraph::from_edges(edges);
}

ModelConfig tiny_config() {
  ModelConfig c;
  c.hidden1 = 6;
  c.hidden2 = 4;
  c.seed = 13;
  return c;
}

}  // namespace

TEST_CASE("build_global_repository") {
  AsGraph g = fig1a();
  SECTION("all nodes give the full edge set") {
    GlobalRepository repo = build_global_repository(g, g.nodes());
    CHECK(repo.size() == g.edge_count());
  }
  SECTION("no participants give an empty repository") {
    GlobalRepository repo = build_global_repository(g, {});
    CHECK(repo.size() == 0);
  }
  SECTION("participant {AS2} knows only links incident to AS2") {
    GlobalRepository repo = build_global_repository(g, {2});
    CHECK(repo.knows(2, 4));
    CHECK(repo.knows(2, 3));
    CHECK(repo.knows(1, 2));
    CHECK_FALSE(repo.knows(1, 4));
    CHECK(repo.role_from(4, 2) == Role::Provider);
    CHECK(repo.role_from(2, 1) == Role::Peer);
    CHECK_FALSE(repo.role_from(1, 4).has_value());
  }
  SECTION("unknown participant is an error") {
    CHECK_THROWS_AS(build_global_repository(g, {99}), DataError);
  }
}

TEST_CASE("ml_predict") {
  AsGraph g = fig1a();
  GlobalRepository partial = build_global_repository(g, {2});
  Triple known_malicious{1, 4, 2};   // both links known through AS2? (1,4) unknown
  GlobalRepository full = build_global_repository(g, g.nodes());

  SECTION("fully-known triples get the valley-free verdict under any policy") {
    for (RepoPolicy policy : {RepoPolicy::Random, RepoPolicy::AllMalicious,
                              RepoPolicy::AllRegular}) {
      CHECK(ml_predict(full, Triple{1, 4, 2}, policy, 5) == Label::Malicious);
      CHECK(ml_predict(full, Triple{4, 2, 3}, policy, 5) == Label::Regular);
    }
  }
  SECTION("unknown triples fall back to the policy") {
    REQUIRE_FALSE(partial.knows(1, 4));
    CHECK(ml_predict(partial, known_malicious, RepoPolicy::AllMalicious, 5) == Label::Malicious);
    CHECK(ml_predict(partial, known_malicious, RepoPolicy::AllRegular, 5) == Label::Regular);
  }
  SECTION("random policy is a pure function of seed and triple") {
    int flips = 0;
    for (Asn i = 0; i < 200; ++i) {
      Triple t{1000 + i, 2000 + i, 3000 + i};
      Label a = ml_predict(partial, t, RepoPolicy::Random, 99);
      Label b = ml_predict(partial, t, RepoPolicy::Random, 99);
      REQUIRE(a == b);
      if (ml_predict(partial, t, RepoPolicy::Random, 100) != a) ++flips;
    }
    CHECK(flips > 50);  // a different seed decides differently often
  }
  SECTION("random policy hits each class about half the time") {
    int malicious = 0;
    const int n = 2000;
    for (Asn i = 0; i < Asn(n); ++i) {
      Triple t{10000 + i, 20000 + i, 30000 + i};
      if (ml_predict(partial, t, RepoPolicy::Random, 7) == Label::Malicious) ++malicious;
    }
    CHECK(malicious > n / 2 - 150);
    CHECK(malicious < n / 2 + 150);
  }
  SECTION("complete repository equals the valley-free oracle exhaustively") {
    DetRng rng(55);
    for (int trial = 0; trial < 80; ++trial) {
      AsGraph graph = random_graph(rng);
      GlobalRepository repo = build_global_repository(graph, graph.nodes());
      for (Asn m : graph.nodes()) {
        for (Asn ni : graph.neighbors(m)) {
          for (Asn nj : graph.neighbors(m)) {
            if (ni == nj) continue;
            Label expect = is_valley_violation(*graph.role_from(m, ni), *graph.role_from(m, nj))
                               ? Label::Malicious
                               : Label::Regular;
            REQUIRE(ml_predict(repo, Triple{ni, m, nj}, RepoPolicy::Random, trial) == expect);
          }
        }
      }
    }
  }
}

TEST_CASE("recall ordering between the all-regular and all-malicious policies") {
  // Malicious-majority test data with a partial repository: unknown malicious
  // triples are all missed by AllRegular and all caught by AllMalicious.
  DetRng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    AsGraph g = random_graph(rng);
    std::vector<Asn> participants{g.nodes()[0]};
    GlobalRepository repo = build_global_repository(g, participants);
    std::vector<LabeledTriple> test;
    for (Asn m : g.nodes()) {
      ClientDataset d = generate_local_dataset(g, m);
      for (const LabeledTriple& lt : d.samples) test.push_back(lt);
    }
    std::size_t malicious = 0;
    for (const LabeledTriple& lt : test) malicious += lt.label == Label::Malicious;
    if (malicious * 2 <= test.size() || malicious == test.size()) continue;
    auto recall_of = [&](RepoPolicy policy) {
      std::vector<Label> preds, truths;
      for (const LabeledTriple& lt : test) {
        preds.push_back(ml_predict(repo, lt.triple, policy, 1));
        truths.push_back(lt.label);
      }
      return compute_metrics(preds, truths).recall;
    };
    double r_regular = recall_of(RepoPolicy::AllRegular);
    double r_malicious = recall_of(RepoPolicy::AllMalicious);
    REQUIRE(r_regular <= r_malicious);
    REQUIRE(r_malicious == 1.0);  // every malicious triple is flagged
  }
}

TEST_CASE("train_central") {
  ModelConfig config = tiny_config();
  DetRng rng(31);
  std::vector<ClientDataset> clients;
  for (Asn id = 1; id <= 3; ++id) {
    ClientDataset c;
    c.id = id;
    for (int i = 0; i < 12; ++i) {
      Triple t{Asn(1 + rng.next_below(99)), Asn(100 + rng.next_below(99)),
               Asn(200 + rng.next_below(99))};
      c.samples.push_back(
          {t, rng.next_bool(0.5) ? Label::Malicious : Label::Regular, Origin::Direct, id});
    }
    clients.push_back(std::move(c));
  }
  SECTION("one client equals plain training on the canonical order") {
    ClientDataset sorted_client = clients[0];
    std::sort(sorted_client.samples.begin(), sorted_client.samples.end(),
              [](const LabeledTriple& a, const LabeledTriple& b) {
                return std::tuple(a.owner, a.triple, int(a.origin), int(a.label)) <
                       std::tuple(b.owner, b.triple, int(b.origin), int(b.label));
              });
    ModelParams central = train_central({clients[0]}, config, 4, 9);
    ModelParams plain = train_epochs(init_model(config), sorted_client, 4, config, 9);
    CHECK(central.values == plain.values);
  }
  SECTION("client concatenation order does not matter") {
    ModelParams a = train_central(clients, config, 3, 5);
    ModelParams b = train_central({clients[2], clients[0], clients[1]}, config, 3, 5);
    CHECK(a.values == b.values);
  }
  SECTION("empty union is rejected") {
    std::vector<ClientDataset> empty;
    CHECK_THROWS_AS(train_central(empty, config, 1, 0), DataError);
  }
}

TEST_CASE("train_single on a one-sided client") {
  // A client that only ever saw malicious samples aces its own data but
  // misses every regular sample in the pooled set.
  ModelConfig config;
  config.seed = 8;
  ClientDataset mono;
  mono.id = 1;
  DetRng rng(2);
  for (int i = 0; i < 12; ++i)
    mono.samples.push_back({Triple{Asn(10 + i), Asn(50 + i), Asn(90 + i)}, Label::Malicious,
                            Origin::Direct, 1});
  ModelParams model = train_single(mono, config, 60, 4);
  Metrics own = evaluate(model, mono.samples);
  CHECK(own.accuracy == 1.0);

  std::vector<LabeledTriple> pooled = mono.samples;
  std::vector<LabeledTriple> regulars;
  for (int i = 0; i < 12; ++i)
    regulars.push_back({Triple{Asn(90 + i), Asn(50 + i), Asn(10 + i)}, Label::Regular,
                        Origin::Direct, 2});
  pooled.insert(pooled.end(), regulars.begin(), regulars.end());
  Metrics on_pool = evaluate(model, pooled);
  Metrics on_regulars = evaluate(model, regulars);
  CHECK(on_pool.accuracy < 1.0);
  CHECK(on_regulars.accuracy < 0.5);  // regular samples are mostly misflagged
  CHECK_THROWS_AS(train_single(ClientDataset{}, config, 1, 0), DataError);
}
