#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "flrld/rng.hpp"
#include "flrld/topology.hpp"
#include "flrld/tripledata.hpp"

namespace flrld {

// ---------------------------------------------------------------------------
// Detection metrics. Malicious is the positive class.

struct Metrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  // Zero-denominator ratios are reported as 0 with the matching flag set.
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;
};

inline Metrics compute_metrics(std::span<const Label> predictions, std::span<const Label> truths) {
  if (predictions.size() != truths.size())
    throw DataError("predictions and truths differ in length");
  if (predictions.empty()) throw DataError("empty metric input");
  Metrics m;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    bool pred_mal = predictions[i] == Label::Malicious;
    bool true_mal = truths[i] == Label::Malicious;
    if (pred_mal && true_mal) ++m.tp;
    else if (pred_mal && !true_mal) ++m.fp;
    else if (!pred_mal && true_mal) ++m.fn;
    else ++m.tn;
  }
  m.accuracy = double(m.tp + m.tn) / double(predictions.size());
  if (m.tp + m.fp > 0) m.precision = double(m.tp) / double(m.tp + m.fp);
  else m.precision_degenerate = true;
  if (m.tp + m.fn > 0) m.recall = double(m.tp) / double(m.tp + m.fn);
  else m.recall_degenerate = true;
  if (m.precision + m.recall > 0)
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  else m.f1_degenerate = true;
  return m;
}

// ---------------------------------------------------------------------------
// Per-AS triple census in closed form. For an AS with degree d, u of whose
// neighbors are providers or peers, and V visible ordered neighbor pairs:
//   direct = d(d-1), of which u(u-1) are malicious;
//   inference = d(d-1), of which d(d-1)-V are malicious;
//   reverse = V, all regular.
// V counts ordered neighbor pairs (ni, nj) that are graph edges and whose
// export toward the owner keeps valley-free, so it only needs the triangles
// through the owner.

struct TripleCensus {
  Asn asn = 0;
  std::size_t degree = 0;
  std::size_t direct_total = 0;
  std::size_t direct_malicious = 0;
  std::size_t inference_total = 0;
  std::size_t inference_malicious = 0;
  std::size_t reverse_total = 0;

  std::size_t total() const { return direct_total + inference_total + reverse_total; }
  std::size_t malicious() const { return direct_malicious + inference_malicious; }
  std::size_t regular() const { return total() - malicious(); }
  double inference_fraction() const {
    return total() == 0 ? 0.0 : double(inference_total) / double(total());
  }
};

inline TripleCensus triple_census(const AsGraph& g, Asn m) {
  TripleCensus c;
  c.asn = m;
  const std::vector<Asn>& nbrs = g.neighbors(m);
  c.degree = nbrs.size();
  std::size_t pp = 0;
  for (Asn nb : nbrs)
    if (is_provider_or_peer(*g.role_from(m, nb))) ++pp;
  std::size_t ordered_pairs = c.degree < 2 ? 0 : c.degree * (c.degree - 1);
  c.direct_total = ordered_pairs;
  c.direct_malicious = pp < 2 ? 0 : pp * (pp - 1);
  c.inference_total = ordered_pairs;

  std::size_t visible = 0;
  // Ordered pairs (ni, nj) of neighbors with an edge between them: iterate
  // the smaller adjacency list of each unordered pair once.
  std::unordered_set<Asn> nbr_set(nbrs.begin(), nbrs.end());
  for (Asn nj : nbrs) {
    bool export_side_pp = is_provider_or_peer(*g.role_from(nj, m));
    const std::vector<Asn>& via = g.neighbors(nj);
    if (via.size() > nbrs.size() * 8 && nbrs.size() < 64) {
      for (Asn ni : nbrs) {
        if (ni == nj || !g.has_edge(ni, nj)) continue;
        if (!(is_provider_or_peer(*g.role_from(nj, ni)) && export_side_pp)) ++visible;
      }
    } else {
      for (Asn ni : via) {
        if (ni == m || nbr_set.count(ni) == 0) continue;
        if (!(is_provider_or_peer(*g.role_from(nj, ni)) && export_side_pp)) ++visible;
      }
    }
  }
  c.inference_malicious = ordered_pairs - visible;
  c.reverse_total = visible;
  return c;
}

struct NetworkDistribution {
  std::vector<TripleCensus> per_as;  // sorted by ASN
  std::size_t total_triples = 0;
  std::size_t total_malicious = 0;
  std::size_t total_regular = 0;
  double malicious_share = 0;
  double regular_share = 0;
  // Sorted per-AS inference fractions; reading it at k/n gives the CDF.
  std::vector<double> inference_fraction_cdf;
  double median_inference_fraction = 0;
};

// Aggregate malicious/regular shares of the training data the whole network
// would generate, and the distribution of per-AS inference-triple fractions.
inline NetworkDistribution triple_distribution_report(const AsGraph& g) {
  NetworkDistribution report;
  report.per_as.reserve(g.node_count());
  for (Asn m : g.nodes()) {
    TripleCensus c = triple_census(g, m);
    report.total_triples += c.total();
    report.total_malicious += c.malicious();
    if (c.total() > 0) report.inference_fraction_cdf.push_back(c.inference_fraction());
    report.per_as.push_back(std::move(c));
  }
  report.total_regular = report.total_triples - report.total_malicious;
  if (report.total_triples > 0) {
    report.malicious_share = double(report.total_malicious) / double(report.total_triples);
    report.regular_share = double(report.total_regular) / double(report.total_triples);
  }
  std::sort(report.inference_fraction_cdf.begin(), report.inference_fraction_cdf.end());
  if (!report.inference_fraction_cdf.empty()) {
    std::size_t n = report.inference_fraction_cdf.size();
    report.median_inference_fraction =
        n % 2 == 1 ? report.inference_fraction_cdf[n / 2]
                   : 0.5 * (report.inference_fraction_cdf[n / 2 - 1] +
                            report.inference_fraction_cdf[n / 2]);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Deployment coverage. A malicious triple key (a, b, c) can enter the pooled
// training data in at most two ways: as a direct triple of owner b or as an
// inference triple of owner c. Coverage over a deployed set S is therefore
//   sum_{m in S} direct_mal(m) + inference_mal(m)
//     - #{(a,b,c) generated both ways with b in S and c in S},
// and the double-generated triples are exactly the triangles (a,b,c) whose
// apex b sees both a and c as providers or peers. This counts distinct keys
// without materializing them, which keeps real-topology runs in O(V+E).

enum class DeployStrategy { Peer, Customer, Provider };

inline const char* to_string(DeployStrategy s) {
  switch (s) {
    case DeployStrategy::Peer: return "peer";
    case DeployStrategy::Customer: return "customer";
    case DeployStrategy::Provider: return "provider";
  }
  return "?";
}

struct CoveragePoint {
  double rate = 0;
  std::size_t deployed = 0;
  std::size_t covered_malicious = 0;
  double coverage = 0;
};

struct CoverageCurve {
  DeployStrategy strategy = DeployStrategy::Peer;
  std::size_t total_malicious = 0;  // distinct keys network-wide
  std::vector<CoveragePoint> points;
};

namespace detail {

struct CoverageIndex {
  std::vector<Asn> nodes;                                   // sorted
  std::unordered_map<Asn, std::size_t> node_pos;
  std::vector<std::size_t> own_malicious;                   // direct+inference per node
  std::unordered_map<std::uint64_t, std::size_t> overlap;   // ordered edge (b,c) -> #a
};

inline CoverageIndex build_coverage_index(const AsGraph& g) {
  CoverageIndex idx;
  idx.nodes = g.nodes();
  idx.own_malicious.resize(idx.nodes.size());
  for (std::size_t i = 0; i < idx.nodes.size(); ++i) idx.node_pos[idx.nodes[i]] = i;
  for (std::size_t i = 0; i < idx.nodes.size(); ++i) {
    TripleCensus c = triple_census(g, idx.nodes[i]);
    idx.own_malicious[i] = c.direct_malicious + c.inference_malicious;
  }
  // Overlap: for each apex b and ordered pair of provider-or-peer neighbors
  // (a, c) with edge (a, c), the key (a, b, c) is generated by both b and c.
  for (Asn b : idx.nodes) {
    std::vector<Asn> pp;
    for (Asn nb : g.neighbors(b))
      if (is_provider_or_peer(*g.role_from(b, nb))) pp.push_back(nb);
    for (Asn c : pp) {
      std::size_t count = 0;
      for (Asn a : pp)
        if (a != c && g.has_edge(a, c)) ++count;
      if (count > 0) idx.overlap[(std::uint64_t(b) << 32) | c] += count;
    }
  }
  return idx;
}

}  // namespace detail

inline std::vector<Asn> deployment_ranking(const AsGraph& g, DeployStrategy strategy) {
  std::vector<std::pair<std::size_t, Asn>> ranked;
  ranked.reserve(g.node_count());
  for (Asn a : g.nodes()) {
    DegreeProfile p = g.degree_profile(a);
    std::size_t score = strategy == DeployStrategy::Peer       ? p.peers
                        : strategy == DeployStrategy::Customer ? p.customers
                                                               : p.providers;
    ranked.emplace_back(score, a);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });
  std::vector<Asn> order;
  order.reserve(ranked.size());
  for (const auto& [score, asn] : ranked) order.push_back(asn);
  return order;
}

inline CoverageCurve deployment_coverage(const AsGraph& g, DeployStrategy strategy,
                                         std::vector<double> rates) {
  for (double r : rates)
    if (r < 0.0 || r > 1.0) throw DataError("deployment rate outside [0,1]");
  detail::CoverageIndex idx = detail::build_coverage_index(g);
  std::vector<Asn> order = deployment_ranking(g, strategy);

  // Add nodes in rank order, tracking the distinct-malicious-key count.
  std::vector<std::size_t> covered_at(order.size() + 1, 0);
  std::vector<char> deployed(g.node_count(), 0);
  std::size_t covered = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    Asn x = order[k];
    std::size_t xi = idx.node_pos.at(x);
    covered += idx.own_malicious[xi];
    for (Asn nb : g.neighbors(x)) {
      std::size_t ni = idx.node_pos.at(nb);
      if (!deployed[ni]) continue;
      auto it = idx.overlap.find((std::uint64_t(x) << 32) | nb);
      if (it != idx.overlap.end()) covered -= it->second;
      it = idx.overlap.find((std::uint64_t(nb) << 32) | x);
      if (it != idx.overlap.end()) covered -= it->second;
    }
    deployed[xi] = 1;
    covered_at[k + 1] = covered;
  }

  CoverageCurve curve;
  curve.strategy = strategy;
  curve.total_malicious = covered_at[order.size()];
  std::sort(rates.begin(), rates.end());
  for (double r : rates) {
    CoveragePoint p;
    p.rate = r;
    p.deployed = std::size_t(std::ceil(r * double(g.node_count())));
    p.deployed = std::min(p.deployed, order.size());
    p.covered_malicious = covered_at[p.deployed];
    p.coverage = curve.total_malicious == 0
                     ? 0.0
                     : double(p.covered_malicious) / double(curve.total_malicious);
    curve.points.push_back(p);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Theorem-1 style detection oracle: pooled training data of the deployed set
// with the fraction of identifiable malicious triples capped at theta.

enum class DetectionVerdict { Detected, NotDetected };

class DetectionOracle {
 public:
  // Pools the malicious triple keys generated by every deployed AS, then
  // keeps a deterministic theta-fraction of them as identifiable.
  static DetectionOracle build(const AsGraph& g, const std::vector<Asn>& deployed, double theta,
                               std::uint64_t seed) {
    if (theta < 0.0 || theta > 1.0) throw DataError("theta outside [0,1]");
    std::unordered_set<TripleKey, TripleKeyHash> pooled;
    for (Asn m : deployed) {
      ClientDataset data = generate_local_dataset(g, m);
      for (const LabeledTriple& lt : data.samples)
        if (lt.label == Label::Malicious) pooled.insert(triple_key(lt.triple));
    }
    std::vector<TripleKey> keys(pooled.begin(), pooled.end());
    std::sort(keys.begin(), keys.end());
    std::size_t keep = std::size_t(theta * double(keys.size()));
    if (theta == 1.0) keep = keys.size();
    DetRng rng(seed);
    deterministic_shuffle(std::span(keys), rng);
    DetectionOracle oracle;
    oracle.identifiable_.insert(keys.begin(), keys.begin() + std::ptrdiff_t(keep));
    oracle.pooled_total_ = keys.size();
    return oracle;
  }

  bool identifies(const Triple& t) const { return identifiable_.count(triple_key(t)) != 0; }
  std::size_t pooled_malicious() const { return pooled_total_; }
  std::size_t identifiable_count() const { return identifiable_.size(); }

 private:
  std::unordered_set<TripleKey, TripleKeyHash> identifiable_;
  std::size_t pooled_total_ = 0;
};

// Path is the full announcement walk including the receiving AS as its last
// element; leaker_index points at the leaking AS within it.
inline DetectionVerdict theorem1_detect(const AsGraph& g, const std::vector<Asn>& deployed,
                                        const std::vector<Asn>& path, std::size_t leaker_index,
                                        const DetectionOracle& oracle) {
  if (path.size() < 3) throw DataError("path must have at least 3 ASes");
  if (leaker_index == 0 || leaker_index + 1 >= path.size())
    throw DataError("leaker must be an interior AS of the path");
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    if (!g.has_edge(path[i], path[i + 1]))
      throw DataError("disconnected path: no link " + std::to_string(path[i]) + "-" +
                      std::to_string(path[i + 1]));
  Asn receiver = path.back();
  if (std::find(deployed.begin(), deployed.end(), receiver) == deployed.end())
    throw DataError("receiving AS " + std::to_string(receiver) + " is not deployed");

  Triple t{path[leaker_index - 1], path[leaker_index], path[leaker_index + 1]};
  return oracle.identifies(t) ? DetectionVerdict::Detected : DetectionVerdict::NotDetected;
}

// ---------------------------------------------------------------------------
// Theoretical cost of a training task. The printed cost formula keeps the
// consensus and storage terms inside the per-participant sum; the per_round
// accounting switch hoists them out so each is paid once per global epoch.

struct CostParams {
  std::size_t global_epochs = 1;  // ge
  std::size_t local_epochs = 1;   // ce
  std::vector<std::size_t> dataset_sizes;  // |D_m| per participant; defines |M|

  // Cost hooks. Defaults are constant-zero; use uniform() for flat unit costs.
  std::function<double(std::size_t k, std::size_t m, std::size_t epoch, std::size_t size)>
      local_epoch_cost = [](auto...) { return 0.0; };
  std::function<double(std::size_t k)> aggregation_cost = [](auto...) { return 0.0; };
  std::function<double(std::size_t k, std::size_t m)> broadcast_cost = [](auto...) { return 0.0; };
  std::function<double(std::size_t k, std::size_t participants)> consensus_cost =
      [](auto...) { return 0.0; };
  std::function<double(std::size_t k)> storage_cost = [](auto...) { return 0.0; };

  bool per_round_consensus_and_storage = false;

  static CostParams uniform(std::size_t ge, std::size_t ce, std::size_t participants,
                            double local, double aggregation, double broadcast, double consensus,
                            double storage) {
    CostParams p;
    p.global_epochs = ge;
    p.local_epochs = ce;
    p.dataset_sizes.assign(participants, 1);
    p.local_epoch_cost = [local](auto...) { return local; };
    p.aggregation_cost = [aggregation](auto...) { return aggregation; };
    p.broadcast_cost = [broadcast](auto...) { return broadcast; };
    p.consensus_cost = [consensus](auto...) { return consensus; };
    p.storage_cost = [storage](auto...) { return storage; };
    return p;
  }
};

struct CostBreakdown {
  double local_computation = 0;
  double exchange = 0;
  double consensus = 0;
  double storage = 0;
  double total = 0;
};

inline CostBreakdown total_cost(const CostParams& p) {
  if (p.dataset_sizes.empty()) throw DataError("cost model needs at least one participant");
  const std::size_t n = p.dataset_sizes.size();
  CostBreakdown out;
  for (std::size_t k = 1; k <= p.global_epochs; ++k) {
    for (std::size_t m = 0; m < n; ++m) {
      double local = 0;
      for (std::size_t i = 1; i <= p.local_epochs; ++i)
        local += p.local_epoch_cost(k, m, i, p.dataset_sizes[m]);
      out.local_computation += local + p.aggregation_cost(k);
      out.exchange += double(n - 1) * p.broadcast_cost(k, m);
      if (!p.per_round_consensus_and_storage) {
        out.consensus += p.consensus_cost(k, n);
        out.storage += p.storage_cost(k);
      }
    }
    if (p.per_round_consensus_and_storage) {
      out.consensus += p.consensus_cost(k, n);
      out.storage += p.storage_cost(k);
    }
  }
  out.total = out.local_computation + out.exchange + out.consensus + out.storage;
  return out;
}

}  // namespace flrld
