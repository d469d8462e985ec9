#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "flrld/rng.hpp"
#include "flrld/topology.hpp"

namespace flrld {

// Ordered AS triple: a route learned from `first` by `middle`, exported to
// `last`. The middle AS is the possible leaker.
struct Triple {
  Asn first = 0;
  Asn middle = 0;
  Asn last = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Packs a triple into one 96-bit key (as 12 bytes in a 16-byte integer).
using TripleKey = unsigned __int128;

inline TripleKey triple_key(const Triple& t) {
  return (TripleKey(t.first) << 64) | (TripleKey(t.middle) << 32) | TripleKey(t.last);
}

struct TripleKeyHash {
  std::size_t operator()(TripleKey k) const {
    std::uint64_t lo = static_cast<std::uint64_t>(k);
    std::uint64_t hi = static_cast<std::uint64_t>(k >> 64);
    std::uint64_t s = hi ^ (lo + 0x9e3779b97f4a7c15ULL + (hi << 6));
    return static_cast<std::size_t>(splitmix64(s));
  }
};

enum class Label : std::uint8_t { Malicious = 0, Regular = 1 };
enum class Origin : std::uint8_t { Direct, Inference, Reverse };

inline const char* to_string(Label l) { return l == Label::Malicious ? "malicious" : "regular"; }
inline const char* to_string(Origin o) {
  switch (o) {
    case Origin::Direct: return "direct";
    case Origin::Inference: return "inference";
    case Origin::Reverse: return "reverse";
  }
  return "?";
}

struct LabeledTriple {
  Triple triple;
  Label label = Label::Regular;
  Origin origin = Origin::Direct;
  Asn owner = 0;

  friend bool operator==(const LabeledTriple&, const LabeledTriple&) = default;
};

// A leak happens exactly when a route learned from a provider or peer is
// exported to another provider or peer (leak Types 1-4).
inline bool is_valley_violation(Role rel_of_first_wrt_middle, Role rel_of_last_wrt_middle) {
  return is_provider_or_peer(rel_of_first_wrt_middle) &&
         is_provider_or_peer(rel_of_last_wrt_middle);
}

// Stand-in for the stable RIB of a deployed AS: the set of ordered links
// (n_i, n_j) whose routes the owner could legitimately have received, derived
// from ground-truth relationships under the valley-free rule.
struct VisibleLinkSet {
  Asn owner = 0;
  std::unordered_set<std::uint64_t> links;

  static std::uint64_t key(Asn from, Asn via) { return (std::uint64_t(from) << 32) | via; }
  bool contains(Asn from, Asn via) const { return links.count(key(from, via)) != 0; }
  std::size_t size() const { return links.size(); }
};

// True when exporting a route learned from `from` by `via` to `to` violates
// valley-free. Requires both links to exist.
inline bool export_violates(const AsGraph& g, Asn from, Asn via, Asn to) {
  auto learned_side = g.role_from(via, from);
  auto exported_side = g.role_from(via, to);
  if (!learned_side || !exported_side)
    throw InvariantError("export_violates requires both links to exist");
  return is_valley_violation(*learned_side, *exported_side);
}

inline VisibleLinkSet simulate_visible_links(const AsGraph& g, Asn m) {
  VisibleLinkSet visible;
  visible.owner = m;
  for (Asn via : g.neighbors(m)) {
    for (Asn from : g.neighbors(via)) {
      if (from == m) continue;
      if (!export_violates(g, from, via, m))
        visible.links.insert(VisibleLinkSet::key(from, via));
    }
  }
  return visible;
}

struct DatasetStats {
  std::size_t total = 0;
  std::size_t malicious = 0;
  std::size_t regular = 0;
  std::size_t direct = 0;
  std::size_t inference = 0;
  std::size_t reverse = 0;
};

// One participant's local training data. Stats are always recomputed from the
// samples, never trusted from input.
struct ClientDataset {
  Asn id = 0;  // owner ASN, or a synthetic client id for partitioned groups
  std::vector<LabeledTriple> samples;

  DatasetStats stats() const {
    DatasetStats s;
    s.total = samples.size();
    for (const LabeledTriple& lt : samples) {
      (lt.label == Label::Malicious ? s.malicious : s.regular)++;
      switch (lt.origin) {
        case Origin::Direct: ++s.direct; break;
        case Origin::Inference: ++s.inference; break;
        case Origin::Reverse: ++s.reverse; break;
      }
    }
    return s;
  }
};

// Rejects duplicate (triple, origin) pairs; a label conflict under the same
// key means the generator (or an imported file) is inconsistent.
inline void validate_dataset(const ClientDataset& data) {
  struct Entry {
    Origin origin;
    Label label;
  };
  std::unordered_map<TripleKey, std::vector<Entry>, TripleKeyHash> seen;
  for (const LabeledTriple& lt : data.samples) {
    auto& entries = seen[triple_key(lt.triple)];
    for (const Entry& e : entries) {
      if (e.origin == lt.origin) {
        if (e.label != lt.label)
          throw InvariantError("conflicting labels for one (triple, origin) key");
        throw InvariantError("duplicate sample in dataset");
      }
    }
    entries.push_back(Entry{lt.origin, lt.label});
  }
}

// Local training data of a deployed AS m: for every ordered pair of distinct
// neighbors (n_i, n_j), one direct triple (n_i, m, n_j) labeled by the
// valley-free rule, one inference triple (n_i, n_j, m) labeled by visibility,
// and a regular reverse triple (m, n_j, n_i) for each visible pair.
inline ClientDataset generate_local_dataset(const AsGraph& g, Asn m,
                                            const VisibleLinkSet& visible) {
  if (visible.owner != m)
    throw DataError("visible link set owned by AS " + std::to_string(visible.owner) +
                    ", expected " + std::to_string(m));
  ClientDataset data;
  data.id = m;
  const std::vector<Asn>& nbrs = g.neighbors(m);  // sorted
  data.samples.reserve(nbrs.size() * (nbrs.size() - 1) * 2);
  for (Asn ni : nbrs) {
    Role role_ni = *g.role_from(m, ni);
    for (Asn nj : nbrs) {
      if (ni == nj) continue;
      Role role_nj = *g.role_from(m, nj);
      Label direct_label = is_valley_violation(role_ni, role_nj) ? Label::Malicious
                                                                 : Label::Regular;
      data.samples.push_back({Triple{ni, m, nj}, direct_label, Origin::Direct, m});
      if (visible.contains(ni, nj)) {
        data.samples.push_back({Triple{ni, nj, m}, Label::Regular, Origin::Inference, m});
        data.samples.push_back({Triple{m, nj, ni}, Label::Regular, Origin::Reverse, m});
      } else {
        data.samples.push_back({Triple{ni, nj, m}, Label::Malicious, Origin::Inference, m});
      }
    }
  }
  validate_dataset(data);
  return data;
}

inline ClientDataset generate_local_dataset(const AsGraph& g, Asn m) {
  return generate_local_dataset(g, m, simulate_visible_links(g, m));
}

// ---------------------------------------------------------------------------
// Distribution reporting.

struct ClientDistribution {
  Asn id = 0;
  std::size_t total = 0;
  std::size_t malicious = 0;
  std::size_t regular = 0;
  double malicious_pct = 0;
  double regular_pct = 0;
  // Fraction of inference-origin samples among all samples, and the same with
  // reverse samples included.
  double inference_fraction = 0;
  double inference_reverse_fraction = 0;
};

struct DistributionReport {
  std::vector<ClientDistribution> per_client;
  ClientDistribution aggregate;
};

inline DistributionReport dataset_distribution(const std::vector<ClientDataset>& datasets) {
  DistributionReport report;
  DatasetStats agg;
  for (const ClientDataset& ds : datasets) {
    DatasetStats s = ds.stats();
    ClientDistribution c;
    c.id = ds.id;
    c.total = s.total;
    c.malicious = s.malicious;
    c.regular = s.regular;
    if (s.total > 0) {
      c.malicious_pct = 100.0 * double(s.malicious) / double(s.total);
      c.regular_pct = 100.0 * double(s.regular) / double(s.total);
      c.inference_fraction = double(s.inference) / double(s.total);
      c.inference_reverse_fraction = double(s.inference + s.reverse) / double(s.total);
    }
    report.per_client.push_back(c);
    agg.total += s.total;
    agg.malicious += s.malicious;
    agg.regular += s.regular;
    agg.inference += s.inference;
    agg.reverse += s.reverse;
  }
  report.aggregate.total = agg.total;
  report.aggregate.malicious = agg.malicious;
  report.aggregate.regular = agg.regular;
  if (agg.total > 0) {
    report.aggregate.malicious_pct = 100.0 * double(agg.malicious) / double(agg.total);
    report.aggregate.regular_pct = 100.0 * double(agg.regular) / double(agg.total);
    report.aggregate.inference_fraction = double(agg.inference) / double(agg.total);
    report.aggregate.inference_reverse_fraction =
        double(agg.inference + agg.reverse) / double(agg.total);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Experiment group construction: partitions a sample pool into five client
// datasets whose size fractions and class mixes follow one of the four
// built-in regimes (unbalanced/balanced size x unbalanced/balanced class).

struct GroupPreset {
  std::string name;
  std::array<double, 5> size_fraction{};    // sums to ~1
  std::array<double, 5> malicious_ratio{};  // per-client malicious share
};

inline GroupPreset group_preset(int group) {
  switch (group) {
    case 1:
      return {"group1-unbalanced-size-unbalanced-class",
              {0.5119, 0.3092, 0.0051, 0.1418, 0.0320},
              {0.8927, 0.9341, 0.4783, 0.8741, 0.9355}};
    case 2:
      return {"group2-balanced-size-unbalanced-class",
              {0.1977, 0.2069, 0.1925, 0.1949, 0.2079},
              {0.9641, 0.9257, 0.6225, 0.8251, 0.6818}};
    case 3:
      return {"group3-unbalanced-size-balanced-class",
              {0.0858, 0.3593, 0.4345, 0.1040, 0.0164},
              {0.5, 0.5, 0.5, 0.5, 0.5}};
    case 4:
      return {"group4-balanced-size-balanced-class",
              {0.2, 0.2, 0.2, 0.2, 0.2},
              {0.5, 0.5, 0.5, 0.5, 0.5}};
    default:
      throw DataError("group preset must be 1..4");
  }
}

// Samples without replacement, deterministically per seed. Client ids are
// 1..5. Throws when the pool cannot satisfy the preset.
//
// cluster_fraction controls how much of each client is filled from whole
// per-owner sample groups: at 1 the clients look like coherent AS datasets,
// at 0 they are uniform draws. The size and class contract is the same at
// any setting.
inline std::vector<ClientDataset> partition_groups(const std::vector<LabeledTriple>& pool,
                                                   const GroupPreset& preset, std::uint64_t seed,
                                                   std::size_t max_total = 0,
                                                   double cluster_fraction = 0.0) {
  if (cluster_fraction < 0.0 || cluster_fraction > 1.0)
    throw DataError("cluster_fraction outside [0,1]");
  std::vector<std::size_t> malicious_idx, regular_idx;
  for (std::size_t i = 0; i < pool.size(); ++i)
    (pool[i].label == Label::Malicious ? malicious_idx : regular_idx).push_back(i);

  double want_mal = 0, want_reg = 0;
  for (int c = 0; c < 5; ++c) {
    want_mal += preset.size_fraction[c] * preset.malicious_ratio[c];
    want_reg += preset.size_fraction[c] * (1.0 - preset.malicious_ratio[c]);
  }
  std::size_t n = pool.size();
  if (want_mal > 0) n = std::min(n, std::size_t(double(malicious_idx.size()) / want_mal));
  if (want_reg > 0) n = std::min(n, std::size_t(double(regular_idx.size()) / want_reg));
  if (max_total > 0) n = std::min(n, max_total);

  // Per-client rounding can overshoot a class by a few samples right at the
  // feasibility boundary; shrink and retry before declaring the preset
  // infeasible.
  std::array<std::size_t, 5> sizes{}, mal_counts{};
  for (int attempt = 0;; ++attempt) {
    std::size_t need_mal = 0, need_reg = 0;
    for (int c = 0; c < 5; ++c) {
      sizes[c] = std::size_t(preset.size_fraction[c] * double(n));
      mal_counts[c] = std::size_t(preset.malicious_ratio[c] * double(sizes[c]) + 0.5);
      if (sizes[c] == 0)
        throw DataError("pool too small for preset " + preset.name + ": client " +
                        std::to_string(c + 1) + " would be empty");
      need_mal += mal_counts[c];
      need_reg += sizes[c] - mal_counts[c];
    }
    if (need_mal <= malicious_idx.size() && need_reg <= regular_idx.size()) break;
    if (attempt >= 8 || n < 16)
      throw DataError("infeasible preset " + preset.name + " for pool composition");
    n -= std::max<std::size_t>(1, n / 128);
  }

  DetRng rng(seed);
  std::vector<ClientDataset> clients(5);
  for (int c = 0; c < 5; ++c) clients[c].id = static_cast<Asn>(c + 1);

  // Clustered phase quotas; the rest of each client is drawn uniformly from
  // the shared remainder.
  std::array<std::size_t, 5> rem_mal{}, rem_reg{};
  for (int c = 0; c < 5; ++c) {
    rem_mal[c] = std::size_t(cluster_fraction * double(mal_counts[c]));
    rem_reg[c] = std::size_t(cluster_fraction * double(sizes[c] - mal_counts[c]));
  }
  std::vector<char> taken(pool.size(), 0);

  if (cluster_fraction > 0.0) {
    // Walk owners in seeded order and pour each owner's samples into the
    // client with the greatest remaining clustered quota, spilling into
    // others only when a class quota fills up.
    std::vector<Asn> owners;
    std::unordered_map<Asn, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
        by_owner;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      auto [it, inserted] = by_owner.try_emplace(pool[i].owner);
      if (inserted) owners.push_back(pool[i].owner);
      (pool[i].label == Label::Malicious ? it->second.first : it->second.second).push_back(i);
    }
    std::sort(owners.begin(), owners.end());
    deterministic_shuffle(std::span(owners), rng);
    auto pour = [&](const std::vector<std::size_t>& source,
                    std::array<std::size_t, 5>& remaining) {
      std::size_t at = 0;
      while (at < source.size()) {
        int best = -1;
        for (int c = 0; c < 5; ++c)
          if (remaining[c] > 0 && (best < 0 || remaining[c] > remaining[best])) best = c;
        if (best < 0) break;  // quotas filled; leftover feeds the uniform phase
        std::size_t take = std::min(remaining[best], source.size() - at);
        for (std::size_t k = 0; k < take; ++k) {
          clients[best].samples.push_back(pool[source[at + k]]);
          taken[source[at + k]] = 1;
        }
        remaining[best] -= take;
        at += take;
      }
    };
    for (Asn owner : owners) {
      pour(by_owner[owner].first, rem_mal);
      pour(by_owner[owner].second, rem_reg);
    }
  }

  // Uniform phase: fill what is left of every quota from the shuffled
  // remainder of each class.
  std::vector<std::size_t> mal_left, reg_left;
  for (std::size_t i : malicious_idx)
    if (!taken[i]) mal_left.push_back(i);
  for (std::size_t i : regular_idx)
    if (!taken[i]) reg_left.push_back(i);
  deterministic_shuffle(std::span(mal_left), rng);
  deterministic_shuffle(std::span(reg_left), rng);
  std::size_t mal_at = 0, reg_at = 0;
  for (int c = 0; c < 5; ++c) {
    std::size_t have_mal = 0, have_reg = 0;
    for (const LabeledTriple& lt : clients[c].samples)
      (lt.label == Label::Malicious ? have_mal : have_reg)++;
    for (std::size_t k = have_mal; k < mal_counts[c]; ++k)
      clients[c].samples.push_back(pool[mal_left[mal_at++]]);
    for (std::size_t k = have_reg; k < sizes[c] - mal_counts[c]; ++k)
      clients[c].samples.push_back(pool[reg_left[reg_at++]]);
  }
  return clients;
}

inline std::vector<ClientDataset> partition_groups(const std::vector<LabeledTriple>& pool,
                                                   int group, std::uint64_t seed,
                                                   std::size_t max_total = 0,
                                                   double cluster_fraction = 0.0) {
  return partition_groups(pool, group_preset(group), seed, max_total, cluster_fraction);
}

// ---------------------------------------------------------------------------
// Dataset text format: `first,middle,last,label,origin,owner` per line with
// label 0 = malicious / 1 = regular; `#` starts a comment.

inline void write_dataset(const ClientDataset& data, std::ostream& out,
                          const std::vector<std::string>& header_comments = {}) {
  for (const std::string& c : header_comments) out << "# " << c << "\n";
  out << "# first,middle,last,label,origin,owner\n";
  for (const LabeledTriple& lt : data.samples) {
    out << lt.triple.first << ',' << lt.triple.middle << ',' << lt.triple.last << ','
        << int(lt.label) << ',' << to_string(lt.origin) << ',' << lt.owner << '\n';
  }
}

inline ClientDataset read_dataset(std::istream& in, Asn id = 0) {
  ClientDataset data;
  data.id = id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = detail::split(line, ',');
    if (fields.size() != 6) throw ParseError(line_no, "expected 6 comma-separated fields");
    LabeledTriple lt;
    lt.triple.first = static_cast<Asn>(detail::parse_asn_field(fields[0], line_no));
    lt.triple.middle = static_cast<Asn>(detail::parse_asn_field(fields[1], line_no));
    lt.triple.last = static_cast<Asn>(detail::parse_asn_field(fields[2], line_no));
    if (fields[3] == "0")
      lt.label = Label::Malicious;
    else if (fields[3] == "1")
      lt.label = Label::Regular;
    else
      throw ParseError(line_no, "label must be 0 or 1");
    if (fields[4] == "direct")
      lt.origin = Origin::Direct;
    else if (fields[4] == "inference")
      lt.origin = Origin::Inference;
    else if (fields[4] == "reverse")
      lt.origin = Origin::Reverse;
    else
      throw ParseError(line_no, "origin must be direct|inference|reverse");
    lt.owner = static_cast<Asn>(detail::parse_asn_field(fields[5], line_no));
    data.samples.push_back(lt);
  }
  validate_dataset(data);
  return data;
}

}  // namespace flrld
