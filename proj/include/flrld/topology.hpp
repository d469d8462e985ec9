#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "flrld/rng.hpp"
#include "flrld/wire.hpp"

namespace flrld {

// Autonomous system number. The full 32-bit ASN space is representable, which
// is what keeps the 96-bit triple encoding lossless.
using Asn = std::uint32_t;

enum class RelKind : std::uint8_t { P2P, P2C };

// Role of a neighbor b relative to a node a.
enum class Role : std::uint8_t { Provider, Customer, Peer };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::Provider: return "provider";
    case Role::Customer: return "customer";
    case Role::Peer: return "peer";
  }
  return "?";
}

// True when the role lets routes flow toward a leak: providers and peers must
// not receive routes that were learned from other providers or peers.
inline bool is_provider_or_peer(Role r) { return r == Role::Provider || r == Role::Peer; }

// One AS-level link. For P2C the `provider` field names the provider side;
// for P2P it is ignored.
struct Edge {
  Asn a = 0;
  Asn b = 0;
  RelKind kind = RelKind::P2P;
  Asn provider = 0;
};

inline Edge p2p_edge(Asn a, Asn b) { return Edge{a, b, RelKind::P2P, 0}; }
inline Edge p2c_edge(Asn provider, Asn customer) {
  return Edge{provider, customer, RelKind::P2C, provider};
}

struct DegreeProfile {
  std::size_t peers = 0;
  std::size_t customers = 0;
  std::size_t providers = 0;
  std::size_t degree() const { return peers + customers + providers; }
};

// Immutable AS-level topology with business relationships. Construction
// validates self-loops and conflicting duplicate links; afterwards the graph
// is safe for shared read-only access.
class AsGraph {
 public:
  AsGraph() = default;

  static AsGraph from_edges(const std::vector<Edge>& edges,
                            const std::vector<Asn>& isolated_nodes = {}) {
    AsGraph g;
    for (const Edge& e : edges) g.add_edge(e);
    for (Asn n : isolated_nodes) g.touch_node(n);
    g.finalize();
    return g;
  }

  bool has_node(Asn a) const { return adjacency_.count(a) != 0; }

  const std::vector<Asn>& nodes() const { return sorted_nodes_; }
  std::size_t node_count() const { return sorted_nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t component_count() const { return component_count_; }

  std::size_t p2p_count() const { return p2p_count_; }
  std::size_t p2c_count() const { return edges_.size() - p2p_count_; }

  // Sorted ascending; throws on unknown ASN.
  const std::vector<Asn>& neighbors(Asn a) const {
    auto it = adjacency_.find(a);
    if (it == adjacency_.end()) throw DataError("unknown ASN " + std::to_string(a));
    return it->second;
  }

  bool has_edge(Asn a, Asn b) const { return edges_.count(pair_key(a, b)) != 0; }

  // Role of b as seen from a: Provider means b is a provider of a. Absent
  // link yields nullopt.
  std::optional<Role> role_from(Asn a, Asn b) const {
    auto it = edges_.find(pair_key(a, b));
    if (it == edges_.end()) return std::nullopt;
    const StoredRel& rel = it->second;
    if (rel.kind == RelKind::P2P) return Role::Peer;
    return rel.provider == b ? Role::Provider : Role::Customer;
  }

  DegreeProfile degree_profile(Asn a) const {
    DegreeProfile p;
    for (Asn nb : neighbors(a)) {
      switch (*role_from(a, nb)) {
        case Role::Peer: ++p.peers; break;
        case Role::Customer: ++p.customers; break;
        case Role::Provider: ++p.providers; break;
      }
    }
    return p;
  }

  // Edges in canonical order: provider first for P2C, lower ASN first for
  // P2P, sorted by (first, second).
  std::vector<Edge> canonical_edges() const {
    std::vector<Edge> out;
    out.reserve(edges_.size());
    for (const auto& [key, rel] : edges_) {
      Asn lo = static_cast<Asn>(key >> 32);
      Asn hi = static_cast<Asn>(key);
      if (rel.kind == RelKind::P2P) {
        out.push_back(p2p_edge(lo, hi));
      } else {
        out.push_back(p2c_edge(rel.provider, rel.provider == lo ? hi : lo));
      }
    }
    std::sort(out.begin(), out.end(), [](const Edge& x, const Edge& y) {
      return std::pair(x.a, x.b) < std::pair(y.a, y.b);
    });
    return out;
  }

 private:
  struct StoredRel {
    RelKind kind;
    Asn provider;
  };

  static std::uint64_t pair_key(Asn a, Asn b) {
    Asn lo = std::min(a, b), hi = std::max(a, b);
    return (std::uint64_t(lo) << 32) | hi;
  }

  void add_edge(const Edge& e) {
    if (e.a == e.b) throw DataError("self-loop on AS " + std::to_string(e.a));
    StoredRel rel{e.kind, e.kind == RelKind::P2C ? e.provider : 0};
    if (e.kind == RelKind::P2C && rel.provider != e.a && rel.provider != e.b)
      throw InvariantError("P2C provider is not an endpoint");
    auto [it, inserted] = edges_.emplace(pair_key(e.a, e.b), rel);
    if (!inserted) {
      if (it->second.kind != rel.kind || it->second.provider != rel.provider)
        throw DataError("conflicting relationship for AS pair " + std::to_string(e.a) + "|" +
                        std::to_string(e.b));
      return;  // identical duplicate, de-duplicated
    }
    adjacency_[e.a].push_back(e.b);
    adjacency_[e.b].push_back(e.a);
    if (e.kind == RelKind::P2P) ++p2p_count_;
  }

  void touch_node(Asn a) { adjacency_.try_emplace(a); }

  void finalize() {
    sorted_nodes_.clear();
    sorted_nodes_.reserve(adjacency_.size());
    for (auto& [asn, nbrs] : adjacency_) {
      std::sort(nbrs.begin(), nbrs.end());
      sorted_nodes_.push_back(asn);
    }
    std::sort(sorted_nodes_.begin(), sorted_nodes_.end());
    count_components();
  }

  void count_components() {
    component_count_ = 0;
    std::unordered_set<Asn> seen;
    std::vector<Asn> stack;
    for (Asn start : sorted_nodes_) {
      if (!seen.insert(start).second) continue;
      ++component_count_;
      stack.push_back(start);
      while (!stack.empty()) {
        Asn cur = stack.back();
        stack.pop_back();
        for (Asn nb : adjacency_.at(cur))
          if (seen.insert(nb).second) stack.push_back(nb);
      }
    }
  }

  std::unordered_map<std::uint64_t, StoredRel> edges_;
  std::unordered_map<Asn, std::vector<Asn>> adjacency_;
  std::vector<Asn> sorted_nodes_;
  std::size_t component_count_ = 0;
  std::size_t p2p_count_ = 0;
};

inline std::optional<Role> relationship_from(const AsGraph& g, Asn a, Asn b) {
  return g.role_from(a, b);
}

// ---------------------------------------------------------------------------
// CAIDA serial-1 relationship format: `<asn1>|<asn2>|<rel>` with rel -1 when
// asn1 is the provider of asn2 and 0 for p2p; `#` starts a comment. Extra
// columns after the third field (source tags in some distributions) are
// ignored with a warning.

namespace detail {

inline std::uint64_t parse_asn_field(const std::string& field, std::size_t line_no) {
  if (field.empty()) throw ParseError(line_no, "empty ASN field");
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(line_no, "non-numeric ASN '" + field + "'");
  if (value > 0xffffffffULL) throw ParseError(line_no, "ASN out of 32-bit range: " + field);
  return value;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline AsGraph parse_as_rel(std::istream& in, std::vector<std::string>* warnings = nullptr) {
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  bool warned_extra = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    bool blank = std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
    if (blank) continue;

    auto fields = detail::split(line, '|');
    if (fields.size() < 3) throw ParseError(line_no, "expected <asn1>|<asn2>|<rel>");
    if (fields.size() > 3 && warnings && !warned_extra) {
      warnings->push_back("line " + std::to_string(line_no) +
                          ": extra columns after <rel> ignored");
      warned_extra = true;
    }
    Asn a = static_cast<Asn>(detail::parse_asn_field(fields[0], line_no));
    Asn b = static_cast<Asn>(detail::parse_asn_field(fields[1], line_no));
    if (fields[2] == "-1") {
      edges.push_back(p2c_edge(a, b));
    } else if (fields[2] == "0") {
      edges.push_back(p2p_edge(a, b));
    } else {
      throw ParseError(line_no, "relationship must be -1 or 0, got '" + fields[2] + "'");
    }
  }
  try {
    return AsGraph::from_edges(edges);
  } catch (const DataError& e) {
    throw DataError(std::string("invalid topology: ") + e.what());
  }
}

inline AsGraph parse_as_rel(const std::string& text, std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return parse_as_rel(in, warnings);
}

// Canonical serialization: identical to the input format, sorted by
// (asn1, asn2), provider listed first for P2C links.
inline void serialize_as_rel(const AsGraph& g, std::ostream& out,
                             const std::vector<std::string>& header_comments = {}) {
  for (const std::string& c : header_comments) out << "# " << c << "\n";
  for (const Edge& e : g.canonical_edges())
    out << e.a << '|' << e.b << '|' << (e.kind == RelKind::P2C ? "-1" : "0") << '\n';
}

inline std::string serialize_as_rel(const AsGraph& g,
                                    const std::vector<std::string>& header_comments = {}) {
  std::ostringstream out;
  serialize_as_rel(g, out, header_comments);
  return out.str();
}

// ---------------------------------------------------------------------------
// Synthetic Internet-like topology: a small fully peered core, preferential
// customer-to-provider attachment toward earlier nodes (which keeps the c2p
// digraph acyclic), peer links between nodes of similar degree, and a few
// peer-rich hubs in the style of large route collectors / open peers.

struct SyntheticParams {
  std::uint32_t nodes = 500;
  std::uint64_t seed = 1;
  std::uint32_t core_size = 4;         // fully peered top tier
  std::uint32_t max_providers = 3;     // multihoming cap
  double extra_provider_prob = 0.55;   // chance of each provider beyond the first
  double peer_prob = 0.3;              // chance a node seeks lateral peers at all
  double peer_geometric_p = 0.45;      // extra peer count ~ geometric(p)
  double hub_prob = 0.015;             // chance a node becomes an open-peering hub
  double hub_peer_frac = 0.12;         // fraction of earlier nodes a hub peers with
  double triadic_closure_prob = 0.35;  // chance to also link a provider's neighbor

  std::string describe() const {
    std::ostringstream s;
    s << "synthetic topology seed=" << seed << " nodes=" << nodes << " core=" << core_size
      << " max_providers=" << max_providers << " extra_provider_prob=" << extra_provider_prob
      << " peer_prob=" << peer_prob << " peer_geometric_p=" << peer_geometric_p
      << " hub_prob=" << hub_prob << " hub_peer_frac=" << hub_peer_frac
      << " triadic_closure_prob=" << triadic_closure_prob;
    return s.str();
  }
};

inline AsGraph generate_synthetic_topology(const SyntheticParams& params) {
  if (params.nodes < 3) throw DataError("synthetic topology needs at least 3 nodes");
  if (params.core_size < 2 || params.core_size >= params.nodes)
    throw DataError("core_size must be in [2, nodes)");
  if (params.max_providers < 1) throw DataError("max_providers must be >= 1");
  if (params.extra_provider_prob < 0 || params.extra_provider_prob >= 1 ||
      params.peer_prob < 0 || params.peer_prob > 1 || params.peer_geometric_p <= 0 ||
      params.peer_geometric_p > 1 || params.hub_prob < 0 || params.hub_prob > 1 ||
      params.hub_peer_frac < 0 || params.hub_peer_frac > 1 ||
      params.triadic_closure_prob < 0 || params.triadic_closure_prob > 1)
    throw DataError("synthetic topology parameters out of range");

  DetRng rng(params.seed);
  const std::uint32_t n = params.nodes;
  std::vector<Edge> edges;
  std::vector<std::uint32_t> degree(n + 1, 0);
  std::vector<std::uint32_t> customer_count(n + 1, 0);
  std::vector<std::vector<Asn>> adj(n + 1);
  std::unordered_set<std::uint64_t> used;
  auto key = [](Asn a, Asn b) {
    return (std::uint64_t(std::min(a, b)) << 32) | std::max(a, b);
  };
  auto link = [&](const Edge& e) {
    if (!used.insert(key(e.a, e.b)).second) return false;
    edges.push_back(e);
    ++degree[e.a];
    ++degree[e.b];
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
    if (e.kind == RelKind::P2C) ++customer_count[e.provider];
    return true;
  };

  // Core clique of peers. ASNs are 1-based node indices.
  for (Asn i = 1; i <= params.core_size; ++i)
    for (Asn j = i + 1; j <= params.core_size; ++j) link(p2p_edge(i, j));

  // Preferential c2p attachment; providers are always earlier nodes.
  for (Asn i = params.core_size + 1; i <= n; ++i) {
    std::uint32_t providers = 1;
    while (providers < params.max_providers && rng.next_bool(params.extra_provider_prob))
      ++providers;
    std::uint32_t attached = 0;
    std::uint32_t attempts = 0;
    while (attached < providers && attempts < 16 * providers) {
      ++attempts;
      // Weight earlier nodes by customer count + 1 via two-draw tournament.
      Asn cand1 = static_cast<Asn>(1 + rng.next_below(i - 1));
      Asn cand2 = static_cast<Asn>(1 + rng.next_below(i - 1));
      Asn provider = customer_count[cand1] + 1 >= customer_count[cand2] + 1 ? cand1 : cand2;
      if (!link(p2c_edge(provider, i))) continue;
      ++attached;
      // Triadic closure: sometimes also reach one of the provider's existing
      // neighbors, mostly as a second transit, occasionally laterally. This
      // seeds the triangles that make routes visible in stub RIBs.
      if (rng.next_bool(params.triadic_closure_prob) && !adj[provider].empty()) {
        Asn x = adj[provider][rng.next_below(adj[provider].size())];
        if (x != i) link(rng.next_bool(0.7) ? p2c_edge(x, i) : p2p_edge(i, x));
      }
    }
    if (attached == 0) link(p2c_edge(static_cast<Asn>(1 + rng.next_below(i - 1)), i));
  }

  // Lateral peering between similar-degree nodes, plus occasional hubs that
  // peer widely (the pattern that makes peer-rich ASes dominate leak surface).
  for (Asn i = params.core_size + 1; i <= n; ++i) {
    if (rng.next_bool(params.hub_prob)) {
      std::uint32_t targets = static_cast<std::uint32_t>(params.hub_peer_frac * (i - 1));
      for (std::uint32_t t = 0; t < targets; ++t) {
        Asn other = static_cast<Asn>(1 + rng.next_below(i - 1));
        if (other != i) link(p2p_edge(i, other));
      }
      continue;
    }
    if (!rng.next_bool(params.peer_prob)) continue;
    std::uint32_t extra = 1 + rng.next_geometric(params.peer_geometric_p);
    for (std::uint32_t t = 0; t < extra; ++t) {
      // Similar-degree partner: best of three candidates by degree distance.
      Asn best = 0;
      std::uint32_t best_gap = ~0u;
      for (int c = 0; c < 3; ++c) {
        Asn cand = static_cast<Asn>(1 + rng.next_below(n));
        if (cand == i) continue;
        std::uint32_t gap = degree[cand] > degree[i] ? degree[cand] - degree[i]
                                                     : degree[i] - degree[cand];
        if (gap < best_gap) {
          best_gap = gap;
          best = cand;
        }
      }
      if (best != 0) link(p2p_edge(i, best));
    }
  }

  return AsGraph::from_edges(edges);
}

}  // namespace flrld
