#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "flrld/neuralnet.hpp"
#include "flrld/rng.hpp"
#include "flrld/topology.hpp"
#include "flrld/tripledata.hpp"

namespace flrld {

// Union of the participants' local relationship knowledge: every link
// incident to at least one participant, and nothing else.
class GlobalRepository {
 public:
  void add_link(Asn a, Asn b, RelKind kind, Asn provider) {
    links_.emplace(pair_key(a, b), StoredRel{kind, provider});
  }

  bool knows(Asn a, Asn b) const { return links_.count(pair_key(a, b)) != 0; }

  // Role of b as seen from a, when the link is known.
  std::optional<Role> role_from(Asn a, Asn b) const {
    auto it = links_.find(pair_key(a, b));
    if (it == links_.end()) return std::nullopt;
    if (it->second.kind == RelKind::P2P) return Role::Peer;
    return it->second.provider == b ? Role::Provider : Role::Customer;
  }

  std::size_t size() const { return links_.size(); }

 private:
  struct StoredRel {
    RelKind kind;
    Asn provider;
  };
  static std::uint64_t pair_key(Asn a, Asn b) {
    return (std::uint64_t(std::min(a, b)) << 32) | std::max(a, b);
  }
  std::unordered_map<std::uint64_t, StoredRel> links_;
};

inline GlobalRepository build_global_repository(const AsGraph& g,
                                                const std::vector<Asn>& participants) {
  GlobalRepository repo;
  for (Asn p : participants) {
    for (Asn nb : g.neighbors(p)) {
      Role role = *g.role_from(p, nb);
      if (role == Role::Peer) repo.add_link(p, nb, RelKind::P2P, 0);
      else if (role == Role::Provider) repo.add_link(p, nb, RelKind::P2C, nb);
      else repo.add_link(p, nb, RelKind::P2C, p);
    }
  }
  return repo;
}

// Fallback behavior when a triple's relationships are not all in the shared
// repository.
enum class RepoPolicy : std::uint8_t { Random, AllMalicious, AllRegular };

inline const char* to_string(RepoPolicy p) {
  switch (p) {
    case RepoPolicy::Random: return "ml-random";
    case RepoPolicy::AllMalicious: return "ml-0";
    case RepoPolicy::AllRegular: return "ml-1";
  }
  return "?";
}

// Repository detector: when both links of the triple are known the verdict is
// the valley-free truth; otherwise the policy decides. Random is a pure
// function of (seed, triple) so call order never matters.
inline Label ml_predict(const GlobalRepository& repo, const Triple& t, RepoPolicy policy,
                        std::uint64_t seed) {
  auto learned_side = repo.role_from(t.middle, t.first);
  auto exported_side = repo.role_from(t.middle, t.last);
  if (learned_side && exported_side)
    return is_valley_violation(*learned_side, *exported_side) ? Label::Malicious : Label::Regular;
  switch (policy) {
    case RepoPolicy::AllMalicious:
      return Label::Malicious;
    case RepoPolicy::AllRegular:
      return Label::Regular;
    case RepoPolicy::Random: {
      std::uint64_t s = seed ^ (std::uint64_t(t.first) << 32) ^ (std::uint64_t(t.middle) << 16) ^
                        std::uint64_t(t.last);
      return splitmix64(s) & 1 ? Label::Regular : Label::Malicious;
    }
  }
  return Label::Malicious;
}

// Central learning: all client data gathered on one server. The merged set is
// canonically sorted, so client concatenation order cannot change the result.
inline ModelParams train_central(const std::vector<ClientDataset>& clients,
                                 const ModelConfig& model_config, int epochs, std::uint64_t seed,
                                 TrainTrace* trace = nullptr) {
  std::vector<LabeledTriple> merged;
  for (const ClientDataset& c : clients)
    merged.insert(merged.end(), c.samples.begin(), c.samples.end());
  if (merged.empty()) throw DataError("train_central: no samples");
  std::sort(merged.begin(), merged.end(), [](const LabeledTriple& a, const LabeledTriple& b) {
    return std::tuple(a.owner, a.triple, int(a.origin), int(a.label)) <
           std::tuple(b.owner, b.triple, int(b.origin), int(b.label));
  });
  ModelParams params = init_model(model_config);
  return train_epochs(params, std::span<const LabeledTriple>(merged), epochs, model_config, seed,
                      trace);
}

// Single-AS learning: one participant's data only.
inline ModelParams train_single(const ClientDataset& client, const ModelConfig& model_config,
                                int epochs, std::uint64_t seed, TrainTrace* trace = nullptr) {
  if (client.samples.empty()) throw DataError("train_single: empty client");
  ModelParams params = init_model(model_config);
  return train_epochs(params, client, epochs, model_config, seed, trace);
}

}  // namespace flrld
