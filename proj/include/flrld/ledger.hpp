#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "flrld/sha256.hpp"
#include "flrld/topology.hpp"
#include "flrld/wire.hpp"

namespace flrld {

// Reserved identity that publishes the learning task and signs the genesis
// block; never a training participant.
inline constexpr Asn kTaskAuthority = 0;

inline constexpr Digest zero_digest() { return Digest{}; }

// Abstract signing interface. The simulation ships a keyed-digest scheme
// (HMAC-SHA256 with a shared verification key); a real signature scheme can
// be slotted in behind the same contract.
class Signer {
 public:
  virtual ~Signer() = default;
  virtual Asn asn() const = 0;
  virtual Bytes sign(std::span<const std::uint8_t> message) const = 0;
};

class HmacSigner : public Signer {
 public:
  HmacSigner(Asn asn, Bytes key) : asn_(asn), key_(std::move(key)) {}

  Asn asn() const override { return asn_; }

  Bytes sign(std::span<const std::uint8_t> message) const override {
    Digest d = hmac_sha256(std::span<const std::uint8_t>(key_), message);
    return Bytes(d.begin(), d.end());
  }

 private:
  Asn asn_;
  Bytes key_;
};

class KeyRegistry {
 public:
  static Bytes derive_key(std::uint64_t master_seed, Asn asn) {
    Bytes material;
    material.insert(material.end(), {'f', 'l', 'r', 'l', 'd', '-', 'k', 'e', 'y'});
    wire::put_u32_be(material, asn);
    wire::put_u64_be(material, master_seed);
    Digest d = sha256(std::span<const std::uint8_t>(material));
    return Bytes(d.begin(), d.end());
  }

  void register_key(Asn asn, Bytes key) { keys_[asn] = std::move(key); }

  void register_derived(std::uint64_t master_seed, Asn asn) {
    keys_.emplace(asn, derive_key(master_seed, asn));
  }

  bool has(Asn asn) const { return keys_.count(asn) != 0; }

  const Bytes& key_of(Asn asn) const {
    auto it = keys_.find(asn);
    if (it == keys_.end()) throw DataError("no key registered for ASN " + std::to_string(asn));
    return it->second;
  }

  HmacSigner signer_for(Asn asn) const { return HmacSigner(asn, key_of(asn)); }

  bool verify(Asn asn, std::span<const std::uint8_t> message,
              std::span<const std::uint8_t> signature) const {
    auto it = keys_.find(asn);
    if (it == keys_.end()) return false;
    Digest expect = hmac_sha256(std::span<const std::uint8_t>(it->second), message);
    return signature.size() == expect.size() &&
           std::equal(signature.begin(), signature.end(), expect.begin());
  }

  const std::map<Asn, Bytes>& all() const { return keys_; }

 private:
  std::map<Asn, Bytes> keys_;
};

inline bool verify_signature(const KeyRegistry& registry, Asn asn,
                             std::span<const std::uint8_t> message,
                             std::span<const std::uint8_t> signature) {
  return registry.verify(asn, message, signature);
}

// ---------------------------------------------------------------------------
// One global-round record. Canonical byte layout (hashed and signed), all
// lengths big-endian:
//   "FLB1" | round u64 | prev_hash 32B | t_s u64 | t_exp u64 |
//   payload_digest 32B | storage_ref u16+bytes | note u32+bytes |
//   participants u32 count + u32 each | winner u32 | signature u16+bytes
// The signature field is absent from the pre-signature form; the block hash
// covers the full serialization including the signature.

struct Block {
  std::uint64_t round = 0;
  Digest prev_hash = zero_digest();
  std::uint64_t t_s = 0;
  std::uint64_t t_exp = 0;
  Digest payload_digest = zero_digest();
  std::string storage_ref;
  Bytes note;  // genesis carries the task description
  std::vector<Asn> participants;
  Asn winner = kTaskAuthority;
  Bytes signature;

  Bytes presignature_bytes() const { return serialize(false); }
  Bytes canonical_bytes() const { return serialize(true); }

  Digest hash() const {
    Bytes bytes = canonical_bytes();
    return sha256(std::span<const std::uint8_t>(bytes));
  }

 private:
  Bytes serialize(bool with_signature) const {
    Bytes out;
    out.insert(out.end(), {'F', 'L', 'B', '1'});
    wire::put_u64_be(out, round);
    wire::put_bytes(out, std::span<const std::uint8_t>(prev_hash.data(), prev_hash.size()));
    wire::put_u64_be(out, t_s);
    wire::put_u64_be(out, t_exp);
    wire::put_bytes(out,
                    std::span<const std::uint8_t>(payload_digest.data(), payload_digest.size()));
    wire::put_u16_be(out, static_cast<std::uint16_t>(storage_ref.size()));
    wire::put_bytes(out, std::span<const std::uint8_t>(
                             reinterpret_cast<const std::uint8_t*>(storage_ref.data()),
                             storage_ref.size()));
    wire::put_u32_be(out, static_cast<std::uint32_t>(note.size()));
    wire::put_bytes(out, std::span<const std::uint8_t>(note));
    wire::put_u32_be(out, static_cast<std::uint32_t>(participants.size()));
    for (Asn a : participants) wire::put_u32_be(out, a);
    wire::put_u32_be(out, winner);
    if (with_signature) {
      wire::put_u16_be(out, static_cast<std::uint16_t>(signature.size()));
      wire::put_bytes(out, std::span<const std::uint8_t>(signature));
    }
    return out;
  }
};

inline Block deserialize_block(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes);
  auto magic = r.take(4);
  const char expect[4] = {'F', 'L', 'B', '1'};
  if (!std::equal(magic.begin(), magic.end(), reinterpret_cast<const std::uint8_t*>(expect)))
    throw DataError("bad block magic");
  Block b;
  b.round = r.u64_be();
  auto prev = r.take(32);
  std::copy(prev.begin(), prev.end(), b.prev_hash.begin());
  b.t_s = r.u64_be();
  b.t_exp = r.u64_be();
  auto payload = r.take(32);
  std::copy(payload.begin(), payload.end(), b.payload_digest.begin());
  auto ref = r.take(r.u16_be());
  b.storage_ref.assign(ref.begin(), ref.end());
  auto note = r.take(r.u32_be());
  b.note.assign(note.begin(), note.end());
  std::uint32_t n_participants = r.u32_be();
  b.participants.reserve(n_participants);
  for (std::uint32_t i = 0; i < n_participants; ++i) b.participants.push_back(r.u32_be());
  b.winner = r.u32_be();
  auto sig = r.take(r.u16_be());
  b.signature.assign(sig.begin(), sig.end());
  if (!r.done()) throw DataError("trailing bytes after block");
  return b;
}

// Deterministic stand-in for the consensus lottery: the winner is picked by
// hashing the round index with the previous block hash. Participant order
// does not matter (the list is sorted first).
inline Asn select_winner(std::uint64_t round, std::vector<Asn> participants,
                         const Digest& prev_hash) {
  if (participants.empty()) throw DataError("select_winner: no participants");
  std::sort(participants.begin(), participants.end());
  participants.erase(std::unique(participants.begin(), participants.end()), participants.end());
  Bytes material;
  wire::put_u64_be(material, round);
  wire::put_bytes(material, std::span<const std::uint8_t>(prev_hash.data(), prev_hash.size()));
  Digest d = sha256(std::span<const std::uint8_t>(material));
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x = (x << 8) | d[std::size_t(i)];
  return participants[x % participants.size()];
}

// ---------------------------------------------------------------------------
// Content-addressed payload store: full update blobs live here, blocks carry
// only digests and a reference key.

class ContentStore {
 public:
  Digest put(Bytes blob) {
    Digest d = sha256(std::span<const std::uint8_t>(blob));
    blobs_.emplace(to_hex(d), std::move(blob));
    return d;
  }

  std::optional<std::reference_wrapper<const Bytes>> get(const Digest& d) const {
    auto it = blobs_.find(to_hex(d));
    if (it == blobs_.end()) return std::nullopt;
    return std::cref(it->second);
  }

  bool contains(const Digest& d) const { return blobs_.count(to_hex(d)) != 0; }
  std::size_t size() const { return blobs_.size(); }

  // True when every stored blob still matches its digest key.
  bool self_check() const {
    for (const auto& [hex, blob] : blobs_) {
      Digest d = sha256(std::span<const std::uint8_t>(blob));
      if (to_hex(d) != hex) return false;
    }
    return true;
  }

  void export_directory(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [hex, blob] : blobs_) {
      std::ofstream out(dir / hex, std::ios::binary);
      if (!out) throw DataError("cannot write blob " + hex);
      out.write(reinterpret_cast<const char*>(blob.data()), std::streamsize(blob.size()));
    }
  }

  static ContentStore import_directory(const std::filesystem::path& dir) {
    ContentStore store;
    if (!std::filesystem::is_directory(dir)) throw DataError("no such directory: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      std::ifstream in(entry.path(), std::ios::binary);
      Bytes blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      Digest d = sha256(std::span<const std::uint8_t>(blob));
      if (to_hex(d) != entry.path().filename().string())
        throw DataError("blob name does not match content digest: " +
                        entry.path().filename().string());
      store.blobs_.emplace(to_hex(d), std::move(blob));
    }
    return store;
  }

 private:
  std::map<std::string, Bytes> blobs_;
};

// ---------------------------------------------------------------------------

struct LedgerOptions {
  std::uint64_t ttl = 1000;          // t_exp = t_s + ttl
  std::uint64_t clock_start = 1000;  // logical time of the genesis block
  std::uint64_t clock_tick = 10;     // logical time per round
  std::uint64_t key_seed = 0x666c726c64ULL;
};

struct ChainVerdict {
  bool ok = true;
  // Index of the first block that fails, and every failed (index, reason)
  // pair; later links are usually stale once one block is tampered.
  std::optional<std::size_t> first_failure;
  std::vector<std::pair<std::size_t, std::string>> failures;

  void fail(std::size_t index, std::string reason) {
    ok = false;
    if (!first_failure) first_failure = index;
    failures.emplace_back(index, std::move(reason));
  }
};

// Append-only chain of round records plus the key registry and payload store
// used to verify it. Single writer, any number of concurrent readers.
class Ledger {
 public:
  explicit Ledger(LedgerOptions options = {}) : options_(options) {
    registry_.register_derived(options_.key_seed, kTaskAuthority);
  }

  const LedgerOptions& options() const { return options_; }
  KeyRegistry& registry() { return registry_; }
  const KeyRegistry& registry() const { return registry_; }
  ContentStore& store() { return store_; }
  const ContentStore& store() const { return store_; }

  std::size_t size() const { return blocks_.size(); }
  bool empty() const { return blocks_.empty(); }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block(std::size_t i) const { return blocks_.at(i); }

  Digest tip_hash() const {
    if (blocks_.empty()) return zero_digest();
    return blocks_.back().hash();
  }

  void register_participants(const std::vector<Asn>& participants) {
    for (Asn a : participants) {
      if (a == kTaskAuthority) throw DataError("ASN 0 is reserved for the task authority");
      registry_.register_derived(options_.key_seed, a);
    }
  }

  // Creates and appends the genesis block recording the initial model digest
  // and the task description. Membership is fixed here for the whole task.
  const Block& append_genesis(const Digest& initial_model_digest, Bytes initial_model_blob,
                              Bytes task_info, std::vector<Asn> participants) {
    if (!blocks_.empty()) throw InvariantError("ledger already has a genesis block");
    std::sort(participants.begin(), participants.end());
    register_participants(participants);
    store_.put(std::move(initial_model_blob));
    Block b;
    b.round = 0;
    b.prev_hash = zero_digest();
    b.t_s = options_.clock_start;
    b.t_exp = b.t_s + options_.ttl;
    b.payload_digest = initial_model_digest;
    b.storage_ref = to_hex(initial_model_digest);
    b.note = std::move(task_info);
    b.participants = std::move(participants);
    b.winner = kTaskAuthority;
    b.signature = registry_.signer_for(kTaskAuthority).sign(b.presignature_bytes());
    blocks_.push_back(std::move(b));
    return blocks_.back();
  }

  // Appends one round's record: stores the aggregated update blob, builds the
  // block, and signs it with the given key, which must belong to the winner.
  const Block& append_round(std::uint64_t round, Asn winner, Bytes global_update_blob,
                            const Signer& signer) {
    if (blocks_.empty()) throw InvariantError("append_round before genesis");
    if (signer.asn() != winner)
      throw DataError("signer AS " + std::to_string(signer.asn()) +
                      " is not the round winner AS " + std::to_string(winner));
    const std::vector<Asn>& members = blocks_.front().participants;
    if (!std::binary_search(members.begin(), members.end(), winner))
      throw DataError("winner AS " + std::to_string(winner) + " is not a task participant");
    if (!registry_.has(winner))
      throw DataError("winner AS " + std::to_string(winner) + " has no registered key");

    Block b;
    b.round = round;
    b.prev_hash = tip_hash();
    b.t_s = options_.clock_start + round * options_.clock_tick;
    b.t_exp = b.t_s + options_.ttl;
    b.payload_digest = store_.put(std::move(global_update_blob));
    b.storage_ref = to_hex(b.payload_digest);
    b.participants = members;
    b.winner = winner;
    b.signature = signer.sign(b.presignature_bytes());
    blocks_.push_back(std::move(b));
    return blocks_.back();
  }

  // For import paths and tamper tests; no validation beyond storage.
  void push_block_unchecked(Block b) { blocks_.push_back(std::move(b)); }
  Block& mutable_block(std::size_t i) { return blocks_.at(i); }

  ChainVerdict verify_chain() const {
    ChainVerdict verdict;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const Block& b = blocks_[i];
      Digest expect_prev = i == 0 ? zero_digest() : blocks_[i - 1].hash();
      if (b.prev_hash != expect_prev) verdict.fail(i, "prev-hash link mismatch");
      Bytes presig = b.presignature_bytes();
      if (!registry_.verify(b.winner, std::span<const std::uint8_t>(presig),
                            std::span<const std::uint8_t>(b.signature)))
        verdict.fail(i, "signature does not verify");
      if (!b.storage_ref.empty()) {
        if (to_hex(b.payload_digest) != b.storage_ref)
          verdict.fail(i, "storage reference does not match payload digest");
        else if (!store_.contains(b.payload_digest))
          verdict.fail(i, "payload blob missing from content store");
        else {
          const Bytes& blob = store_.get(b.payload_digest)->get();
          if (sha256(std::span<const std::uint8_t>(blob)) != b.payload_digest)
            verdict.fail(i, "payload blob does not match digest");
        }
      }
    }
    return verdict;
  }

  // Chain file: "FLCF" | version u32 | options | registry | blocks, all
  // lengths big-endian. Keys are shared verification secrets of the
  // simulation's keyed-digest scheme, so exporting them is intentional.
  Bytes export_chain() const {
    Bytes out;
    out.insert(out.end(), {'F', 'L', 'C', 'F'});
    wire::put_u32_be(out, 1);
    wire::put_u64_be(out, options_.ttl);
    wire::put_u64_be(out, options_.clock_start);
    wire::put_u64_be(out, options_.clock_tick);
    wire::put_u64_be(out, options_.key_seed);
    wire::put_u32_be(out, static_cast<std::uint32_t>(registry_.all().size()));
    for (const auto& [asn, key] : registry_.all()) {
      wire::put_u32_be(out, asn);
      wire::put_u16_be(out, static_cast<std::uint16_t>(key.size()));
      wire::put_bytes(out, std::span<const std::uint8_t>(key));
    }
    wire::put_u32_be(out, static_cast<std::uint32_t>(blocks_.size()));
    for (const Block& b : blocks_) {
      Bytes bytes = b.canonical_bytes();
      wire::put_u32_be(out, static_cast<std::uint32_t>(bytes.size()));
      wire::put_bytes(out, std::span<const std::uint8_t>(bytes));
    }
    return out;
  }

  static Ledger import_chain(std::span<const std::uint8_t> data) {
    wire::Reader r(data);
    auto magic = r.take(4);
    const char expect[4] = {'F', 'L', 'C', 'F'};
    if (!std::equal(magic.begin(), magic.end(), reinterpret_cast<const std::uint8_t*>(expect)))
      throw DataError("bad chain file magic");
    if (r.u32_be() != 1) throw DataError("unsupported chain file version");
    LedgerOptions options;
    options.ttl = r.u64_be();
    options.clock_start = r.u64_be();
    options.clock_tick = r.u64_be();
    options.key_seed = r.u64_be();
    Ledger ledger(options);
    std::uint32_t n_keys = r.u32_be();
    for (std::uint32_t i = 0; i < n_keys; ++i) {
      Asn asn = r.u32_be();
      auto key = r.take(r.u16_be());
      ledger.registry_.register_key(asn, Bytes(key.begin(), key.end()));
    }
    std::uint32_t n_blocks = r.u32_be();
    for (std::uint32_t i = 0; i < n_blocks; ++i) {
      auto bytes = r.take(r.u32_be());
      ledger.blocks_.push_back(deserialize_block(bytes));
    }
    if (!r.done()) throw DataError("trailing bytes in chain file");
    return ledger;
  }

  void export_chain_file(const std::filesystem::path& path) const {
    Bytes data = export_chain();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
  }

  static Ledger import_chain_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return import_chain(data);
  }

 private:
  LedgerOptions options_;
  KeyRegistry registry_;
  ContentStore store_;
  std::vector<Block> blocks_;
};

inline ChainVerdict verify_chain(const Ledger& ledger) { return ledger.verify_chain(); }

}  // namespace flrld
