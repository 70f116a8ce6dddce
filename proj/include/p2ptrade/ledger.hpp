#pragma once

// Append-only block chain of energy trades. Each block commits to its
// transactions through a Merkle root and to its predecessor through
// prev_hash; validate_chain recomputes both.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hash.hpp"
#include "units.hpp"

namespace p2ptrade {

struct Transaction {
  std::string tx_id;
  std::string seller_id;
  std::string buyer_id;
  std::int64_t energy_mkwh = 0;  // milli-kWh
  std::int64_t price_mills = 0;  // $0.001 per kWh
  std::int64_t interval_index = 0;
  std::int64_t timestamp = 0;

  /// Validating constructor; quantities are rounded to ledger resolution.
  static Transaction make(std::string tx_id, std::string seller, std::string buyer, double energy_kwh,
                          double price_per_kwh, std::int64_t interval, std::int64_t timestamp) {
    Transaction tx{std::move(tx_id), std::move(seller), std::move(buyer), to_milli_kwh(energy_kwh),
                   to_mills(price_per_kwh),  interval,          timestamp};
    if (auto why = tx.invariant_violation()) throw std::invalid_argument("transaction " + tx.tx_id + ": " + *why);
    return tx;
  }

  double energy_kwh() const { return from_milli_kwh(energy_mkwh); }
  double price_per_kwh() const { return from_mills(price_mills); }

  std::optional<std::string> invariant_violation() const {
    if (tx_id.empty()) return "empty tx_id";
    if (seller_id.empty() || buyer_id.empty()) return "empty peer id";
    if (seller_id == buyer_id) return "seller and buyer are the same peer";
    if (energy_mkwh <= 0) return "energy must be positive";
    if (price_mills < 0) return "price must be non-negative";
    if (interval_index < 0) return "negative interval index";
    return std::nullopt;
  }

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

inline std::vector<std::uint8_t> canonical_bytes(const Transaction& tx) {
  CanonicalWriter w;
  w.field(tx.tx_id)
      .field(tx.seller_id)
      .field(tx.buyer_id)
      .field(tx.energy_mkwh)
      .field(tx.price_mills)
      .field(tx.interval_index)
      .field(tx.timestamp);
  return w.bytes();
}

inline Digest hash_transaction(const Transaction& tx) {
  auto bytes = canonical_bytes(tx);
  return sha256(std::span<const std::uint8_t>(bytes));
}

/// Pairwise reduction of leaf hashes. A single leaf is its own root; an odd
/// node at any level is paired with itself.
inline Digest merkle_root_of_leaves(std::vector<Digest> level) {
  if (level.empty()) throw std::invalid_argument("merkle_root of an empty transaction list");
  while (level.size() > 1) {
    std::vector<Digest> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
      const Digest& right = (i + 1 < level.size()) ? level[i + 1] : level[i];
      next.push_back(hash_pair(level[i], right));
    }
    level = std::move(next);
  }
  return level.front();
}

inline Digest merkle_root(std::span<const Transaction> txs) {
  std::vector<Digest> leaves;
  leaves.reserve(txs.size());
  for (const auto& tx : txs) leaves.push_back(hash_transaction(tx));
  return merkle_root_of_leaves(std::move(leaves));
}

struct BlockHeader {
  std::int64_t height = 0;
  Digest prev_hash;
  Digest merkle_root;
  std::int64_t timestamp = 0;
  Digest block_hash;

  Digest compute_hash() const {
    CanonicalWriter w;
    w.field(height).field(prev_hash).field(merkle_root).field(timestamp);
    return w.digest();
  }

  friend bool operator==(const BlockHeader&, const BlockHeader&) = default;
};

struct Block {
  BlockHeader header;
  std::vector<Transaction> transactions;

  friend bool operator==(const Block&, const Block&) = default;
};

/// Root committed by the genesis block, which carries no transactions.
inline Digest empty_merkle_root() { return sha256(std::string_view{}); }

inline Block make_genesis_block() {
  Block g;
  g.header.height = 0;
  g.header.prev_hash = Digest::zero();
  g.header.merkle_root = empty_merkle_root();
  g.header.timestamp = 0;
  g.header.block_hash = g.header.compute_hash();
  return g;
}

struct ChainCheck {
  bool valid = true;
  std::optional<std::int64_t> first_bad_height;
  std::string reason;

  explicit operator bool() const { return valid; }
};

class Ledger {
 public:
  /// A ledger holding only the genesis block.
  Ledger() : blocks_{make_genesis_block()} {}

  /// Wraps blocks as given (e.g. read back from a dump). No checks; call
  /// validate_chain before trusting the result.
  static Ledger from_blocks(std::vector<Block> blocks) {
    Ledger l;
    l.blocks_ = std::move(blocks);
    return l;
  }

  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  const Block& tip() const { return blocks_.back(); }

  std::size_t transaction_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks_) n += b.transactions.size();
    return n;
  }

  bool contains_tx(const std::string& tx_id) const {
    for (const auto& b : blocks_)
      for (const auto& tx : b.transactions)
        if (tx.tx_id == tx_id) return true;
    return false;
  }

  friend bool operator==(const Ledger&, const Ledger&) = default;

 private:
  std::vector<Block> blocks_;
};

inline Ledger append_block(const Ledger& ledger, std::vector<Transaction> txs, std::int64_t timestamp) {
  if (txs.empty()) throw std::invalid_argument("append_block: a block needs at least one transaction");
  for (const auto& tx : txs)
    if (auto why = tx.invariant_violation()) throw std::invalid_argument("append_block: " + *why);
  if (ledger.blocks().empty()) throw std::invalid_argument("append_block: ledger has no genesis block");

  Block b;
  b.header.height = ledger.tip().header.height + 1;
  b.header.prev_hash = ledger.tip().header.block_hash;
  b.header.merkle_root = merkle_root(txs);
  b.header.timestamp = timestamp;
  b.header.block_hash = b.header.compute_hash();
  b.transactions = std::move(txs);

  auto blocks = ledger.blocks();
  blocks.push_back(std::move(b));
  return Ledger::from_blocks(std::move(blocks));
}

/// Full recomputation; reports the lowest height at which the chain breaks.
inline ChainCheck check_chain(const Ledger& ledger) {
  auto fail = [](std::int64_t h, std::string why) { return ChainCheck{false, h, std::move(why)}; };
  const auto& blocks = ledger.blocks();
  if (blocks.empty()) return fail(0, "no genesis block");

  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const auto h = static_cast<std::int64_t>(i);
    if (b.header.height != h) return fail(h, "height out of sequence");
    if (i == 0) {
      if (!b.header.prev_hash.is_zero()) return fail(h, "genesis prev_hash is not zero");
      if (!b.transactions.empty()) return fail(h, "genesis carries transactions");
      if (b.header.merkle_root != empty_merkle_root()) return fail(h, "genesis merkle root mismatch");
    } else {
      if (b.transactions.empty()) return fail(h, "empty block");
      for (const auto& tx : b.transactions)
        if (auto why = tx.invariant_violation()) return fail(h, "invalid transaction: " + *why);
      if (b.header.prev_hash != blocks[i - 1].header.block_hash) return fail(h, "prev_hash does not link");
      if (b.header.merkle_root != merkle_root(b.transactions)) return fail(h, "merkle root mismatch");
    }
    if (b.header.block_hash != b.header.compute_hash()) return fail(h, "block hash mismatch");
  }
  return {};
}

inline bool validate_chain(const Ledger& ledger) { return check_chain(ledger).valid; }

// ---------------------------------------------------------------------------
// Endorsement

struct EndorsementPolicy {
  std::vector<std::string> peer_ids;
  std::size_t quorum = 1;

  void validate() const {
    if (peer_ids.empty()) throw std::invalid_argument("endorsement policy has no peers");
    auto sorted = peer_ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("endorsement policy lists a peer twice");
    if (quorum < 1 || quorum > peer_ids.size())
      throw std::invalid_argument("endorsement quorum must be in [1, number of peers]");
  }
};

/// One endorsing peer's belief about how much energy each seller can deliver.
struct PeerView {
  std::string peer_id;
  std::map<std::string, std::int64_t> available_mkwh;

  std::int64_t available(const std::string& seller) const {
    auto it = available_mkwh.find(seller);
    return it == available_mkwh.end() ? 0 : it->second;
  }
};

struct EndorsementResult {
  bool accepted = false;
  std::vector<std::pair<std::string, bool>> votes;

  std::size_t approvals() const {
    return static_cast<std::size_t>(std::count_if(votes.begin(), votes.end(), [](const auto& v) { return v.second; }));
  }
};

/// A peer approves when the transaction is well formed, not already on the
/// ledger, and its view shows the seller holding at least the traded energy.
/// Peers in the policy without a view deny.
inline EndorsementResult endorse(const Transaction& tx, const Ledger& ledger, std::span<const PeerView> views,
                                 const EndorsementPolicy& policy) {
  policy.validate();
  const bool well_formed = !tx.invariant_violation().has_value() && !ledger.contains_tx(tx.tx_id);

  EndorsementResult r;
  r.votes.reserve(policy.peer_ids.size());
  for (const auto& peer : policy.peer_ids) {
    auto view = std::find_if(views.begin(), views.end(), [&](const PeerView& v) { return v.peer_id == peer; });
    const bool ok = well_formed && view != views.end() && view->available(tx.seller_id) >= tx.energy_mkwh;
    r.votes.emplace_back(peer, ok);
  }
  r.accepted = r.approvals() >= policy.quorum;
  return r;
}

}  // namespace p2ptrade
