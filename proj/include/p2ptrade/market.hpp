#pragma once

// Per-interval uniform-price double auction and settlement onto the ledger.
//
// Prices and quantities are matched in ledger units (mills, milli-kWh) so
// that bought and sold energy balance exactly.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ledger.hpp"
#include "units.hpp"

namespace p2ptrade {

enum class PeerRole { Prosumer, Consumer, Utility };

struct Peer {
  std::string peer_id;
  PeerRole role = PeerRole::Prosumer;
};

enum class Side { Bid, Offer };

struct Order {
  static constexpr std::int64_t kUnlimited = std::numeric_limits<std::int64_t>::max();

  std::string peer_id;
  Side side = Side::Bid;
  std::int64_t price_mills = 0;
  std::int64_t quantity_mkwh = 0;
  std::int64_t interval_index = 0;
  std::int64_t submit_tick = 0;

  static Order make(std::string peer, Side side, double price_per_kwh, double quantity_kwh, std::int64_t interval,
                    std::int64_t tick = 0) {
    if (price_per_kwh < 0.0 || quantity_kwh < 0.0) throw std::invalid_argument("order price and quantity must be >= 0");
    return Order{std::move(peer), side, to_mills(price_per_kwh), to_milli_kwh(quantity_kwh), interval, tick};
  }

  /// Infinitely elastic order, as posted by the utility.
  static Order unlimited(std::string peer, Side side, double price_per_kwh, std::int64_t interval,
                         std::int64_t tick = 0) {
    if (price_per_kwh < 0.0) throw std::invalid_argument("order price must be >= 0");
    return Order{std::move(peer), side, to_mills(price_per_kwh), kUnlimited, interval, tick};
  }

  bool is_unlimited() const { return quantity_mkwh == kUnlimited; }
  double price_per_kwh() const { return from_mills(price_mills); }

  friend bool operator==(const Order&, const Order&) = default;
};

struct ClearingResult {
  std::int64_t interval_index = 0;
  std::int64_t clearing_price_mills = 0;
  std::vector<Transaction> matches;
  std::vector<Order> unmatched;  // remaining quantity of every order not fully filled

  double clearing_price() const { return from_mills(clearing_price_mills); }

  std::int64_t volume_mkwh() const {
    std::int64_t v = 0;
    for (const auto& t : matches) v += t.energy_mkwh;
    return v;
  }
};

struct ClearingOptions {
  std::string tx_prefix;       // prepended to generated transaction ids
  std::int64_t timestamp = 0;  // stamped on every generated transaction
};

namespace detail {
inline auto bid_key(const Order& o) { return std::tuple(-o.price_mills, o.submit_tick, o.peer_id, o.quantity_mkwh); }
inline auto offer_key(const Order& o) { return std::tuple(o.price_mills, o.submit_tick, o.peer_id, o.quantity_mkwh); }
}  // namespace detail

/// Bids descending, offers ascending; match while bid >= offer. Every fill
/// settles at one price: the midpoint of the last crossing pair, rounded
/// down to a whole mill (which keeps it between that pair's limits).
inline ClearingResult clear_interval(std::vector<Order> bids, std::vector<Order> offers,
                                     const ClearingOptions& opts = {}) {
  ClearingResult r;
  const std::int64_t interval = !bids.empty() ? bids.front().interval_index
                                : !offers.empty() ? offers.front().interval_index
                                                  : 0;
  r.interval_index = interval;
  for (const auto* side : {&bids, &offers})
    for (const auto& o : *side) {
      if (o.interval_index != interval) throw std::invalid_argument("orders span more than one interval");
      if (o.price_mills < 0 || o.quantity_mkwh < 0) throw std::invalid_argument("negative order price or quantity");
    }
  for (const auto& o : bids)
    if (o.side != Side::Bid) throw std::invalid_argument("offer passed as a bid");
  for (const auto& o : offers)
    if (o.side != Side::Offer) throw std::invalid_argument("bid passed as an offer");

  std::sort(bids.begin(), bids.end(), [](const Order& a, const Order& b) { return detail::bid_key(a) < detail::bid_key(b); });
  std::sort(offers.begin(), offers.end(),
            [](const Order& a, const Order& b) { return detail::offer_key(a) < detail::offer_key(b); });

  struct Fill {
    std::size_t bid, offer;
    std::int64_t qty;
  };
  std::vector<Fill> fills;
  std::vector<std::int64_t> bid_left, offer_left;
  for (const auto& o : bids) bid_left.push_back(o.quantity_mkwh);
  for (const auto& o : offers) offer_left.push_back(o.quantity_mkwh);

  std::size_t i = 0, j = 0;
  while (i < bids.size() && j < offers.size() && bids[i].price_mills >= offers[j].price_mills) {
    if (bid_left[i] == 0) { ++i; continue; }
    if (offer_left[j] == 0) { ++j; continue; }
    if (bids[i].peer_id == offers[j].peer_id)
      throw std::invalid_argument("peer " + bids[i].peer_id + " would trade with itself");
    if (bids[i].is_unlimited() && offers[j].is_unlimited())
      throw std::invalid_argument("two unlimited orders cross; volume would be unbounded");

    const std::int64_t q = std::min(bid_left[i], offer_left[j]);
    fills.push_back({i, j, q});
    if (!bids[i].is_unlimited()) bid_left[i] -= q;
    if (!offers[j].is_unlimited()) offer_left[j] -= q;
  }

  if (!fills.empty()) {
    const auto& last = fills.back();
    r.clearing_price_mills = (bids[last.bid].price_mills + offers[last.offer].price_mills) / 2;
  }
  for (std::size_t k = 0; k < fills.size(); ++k) {
    const auto& f = fills[k];
    Transaction tx;
    tx.tx_id = opts.tx_prefix + std::to_string(interval) + "-" + std::to_string(k);
    tx.seller_id = offers[f.offer].peer_id;
    tx.buyer_id = bids[f.bid].peer_id;
    tx.energy_mkwh = f.qty;
    tx.price_mills = r.clearing_price_mills;
    tx.interval_index = interval;
    tx.timestamp = opts.timestamp;
    r.matches.push_back(std::move(tx));
  }
  for (std::size_t k = 0; k < bids.size(); ++k)
    if (bid_left[k] > 0) {
      Order o = bids[k];
      o.quantity_mkwh = bid_left[k];
      r.unmatched.push_back(std::move(o));
    }
  for (std::size_t k = 0; k < offers.size(); ++k)
    if (offer_left[k] > 0) {
      Order o = offers[k];
      o.quantity_mkwh = offer_left[k];
      r.unmatched.push_back(std::move(o));
    }
  return r;
}

struct Rejection {
  Transaction tx;
  EndorsementResult endorsement;
};

struct SettlementResult {
  Ledger ledger;
  std::vector<Transaction> accepted;
  std::vector<Rejection> rejected;
  bool block_appended = false;
};

/// Endorses each match in order. Accepted energy is debited from every peer's
/// view of the seller before the next match is checked. All accepted
/// transactions of the interval go into one block; if none are accepted the
/// ledger is returned unchanged.
inline SettlementResult settle(const ClearingResult& result, const Ledger& ledger, std::vector<PeerView> views,
                               const EndorsementPolicy& policy, std::int64_t block_timestamp) {
  SettlementResult out{ledger, {}, {}, false};
  for (const auto& tx : result.matches) {
    auto e = endorse(tx, ledger, views, policy);
    if (!e.accepted) {
      out.rejected.push_back({tx, std::move(e)});
      continue;
    }
    for (auto& v : views) {
      auto it = v.available_mkwh.find(tx.seller_id);
      if (it != v.available_mkwh.end()) it->second -= tx.energy_mkwh;
    }
    out.accepted.push_back(tx);
  }
  if (!out.accepted.empty()) {
    out.ledger = append_block(ledger, out.accepted, block_timestamp);
    out.block_appended = true;
  }
  return out;
}

}  // namespace p2ptrade
