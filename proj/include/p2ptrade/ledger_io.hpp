#pragma once

// Line-delimited ledger dump: one JSON object per block, genesis first.
// Key order is fixed (see docs/FORMATS.md) so dumps compare byte for byte.

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ledger.hpp"

namespace p2ptrade {

inline nlohmann::ordered_json to_json(const Transaction& tx) {
  nlohmann::ordered_json j;
  j["tx_id"] = tx.tx_id;
  j["seller_id"] = tx.seller_id;
  j["buyer_id"] = tx.buyer_id;
  j["energy_mkwh"] = tx.energy_mkwh;
  j["price_mills"] = tx.price_mills;
  j["interval_index"] = tx.interval_index;
  j["timestamp"] = tx.timestamp;
  return j;
}

inline nlohmann::ordered_json to_json(const Block& b) {
  nlohmann::ordered_json j;
  j["height"] = b.header.height;
  j["timestamp"] = b.header.timestamp;
  j["prev_hash"] = b.header.prev_hash.hex();
  j["merkle_root"] = b.header.merkle_root.hex();
  j["block_hash"] = b.header.block_hash.hex();
  j["transactions"] = nlohmann::ordered_json::array();
  for (const auto& tx : b.transactions) j["transactions"].push_back(to_json(tx));
  return j;
}

inline void write_ledger(std::ostream& out, const Ledger& ledger) {
  for (const auto& b : ledger.blocks()) out << to_json(b).dump() << '\n';
}

inline std::string ledger_dump(const Ledger& ledger) {
  std::ostringstream os;
  write_ledger(os, ledger);
  return os.str();
}

/// Parses a dump without validating the chain.
inline Ledger read_ledger(std::istream& in) {
  std::vector<Block> blocks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Block b;
      b.header.height = j.at("height").get<std::int64_t>();
      b.header.timestamp = j.at("timestamp").get<std::int64_t>();
      b.header.prev_hash = Digest::from_hex(j.at("prev_hash").get<std::string>());
      b.header.merkle_root = Digest::from_hex(j.at("merkle_root").get<std::string>());
      b.header.block_hash = Digest::from_hex(j.at("block_hash").get<std::string>());
      for (const auto& t : j.at("transactions")) {
        Transaction tx;
        tx.tx_id = t.at("tx_id").get<std::string>();
        tx.seller_id = t.at("seller_id").get<std::string>();
        tx.buyer_id = t.at("buyer_id").get<std::string>();
        tx.energy_mkwh = t.at("energy_mkwh").get<std::int64_t>();
        tx.price_mills = t.at("price_mills").get<std::int64_t>();
        tx.interval_index = t.at("interval_index").get<std::int64_t>();
        tx.timestamp = t.at("timestamp").get<std::int64_t>();
        b.transactions.push_back(std::move(tx));
      }
      blocks.push_back(std::move(b));
    } catch (const std::exception& e) {
      throw std::runtime_error("ledger dump line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return Ledger::from_blocks(std::move(blocks));
}

inline Ledger read_ledger_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ledger dump " + path);
  return read_ledger(in);
}

}  // namespace p2ptrade
