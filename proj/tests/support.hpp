#pragma once

// Shared fixtures for the unit tests.

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "p2ptrade/ledger.hpp"
#include "p2ptrade/scenario.hpp"

namespace testsupport {

inline std::filesystem::path source_dir() { return P2PTRADE_SOURCE_DIR; }
inline std::filesystem::path table1_dir() { return source_dir() / "scenarios" / "table1"; }

inline const nlohmann::json& vectors() {
  static const nlohmann::json v = [] {
    std::ifstream in(std::filesystem::path(P2PTRADE_ORACLE_DIR) / "ledger_vectors.json");
    return nlohmann::json::parse(in);
  }();
  return v;
}

inline p2ptrade::Transaction vector_tx(const std::string& name) {
  const auto& t = vectors()["transactions"][name];
  return {t["tx_id"], t["seller_id"], t["buyer_id"], t["energy_mkwh"], t["price_mills"], t["interval_index"], t["timestamp"]};
}

inline p2ptrade::Transaction tx(std::string id, std::string seller, std::string buyer, std::int64_t mkwh,
                                std::int64_t mills = 150, std::int64_t interval = 0) {
  return {std::move(id), std::move(seller), std::move(buyer), mkwh, mills, interval, interval * 3600};
}

/// Ledger with `blocks` blocks including genesis; block h holds h transactions (capped at 4).
inline p2ptrade::Ledger sample_ledger(int blocks) {
  p2ptrade::Ledger l;
  for (int h = 1; h < blocks; ++h) {
    std::vector<p2ptrade::Transaction> txs;
    for (int k = 0; k < std::min(h, 4); ++k)
      txs.push_back(tx("b" + std::to_string(h) + "-" + std::to_string(k), "prosumer-" + std::to_string(k), "consumer",
                       1000 + 10 * h + k, 100 + h, h));
    l = p2ptrade::append_block(l, std::move(txs), h * 3600);
  }
  return l;
}

}  // namespace testsupport
