#pragma once

// Small constructors for test blocks and transactions.

#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "prioscope/chain_model.hpp"

namespace build {

using namespace prioscope;

inline std::string id(std::uint64_t n, std::size_t chars = 64) {
    std::string s = std::to_string(n);
    return std::string(chars - s.size(), '0') + s;
}

inline Wei gwei(std::uint64_t g) { return Wei(g) * kWeiPerGwei; }

inline EthTx eth_tx(std::string hash, std::string from, const Wei& max_fee, const Wei& tip, std::uint64_t gas,
                    const Wei& transfer = 0, TxStatus status = TxStatus::ok) {
    EthTx tx;
    tx.hash = std::move(hash);
    tx.issuer = std::move(from);
    tx.recipient = id(999, 40);
    tx.gas_used = gas;
    tx.max_fee_per_gas = max_fee;
    tx.max_priority_fee_per_gas = tip;
    tx.coinbase_transfer = transfer;
    tx.status = status;
    return tx;
}

inline ChainBlock eth_block(std::uint64_t number, const Wei& base, EthTxList txs, std::int64_t ts = 1'600'000'000,
                            std::string miner = id(1, 40)) {
    ChainBlock b;
    b.height = number;
    b.timestamp = ts;
    b.miner_marker = std::move(miner);
    b.base_fee_per_gas = base;
    b.txs = std::move(txs);
    return b;
}

inline BtcTx btc_tx(std::string txid, std::int64_t fee, std::int64_t vsize = 100, std::vector<OutPoint> inputs = {},
                    std::int64_t out = 1000) {
    return {std::move(txid), vsize, fee, std::move(inputs), out};
}

/// Coinbase first, then `txs`.
inline ChainBlock btc_block(std::uint64_t height, BtcTxList txs, std::int64_t ts = 1'600'000'000,
                            std::string tag = "/unknown/") {
    ChainBlock b;
    b.height = height;
    b.timestamp = ts;
    b.miner_marker = std::move(tag);
    BtcTxList all{btc_tx(id(height * 1'000'000), 0, 200)};
    for (auto& t : txs) all.push_back(std::move(t));
    b.txs = std::move(all);
    return b;
}

/// Bitcoin block whose i-th non-coinbase tx pays rate fees[i] (sat/vB).
inline ChainBlock btc_block_with_rates(std::uint64_t height, const std::vector<std::int64_t>& rates,
                                       std::int64_t vsize = 100) {
    BtcTxList txs;
    for (std::size_t i = 0; i < rates.size(); ++i)
        txs.push_back(btc_tx(id(height * 1'000'000 + i + 1), rates[i] * vsize, vsize,
                             {{id(77'000'000'000ULL + height * 1000 + i), 0}}));
    return btc_block(height, std::move(txs));
}

}  // namespace build
