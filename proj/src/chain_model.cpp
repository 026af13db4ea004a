#include "prioscope/chain_model.hpp"

#include <unordered_set>

#include "prioscope/errors.hpp"

namespace prioscope {

std::string_view to_string(Chain chain) { return chain == Chain::btc ? "btc" : "eth"; }

std::optional<Chain> parse_chain(std::string_view text) {
    if (text == "btc") return Chain::btc;
    if (text == "eth") return Chain::eth;
    return std::nullopt;
}

bool is_hex_id(std::string_view text, std::size_t length) {
    if (text.size() != length) return false;
    for (char c : text) {
        const bool hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
        if (!hex) return false;
    }
    return true;
}

EthTx EthTx::legacy(std::string hash, std::string issuer, std::string recipient,
                    std::uint64_t gas_used, const Wei& gas_price, const Wei& coinbase_transfer,
                    TxStatus status) {
    EthTx tx;
    tx.hash = std::move(hash);
    tx.issuer = std::move(issuer);
    tx.recipient = std::move(recipient);
    tx.gas_used = gas_used;
    tx.max_fee_per_gas = gas_price;
    tx.max_priority_fee_per_gas = gas_price;
    tx.coinbase_transfer = coinbase_transfer;
    tx.status = status;
    return tx;
}

std::size_t ChainBlock::tx_count() const {
    return std::visit([](const auto& list) { return list.size(); }, txs);
}

const BtcTxList& ChainBlock::btc_txs() const {
    if (const auto* list = std::get_if<BtcTxList>(&txs)) return *list;
    throw InvariantViolation("block " + std::to_string(height) + " is not a btc block");
}

const EthTxList& ChainBlock::eth_txs() const {
    if (const auto* list = std::get_if<EthTxList>(&txs)) return *list;
    throw InvariantViolation("block " + std::to_string(height) + " is not an eth block");
}

void validate(const BtcTx& tx) {
    if (!is_hex_id(tx.txid, 64)) throw InvariantViolation("txid must be 64 hex chars: '" + tx.txid + "'");
    if (tx.vsize < 1) throw InvariantViolation("vsize must be >= 1 for " + tx.txid);
    if (tx.fee < 0) throw InvariantViolation("fee must be >= 0 for " + tx.txid);
    if (tx.total_output_value < 0) throw InvariantViolation("output value must be >= 0 for " + tx.txid);
    for (const auto& in : tx.inputs) {
        if (!is_hex_id(in.txid, 64)) throw InvariantViolation("input txid must be 64 hex chars in " + tx.txid);
    }
}

void validate(const EthTx& tx) {
    if (!is_hex_id(tx.hash, 64)) throw InvariantViolation("hash must be 64 hex chars: '" + tx.hash + "'");
    if (!is_hex_id(tx.issuer, 40)) throw InvariantViolation("from must be 40 hex chars in " + tx.hash);
    if (!tx.recipient.empty() && !is_hex_id(tx.recipient, 40)) {
        throw InvariantViolation("to must be 40 hex chars or empty in " + tx.hash);
    }
    if (tx.gas_used == 0) throw InvariantViolation("gas_used must be positive in " + tx.hash);
    if (tx.max_fee_per_gas < 0 || tx.max_priority_fee_per_gas < 0 || tx.coinbase_transfer < 0) {
        throw InvariantViolation("negative wei amount in " + tx.hash);
    }
    if (tx.max_priority_fee_per_gas > tx.max_fee_per_gas) {
        throw InvariantViolation("max priority fee above max fee in " + tx.hash);
    }
}

void validate(const ChainBlock& block) {
    if (block.chain() == Chain::eth) {
        if (!block.base_fee_per_gas) throw InvariantViolation("eth block without base fee");
        if (*block.base_fee_per_gas < 0) throw InvariantViolation("negative base fee");
    } else if (block.base_fee_per_gas) {
        throw InvariantViolation("btc block carries a base fee");
    }
    std::unordered_set<std::string> seen;
    std::visit(
        [&](const auto& list) {
            for (const auto& tx : list) {
                validate(tx);
                const std::string& id = [&]() -> const std::string& {
                    if constexpr (std::is_same_v<std::decay_t<decltype(tx)>, BtcTx>) return tx.txid;
                    else return tx.hash;
                }();
                if (!seen.insert(id).second) throw InvariantViolation("duplicate transaction " + id);
            }
        },
        block.txs);
}

Wei effective_gas_price(const EthTx& tx, const Wei& base_fee) {
    if (base_fee > tx.max_fee_per_gas) {
        throw BaseFeeExceedsMaxFee("base fee " + base_fee.str() + " exceeds max fee " +
                                   tx.max_fee_per_gas.str() + " of " + tx.hash);
    }
    Wei capped = base_fee + tx.max_priority_fee_per_gas;
    return capped < tx.max_fee_per_gas ? capped : tx.max_fee_per_gas;
}

Wei miner_tip_per_gas(const EthTx& tx, const Wei& base_fee) {
    return effective_gas_price(tx, base_fee) - base_fee;
}

Wei tx_miner_reward(const EthTx& tx, const Wei& base_fee) {
    return miner_tip_per_gas(tx, base_fee) * tx.gas_used + tx.coinbase_transfer;
}

Wei tx_fee_paid(const EthTx& tx, const Wei& base_fee) {
    return effective_gas_price(tx, base_fee) * tx.gas_used;
}

std::string_view to_string(BundleTag tag) {
    switch (tag) {
        case BundleTag::flashbots: return "flashbots";
        case BundleTag::rogue: return "rogue";
        case BundleTag::miner_payout: return "miner_payout";
    }
    return "flashbots";
}

std::optional<BundleTag> parse_bundle_tag(std::string_view text) {
    if (text == "flashbots") return BundleTag::flashbots;
    if (text == "rogue") return BundleTag::rogue;
    if (text == "miner_payout") return BundleTag::miner_payout;
    return std::nullopt;
}

std::string_view to_string(Quote quote) { return quote == Quote::eth ? "ETH" : "USD"; }

std::optional<Quote> parse_quote(std::string_view text) {
    if (text == "ETH") return Quote::eth;
    if (text == "USD") return Quote::usd;
    return std::nullopt;
}

std::string_view to_string(Protocol protocol) {
    return protocol == Protocol::aave ? "aave" : "compound";
}

std::optional<Protocol> parse_protocol(std::string_view text) {
    if (text == "aave") return Protocol::aave;
    if (text == "compound") return Protocol::compound;
    return std::nullopt;
}

namespace {

bool is_symbol(std::string_view text) {
    if (text.empty()) return false;
    for (char c : text) {
        const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        if (!ok) return false;
    }
    return true;
}

constexpr unsigned kMaxDecimals = 36;

}  // namespace

bool is_feed_label(std::string_view text) {
    auto dash = text.find('-');
    if (dash == std::string_view::npos) return false;
    return is_symbol(text.substr(0, dash)) && is_symbol(text.substr(dash + 1));
}

void validate(const BundleRecord& bundle) {
    if (bundle.tx_hashes.empty()) throw InvariantViolation("bundle without transactions");
    for (const auto& h : bundle.tx_hashes) {
        if (!is_hex_id(h, 64)) throw InvariantViolation("bundle tx hash must be 64 hex chars: '" + h + "'");
    }
}

void validate(const MempoolSnapshot& snapshot) {
    for (const auto& id : snapshot.pending) {
        if (!is_hex_id(id, 64)) throw InvariantViolation("pending id must be 64 hex chars: '" + id + "'");
    }
}

void validate(const PricePoint& point) {
    if (!is_symbol(point.asset)) throw InvariantViolation("bad asset symbol '" + point.asset + "'");
    if (point.decimals > kMaxDecimals) throw InvariantViolation("decimals above 36");
}

void validate(const LiquidationEvent& event) {
    if (!is_hex_id(event.tx_hash, 64)) throw InvariantViolation("tx_hash must be 64 hex chars");
    if (!is_symbol(event.debt_asset) || !is_symbol(event.collateral_asset)) {
        throw InvariantViolation("bad asset symbol in liquidation " + event.tx_hash);
    }
    if (event.debt_repaid <= 0 || event.collateral_seized <= 0) {
        throw InvariantViolation("liquidation amounts must be positive in " + event.tx_hash);
    }
    if (event.debt_decimals > kMaxDecimals || event.collateral_decimals > kMaxDecimals) {
        throw InvariantViolation("decimals above 36 in " + event.tx_hash);
    }
}

void validate(const OracleUpdate& update) {
    if (!is_hex_id(update.tx_hash, 64)) throw InvariantViolation("tx_hash must be 64 hex chars");
    if (!is_feed_label(update.feed)) throw InvariantViolation("feed must look like BASE-QUOTE: '" + update.feed + "'");
    if (update.decimals > kMaxDecimals) throw InvariantViolation("decimals above 36 in " + update.tx_hash);
}

}  // namespace prioscope
