#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "prioscope/money.hpp"

namespace prioscope {

enum class Chain { btc, eth };

std::string_view to_string(Chain chain);
std::optional<Chain> parse_chain(std::string_view text);

/// True iff `text` is exactly `length` hexadecimal digits.
bool is_hex_id(std::string_view text, std::size_t length);

struct OutPoint {
    std::string txid;
    std::uint32_t vout = 0;

    friend bool operator==(const OutPoint&, const OutPoint&) = default;
};

/// Satoshi per vbyte kept as the (fee, vsize) pair. Ordering is by
/// cross-multiplication, so equal rates such as 2/1 and 4/2 compare
/// equivalent and tie detection is exact.
struct FeeRate {
    std::int64_t fee = 0;
    std::int64_t vsize = 1;

    friend std::weak_ordering operator<=>(const FeeRate& a, const FeeRate& b) {
        const __int128 lhs = static_cast<__int128>(a.fee) * b.vsize;
        const __int128 rhs = static_cast<__int128>(b.fee) * a.vsize;
        if (lhs < rhs) return std::weak_ordering::less;
        if (lhs > rhs) return std::weak_ordering::greater;
        return std::weak_ordering::equivalent;
    }
    friend bool operator==(const FeeRate& a, const FeeRate& b) {
        return (a <=> b) == std::weak_ordering::equivalent;
    }
};

struct BtcTx {
    std::string txid;
    std::int64_t vsize = 1;
    std::int64_t fee = 0;
    std::vector<OutPoint> inputs;
    std::int64_t total_output_value = 0;

    FeeRate fee_rate() const { return {fee, vsize}; }
};

enum class TxStatus { ok, fail };

struct EthTx {
    std::string hash;
    std::string issuer;
    std::string recipient;  // empty for contract creation
    std::uint64_t gas_used = 0;
    Wei max_fee_per_gas;
    Wei max_priority_fee_per_gas;
    Wei coinbase_transfer;
    TxStatus status = TxStatus::ok;

    /// Pre-1559 transactions carry one gas price; it serves as both cap and tip.
    static EthTx legacy(std::string hash, std::string issuer, std::string recipient,
                        std::uint64_t gas_used, const Wei& gas_price, const Wei& coinbase_transfer,
                        TxStatus status);
};

using BtcTxList = std::vector<BtcTx>;
using EthTxList = std::vector<EthTx>;

/// One mined block. Transaction order is the order inside the block;
/// position 1 is `txs[0]`. For Bitcoin, position 1 is the coinbase.
struct ChainBlock {
    std::uint64_t height = 0;
    std::int64_t timestamp = 0;
    std::string miner_marker;  // coinbase tag (btc) or miner address (eth)
    std::optional<Wei> base_fee_per_gas;
    std::variant<BtcTxList, EthTxList> txs;

    Chain chain() const { return txs.index() == 0 ? Chain::btc : Chain::eth; }
    std::size_t tx_count() const;

    /// Throw InvariantViolation when the block is of the other chain.
    const BtcTxList& btc_txs() const;
    const EthTxList& eth_txs() const;
};

/// Invariant checks; each throws InvariantViolation with a reason.
void validate(const BtcTx& tx);
void validate(const EthTx& tx);
void validate(const ChainBlock& block);

/// EIP-1559 price actually paid per gas: min(max_fee, base_fee + tip).
/// Throws BaseFeeExceedsMaxFee when base_fee > max_fee.
Wei effective_gas_price(const EthTx& tx, const Wei& base_fee);

/// What the miner keeps per gas: effective_gas_price - base_fee.
Wei miner_tip_per_gas(const EthTx& tx, const Wei& base_fee);

/// Tip per gas times gas used, plus the direct coinbase transfer.
Wei tx_miner_reward(const EthTx& tx, const Wei& base_fee);

/// Total fee charged to the sender: effective_gas_price * gas_used.
Wei tx_fee_paid(const EthTx& tx, const Wei& base_fee);

enum class BundleTag { flashbots, rogue, miner_payout };

std::string_view to_string(BundleTag tag);
std::optional<BundleTag> parse_bundle_tag(std::string_view text);

/// Identifies one bundle: (block number, 0-based order inside the block).
struct BundleRef {
    std::uint64_t block_number = 0;
    std::uint32_t bundle_index = 0;

    friend auto operator<=>(const BundleRef&, const BundleRef&) = default;
};

struct BundleRecord {
    std::uint64_t block_number = 0;
    std::uint32_t bundle_index = 0;
    std::vector<std::string> tx_hashes;
    BundleTag tag = BundleTag::flashbots;

    BundleRef ref() const { return {block_number, bundle_index}; }
};

struct MempoolSnapshot {
    std::int64_t timestamp = 0;
    std::vector<std::string> pending;
};

enum class Quote { eth, usd };
std::string_view to_string(Quote quote);
std::optional<Quote> parse_quote(std::string_view text);

struct PricePoint {
    std::uint64_t block_number = 0;
    std::string asset;
    Quote quote = Quote::usd;
    BigInt price;
    unsigned decimals = 0;

    Rational value() const { return scaled(price, decimals); }
};

enum class Protocol { aave, compound };
std::string_view to_string(Protocol protocol);
std::optional<Protocol> parse_protocol(std::string_view text);

/// The oracle currency each lending protocol values assets in.
constexpr Quote reference_quote(Protocol protocol) {
    return protocol == Protocol::aave ? Quote::eth : Quote::usd;
}

struct LiquidationEvent {
    Protocol protocol = Protocol::aave;
    std::string tx_hash;
    std::string debt_asset;
    BigInt debt_repaid;
    unsigned debt_decimals = 0;
    std::string collateral_asset;
    BigInt collateral_seized;
    unsigned collateral_decimals = 0;
    std::optional<std::uint64_t> block_number;  // filled from blocks/bundles when absent

    Rational debt_amount() const { return scaled(debt_repaid, debt_decimals); }
    Rational collateral_amount() const { return scaled(collateral_seized, collateral_decimals); }
};

struct OracleUpdate {
    std::string tx_hash;
    std::string feed;  // BASE-QUOTE
    BigInt price;
    unsigned decimals = 0;
    std::optional<std::uint64_t> block_number;
};

/// `BASE-QUOTE` with alphanumeric symbols on both sides.
bool is_feed_label(std::string_view text);

void validate(const BundleRecord& bundle);
void validate(const MempoolSnapshot& snapshot);
void validate(const PricePoint& point);
void validate(const LiquidationEvent& event);
void validate(const OracleUpdate& update);

}  // namespace prioscope
