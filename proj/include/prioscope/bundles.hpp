#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "prioscope/chain_model.hpp"
#include "prioscope/ingest.hpp"
#include "prioscope/money.hpp"

namespace prioscope {

/// Lookup of Ethereum blocks by number and of transactions by hash within
/// a block. Holds pointers into the caller's block storage.
class EthBlockIndex {
public:
    explicit EthBlockIndex(std::span<const ChainBlock> blocks);

    const ChainBlock* block(std::uint64_t number) const;
    const EthTx* tx(std::uint64_t number, const std::string& hash) const;
    /// Block number that includes `hash`, searching all blocks.
    std::optional<std::uint64_t> block_of(const std::string& hash) const;
    std::size_t block_count() const { return blocks_.size(); }

private:
    std::map<std::uint64_t, const ChainBlock*> blocks_;
    std::unordered_map<std::string, std::pair<std::uint64_t, std::size_t>> txs_;
};

/// Bundle transactions in bundle order. Throws UnresolvedTx for a hash the
/// block does not contain.
std::vector<const EthTx*> resolve_bundle(const BundleRecord& bundle, const ChainBlock& block);

struct BundleEconomics {
    BundleRef ref;
    BigInt total_gas;
    Wei total_reward;

    /// Wei per gas the miner earned for the whole bundle.
    Rational actual_max_priority_fee() const { return Rational(total_reward, total_gas); }
};

/// Sums miner reward (tip * gas + coinbase transfer) and gas over the
/// bundle's transactions. Throws UnresolvedTx, ZeroGas, and
/// BaseFeeExceedsMaxFee.
BundleEconomics bundle_economics(const BundleRecord& bundle, const ChainBlock& block);

/// Pair pattern: different senders; the first pays a public tip and no
/// coinbase transfer; the second pays no tip but transfers to the miner.
bool h2_pattern(const EthTx& first, const EthTx& second);

/// Sandwich pattern: outer transactions share a sender that differs from
/// the middle one; outer tips are zero, the middle tip is positive, and the
/// last transaction pays a coinbase transfer.
bool h3_pattern(const EthTx& first, const EthTx& middle, const EthTx& last);

/// Throw WrongSize unless the bundle has exactly 2 (resp. 3) transactions.
bool detect_h2(const BundleRecord& bundle, const ChainBlock& block);
bool detect_h3_sandwich(const BundleRecord& bundle, const ChainBlock& block);

/// Index within the bundle of the publicly sent transaction captured by a
/// matched pattern: 0 for pairs, 1 (the victim) for sandwiches.
std::size_t public_tx_position(const BundleRecord& bundle);

struct DistributionSummary {
    std::size_t count = 0;
    Rational min, mean, median, max;  // median is the lower middle value
    double stddev = 0.0;  // sample standard deviation (n - 1)
};

DistributionSummary describe(std::vector<Rational> values);

struct BundleStats {
    DistributionSummary bundle_size;
    DistributionSummary bundles_per_block;  // over blocks that hold at least one bundle
    std::uint64_t blocks_total = 0;
    std::uint64_t blocks_with_bundles = 0;
    Rational blocks_with_bundles_pct;
    std::map<std::string, std::uint64_t> bundles_per_pool;
    std::map<std::string, Rational> pool_share_pct;
    std::map<BundleTag, std::uint64_t> tag_tx_refs;
    std::map<BundleTag, Rational> tag_share_pct;  // by transaction reference
    std::uint64_t bundle_txs = 0;
    std::uint64_t failed_bundle_txs = 0;
    Rational failed_share_pct;
};

/// Corpus statistics. `blocks` may be empty; block-dependent fields are
/// then zero and pools are Unknown. Unresolved hashes count as succeeded.
BundleStats bundle_stats(std::span<const BundleRecord> bundles, std::span<const ChainBlock> blocks,
                         const PoolRegistry& registry);

struct FeeGap {
    BundleRef ref;
    Rational actual_fee;   // wei per gas
    Rational public_tip;   // declared max priority fee of the public tx
    Rational gap() const { return actual_fee - public_tip; }
};

struct FeeGapCdf {
    std::vector<FeeGap> gaps;  // sorted by gap, then bundle

    /// Fraction (0..1) of gaps <= x.
    Rational cdf_at(const Rational& x) const;
    /// Fraction (0..1) of gaps >= x.
    Rational fraction_at_least(const Rational& x) const;
};

/// For each matched bundle, the actual per-gas reward minus the public
/// transaction's declared max priority fee.
FeeGapCdf fee_gap_distribution(std::span<const BundleRecord> matched, const EthBlockIndex& blocks);

struct DexCensusRow {
    std::string protocol;
    std::uint64_t bundles = 0;
    std::uint64_t txs = 0;
};

/// Per protocol, distinct bundles and distinct transactions whose
/// recipient is one of the protocol's contracts. A bundle may count for
/// several protocols. Sorted by protocol name.
std::vector<DexCensusRow> dex_call_census(std::span<const BundleRecord> bundles, const EthBlockIndex& blocks,
                                          const ContractRegistry& contracts);

}  // namespace prioscope
