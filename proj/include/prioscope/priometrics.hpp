#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "prioscope/chain_model.hpp"
#include "prioscope/ingest.hpp"
#include "prioscope/money.hpp"

namespace prioscope {

/// SPPE thresholds used for "clearly accelerated" and "likely accelerated".
inline constexpr int kStrongAccelerationPct = 99;
inline constexpr int kLikelyAccelerationPct = 50;

// ---------------------------------------------------------------------------
// CPFP exclusion

/// Result of splitting a Bitcoin block into CPFP clusters and the rest.
/// Indices refer to `block.btc_txs()`. The coinbase (index 0) is in
/// neither list.
struct CpfpPartition {
    std::vector<std::size_t> excluded;
    std::vector<std::size_t> retained;
};

/// A transaction is excluded iff it spends an output created in the same
/// block or one of its outputs is spent in the same block. Every member of
/// a connected spend cluster has such an edge, so whole clusters go.
CpfpPartition cpfp_partition(const ChainBlock& block);

// ---------------------------------------------------------------------------
// position prediction

/// 1-based predicted slot range. Fee-tied transactions share the range of
/// the sorted slots their group occupies.
struct PredictedRange {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;

    friend bool operator==(const PredictedRange&, const PredictedRange&) = default;
};

/// Sorting by fee metric descending defines slots 1..N. `keys[i]` is the
/// fee metric of the transaction observed at position i+1.
template <class Key>
std::vector<PredictedRange> predict_positions(std::span<const Key> keys) {
    std::vector<std::size_t> order(keys.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return keys[b] < keys[a]; });
    std::vector<PredictedRange> out(keys.size());
    std::size_t group_start = 0;
    for (std::size_t i = 1; i <= order.size(); ++i) {
        const bool boundary = i == order.size() || keys[order[i]] < keys[order[group_start]];
        if (!boundary) continue;
        const auto lo = static_cast<std::uint32_t>(group_start + 1);
        const auto hi = static_cast<std::uint32_t>(i);
        for (std::size_t k = group_start; k < i; ++k) out[order[k]] = {lo, hi};
        group_start = i;
    }
    return out;
}

/// Signed position prediction error in percent for a transaction observed
/// at `observed` (1..n) with predicted range `predicted`. Zero inside the
/// range; positive when it sits above (earlier than) its fee justifies.
Rational signed_position_error(std::uint32_t observed, PredictedRange predicted, std::uint32_t n);

// ---------------------------------------------------------------------------
// per-transaction reports

struct PositionReport {
    std::string txid;
    std::uint64_t height = 0;
    std::string pool;
    std::uint32_t observed = 0;
    PredictedRange predicted;
    Rational sppe;

    Rational ppe() const { return sppe < 0 ? Rational(-sppe) : sppe; }
};

/// Fee metric list for the retained transactions in block order: fee rate
/// for Bitcoin, miner tip per gas for Ethereum.
std::vector<FeeRate> btc_fee_keys(const ChainBlock& block, std::span<const std::size_t> retained);
std::vector<Wei> eth_tip_keys(const ChainBlock& block, std::span<const std::size_t> retained);

/// Reports for the retained transactions, observed positions re-indexed
/// 1..N over `retained`. Throws EmptyBlock when `retained` is empty.
std::vector<PositionReport> position_report(const ChainBlock& block, std::span<const std::size_t> retained,
                                            const std::string& pool);

/// Mean of per-transaction PPE; zero for an empty list.
Rational block_ppe(std::span<const PositionReport> reports);

/// Everything the SPPE pipeline derives from one block.
struct BlockAnalysis {
    std::uint64_t height = 0;
    std::int64_t timestamp = 0;
    std::string pool;
    std::size_t cpfp_excluded = 0;
    bool empty = false;  // nothing left to rank after exclusions
    std::vector<PositionReport> reports;
};

/// Bitcoin: drops the coinbase and CPFP clusters, then ranks by fee rate.
/// Ethereum: ranks every transaction by miner tip per gas.
BlockAnalysis analyze_block(const ChainBlock& block, const PoolRegistry& registry);

// ---------------------------------------------------------------------------
// acceleration flags

/// Transaction ids with sppe >= threshold, in report order. Throws
/// std::invalid_argument unless 0 < threshold <= 100.
std::vector<std::string> flag_accelerated(std::span<const PositionReport> reports, const Rational& threshold);

struct PoolFlagShare {
    std::string pool;
    std::uint64_t blocks = 0;
    std::uint64_t flagged_blocks = 0;
    Rational share_pct;
};

/// For each pool, the share of its blocks that contain at least one
/// transaction at or above the threshold. Sorted by pool name. Blocks with
/// nothing to rank still count toward the pool's total.
std::vector<PoolFlagShare> pool_flag_shares(std::span<const BlockAnalysis> blocks, const Rational& threshold);

// ---------------------------------------------------------------------------
// private inclusions

/// Earliest snapshot timestamp at which each id was pending.
std::unordered_map<std::string, std::int64_t> first_seen_times(std::span<const MempoolSnapshot> snapshots);

struct BlockPrivateTxs {
    std::uint64_t height = 0;
    std::string pool;
    std::size_t considered = 0;
    std::vector<std::string> private_txs;
};

struct PoolPrivateCount {
    std::uint64_t blocks = 0;
    std::uint64_t txs = 0;
    std::uint64_t private_txs = 0;
};

struct PrivateInclusionResult {
    std::vector<BlockPrivateTxs> blocks;   // input order, uncovered blocks omitted
    std::size_t uncovered_blocks = 0;      // no snapshot before the block
    std::map<std::string, PoolPrivateCount> per_pool;
};

/// A transaction is private iff no snapshot taken strictly before its
/// block's timestamp lists it as pending. Bitcoin coinbases are skipped.
BlockPrivateTxs private_txs_in_block(const ChainBlock& block,
                                     const std::unordered_map<std::string, std::int64_t>& first_seen,
                                     const std::string& pool);

PrivateInclusionResult detect_private_inclusions(std::span<const ChainBlock> blocks,
                                                 std::span<const MempoolSnapshot> snapshots,
                                                 const PoolRegistry& registry, unsigned workers = 1);

// ---------------------------------------------------------------------------
// pool shares over calendar windows

enum class Window { day, week, month };
std::string_view to_string(Window window);
std::optional<Window> parse_window(std::string_view text);

/// Start of the UTC calendar window containing `timestamp`. Weeks start on
/// Monday.
std::int64_t window_start(std::int64_t timestamp, Window window);

/// "YYYY-MM-DD" for a UTC timestamp.
std::string utc_date(std::int64_t timestamp);

struct PoolShareRow {
    std::int64_t window_start = 0;
    std::string pool;
    std::uint64_t blocks = 0;
    Rational share_pct;
};

struct PoolShareWindow {
    Window window = Window::day;
    std::vector<PoolShareRow> rows;              // by window start, then pool
    std::map<std::int64_t, std::uint64_t> totals;  // blocks per window

    /// Combined share of `pools` within the window starting at `start`.
    Rational subset_share(std::int64_t start, const std::set<std::string>& pools) const;
};

/// Throws std::invalid_argument for an empty block set.
PoolShareWindow pool_shares(std::span<const ChainBlock> blocks, const PoolRegistry& registry, Window window);

/// Sum of individual pool shares (percent values); exact.
Rational combined_share(std::span<const Rational> shares);

// ---------------------------------------------------------------------------
// delay and position statistics

struct SummaryStats {
    std::size_t count = 0;
    Rational min, p25, median, p75, max, mean;
};

/// Linear-interpolation quantiles over the sorted sample (the common
/// "type 7" definition). All-zero stats for an empty sample.
SummaryStats summarize(std::vector<Rational> values);

struct DelayPositionGroup {
    SummaryStats delay;       // blocks
    SummaryStats percentile;  // 100 * position / block size
    std::vector<std::string> unconfirmed;  // never included in the given blocks
    std::vector<std::string> unreferenced;  // included, but no block at/after the reference time
};

struct DelayPositionStats {
    DelayPositionGroup accelerated;
    DelayPositionGroup non_accelerated;
};

/// Per-transaction measurement used by delay_position_stats.
struct TxDelay {
    std::uint64_t reference_height = 0;
    std::uint64_t inclusion_height = 0;
    std::int64_t delay = 0;  // inclusion - reference + 1: included in the reference block is 1
    Rational percentile;
};

/// `reference_time` maps every transaction of interest to its first-seen
/// (or acceleration) time; members of `flagged` form the accelerated
/// group, all others the non-accelerated one. The reference block is the
/// lowest-height block whose timestamp is at or after the reference time.
/// Position and block size count every transaction in the block,
/// coinbase included.
DelayPositionStats delay_position_stats(const std::unordered_set<std::string>& flagged,
                                        const std::unordered_map<std::string, std::int64_t>& reference_time,
                                        std::span<const ChainBlock> blocks);

// ---------------------------------------------------------------------------
// value transferred

struct ValueTransferred {
    BigInt flagged_sat;
    BigInt total_sat;
    Rational share_pct;
};

/// Output value of the flagged transactions against all non-coinbase
/// transactions in `blocks`.
ValueTransferred value_transferred(const std::unordered_set<std::string>& flagged,
                                   std::span<const ChainBlock> blocks);

// ---------------------------------------------------------------------------
// external label cross-check

struct LabelConfusion {
    std::uint64_t flagged_and_labeled = 0;
    std::uint64_t flagged_only = 0;
    std::uint64_t labeled_only = 0;
};

LabelConfusion accel_label_crosscheck(std::span<const std::string> flagged, const AccelLabelSet& labels);

/// Per window and pool, the share of the window's included `txids` that
/// the pool mined. Ids not found in `blocks` are ignored.
std::vector<PoolShareRow> accel_share_timeseries(const AccelLabelSet& txids, std::span<const ChainBlock> blocks,
                                                 const PoolRegistry& registry, Window window = Window::month);

}  // namespace prioscope
