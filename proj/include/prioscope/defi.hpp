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

enum class EventTag { update, liquidation, other };

enum class PatternClass { update_then_liquidation, double_update_then_liquidations, other };
std::string_view to_string(PatternClass cls);

/// Oracle updates and liquidations keyed by transaction hash.
class EventIndex {
public:
    explicit EventIndex(const EventSet& events);

    const OracleUpdate* update(const std::string& hash) const;
    const LiquidationEvent* liquidation(const std::string& hash) const;
    EventTag tag(const std::string& hash) const;

private:
    std::unordered_map<std::string, const OracleUpdate*> updates_;
    std::unordered_map<std::string, const LiquidationEvent*> liquidations_;
};

struct BundlePattern {
    BundleRef ref;
    std::vector<std::string> tx_hashes;
    std::vector<EventTag> tags;  // one per bundle tx, in order
    std::size_t updates = 0;
    std::size_t liquidations = 0;
    PatternClass cls = PatternClass::other;
    std::vector<std::string> feeds;  // feed labels of the bundle's updates, in order
};

/// Classifies the update/liquidation subsequence (other transactions are
/// ignored): one update then one or more liquidations, two updates then
/// one or more liquidations, or anything else.
PatternClass classify_tags(std::span<const EventTag> tags);

BundlePattern classify_bundle_pattern(const BundleRecord& bundle, const EventIndex& events);

/// Counts of oracle updates per feed label across `patterns`.
std::map<std::string, std::uint64_t> feed_pair_counts(std::span<const BundlePattern> patterns);

struct LiquidationProfit {
    Rational quote_profit;             // in the protocol's reference currency
    Rational usd;
    std::optional<Rational> eth;       // set for aave
};

/// Seized collateral value minus repaid debt value at `block`. Aave values
/// both legs in ETH and converts with the ETH-USD price at the same block;
/// Compound values both legs in USD. Throws MissingPrice.
LiquidationProfit liquidation_profit(const LiquidationEvent& event, const PriceStore& prices, std::uint64_t block);

/// Seized collateral value over repaid debt value, both in the protocol's
/// reference currency. nullopt when the debt value is zero.
std::optional<Rational> collateral_ratio(const LiquidationEvent& event, const PriceStore& prices, std::uint64_t block);

struct EnablementCheck {
    bool liquidatable_before = false;  // at block h - 1
    bool liquidatable_at = false;      // at block h
    bool enabled() const { return liquidatable_at && !liquidatable_before; }
};

/// A position is liquidatable when its collateral ratio is below the
/// threshold for (protocol, collateral asset). Throws MissingPrice.
EnablementCheck enabled_by_update(const LiquidationEvent& event, const PriceStore& prices, std::uint64_t block,
                                  const ThresholdTable& thresholds);

struct ProfitPoint {
    std::string tx_hash;
    Rational usd;
};

struct ProfitDistributions {
    std::vector<ProfitPoint> bundled;    // bundled with an oracle update; sorted by profit
    std::vector<ProfitPoint> unbundled;  // sorted by profit
};

/// Splits liquidation profits by whether the liquidation shares a bundle
/// with an oracle update. Every event needs `block_number` set; throws
/// InvariantViolation otherwise and MissingPrice for absent prices.
ProfitDistributions profit_by_bundling_class(std::span<const LiquidationEvent> liquidations,
                                             std::span<const BundlePattern> patterns, const PriceStore& prices);

/// Hashes of liquidations that share a bundle with at least one oracle update.
std::vector<std::string> liquidations_bundled_with_updates(std::span<const BundlePattern> patterns);

/// Empirical CDF value (fraction of profits <= x) of a sorted distribution.
Rational empirical_cdf(std::span<const ProfitPoint> sorted, const Rational& x);

}  // namespace prioscope
