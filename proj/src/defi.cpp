#include "prioscope/defi.hpp"

#include <algorithm>
#include <unordered_set>

#include "prioscope/errors.hpp"

namespace prioscope {

std::string_view to_string(PatternClass cls) {
    switch (cls) {
        case PatternClass::update_then_liquidation: return "update-then-liquidation";
        case PatternClass::double_update_then_liquidations: return "double-update-then-liquidations";
        case PatternClass::other: return "other";
    }
    return "other";
}

EventIndex::EventIndex(const EventSet& events) {
    for (const auto& u : events.updates) updates_.emplace(u.tx_hash, &u);
    for (const auto& l : events.liquidations) liquidations_.emplace(l.tx_hash, &l);
}

const OracleUpdate* EventIndex::update(const std::string& hash) const {
    auto it = updates_.find(hash);
    return it == updates_.end() ? nullptr : it->second;
}

const LiquidationEvent* EventIndex::liquidation(const std::string& hash) const {
    auto it = liquidations_.find(hash);
    return it == liquidations_.end() ? nullptr : it->second;
}

EventTag EventIndex::tag(const std::string& hash) const {
    if (updates_.count(hash)) return EventTag::update;
    if (liquidations_.count(hash)) return EventTag::liquidation;
    return EventTag::other;
}

PatternClass classify_tags(std::span<const EventTag> tags) {
    std::size_t leading_updates = 0;
    std::size_t liquidations = 0;
    bool in_liquidations = false;
    for (EventTag t : tags) {
        if (t == EventTag::other) continue;
        if (t == EventTag::update) {
            if (in_liquidations) return PatternClass::other;  // update after a liquidation
            ++leading_updates;
        } else {
            in_liquidations = true;
            ++liquidations;
        }
    }
    if (liquidations == 0) return PatternClass::other;
    if (leading_updates == 1) return PatternClass::update_then_liquidation;
    if (leading_updates == 2) return PatternClass::double_update_then_liquidations;
    return PatternClass::other;
}

BundlePattern classify_bundle_pattern(const BundleRecord& bundle, const EventIndex& events) {
    BundlePattern p;
    p.ref = bundle.ref();
    p.tx_hashes = bundle.tx_hashes;
    for (const auto& h : bundle.tx_hashes) {
        const EventTag t = events.tag(h);
        p.tags.push_back(t);
        if (t == EventTag::update) {
            ++p.updates;
            p.feeds.push_back(events.update(h)->feed);
        } else if (t == EventTag::liquidation) {
            ++p.liquidations;
        }
    }
    p.cls = classify_tags(p.tags);
    return p;
}

std::map<std::string, std::uint64_t> feed_pair_counts(std::span<const BundlePattern> patterns) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& p : patterns) {
        for (const auto& f : p.feeds) ++counts[f];
    }
    return counts;
}

namespace {

struct Legs {
    Rational collateral;
    Rational debt;
};

Legs value_legs(const LiquidationEvent& event, const PriceStore& prices, std::uint64_t block) {
    const Quote quote = reference_quote(event.protocol);
    return {event.collateral_amount() * prices.at(block, event.collateral_asset, quote),
            event.debt_amount() * prices.at(block, event.debt_asset, quote)};
}

}  // namespace

LiquidationProfit liquidation_profit(const LiquidationEvent& event, const PriceStore& prices, std::uint64_t block) {
    const Legs legs = value_legs(event, prices, block);
    LiquidationProfit p;
    p.quote_profit = legs.collateral - legs.debt;
    if (event.protocol == Protocol::aave) {
        p.eth = p.quote_profit;
        p.usd = p.quote_profit * prices.at(block, "ETH", Quote::usd);
    } else {
        p.usd = p.quote_profit;
    }
    return p;
}

std::optional<Rational> collateral_ratio(const LiquidationEvent& event, const PriceStore& prices,
                                         std::uint64_t block) {
    const Legs legs = value_legs(event, prices, block);
    if (legs.debt == 0) return std::nullopt;
    return legs.collateral / legs.debt;
}

EnablementCheck enabled_by_update(const LiquidationEvent& event, const PriceStore& prices, std::uint64_t block,
                                  const ThresholdTable& thresholds) {
    if (block == 0) throw InvariantViolation("no block before genesis for " + event.tx_hash);
    const Rational& threshold = thresholds.lookup(event.protocol, event.collateral_asset);
    auto liquidatable = [&](std::uint64_t h) {
        auto ratio = collateral_ratio(event, prices, h);
        return ratio && *ratio < threshold;
    };
    return {liquidatable(block - 1), liquidatable(block)};
}

std::vector<std::string> liquidations_bundled_with_updates(std::span<const BundlePattern> patterns) {
    std::vector<std::string> out;
    for (const auto& p : patterns) {
        if (p.updates == 0) continue;
        for (std::size_t i = 0; i < p.tags.size(); ++i) {
            if (p.tags[i] == EventTag::liquidation) out.push_back(p.tx_hashes[i]);
        }
    }
    return out;
}

ProfitDistributions profit_by_bundling_class(std::span<const LiquidationEvent> liquidations,
                                             std::span<const BundlePattern> patterns, const PriceStore& prices) {
    const auto bundled_list = liquidations_bundled_with_updates(patterns);
    const std::unordered_set<std::string> bundled(bundled_list.begin(), bundled_list.end());
    ProfitDistributions d;
    for (const auto& e : liquidations) {
        if (!e.block_number) throw InvariantViolation("liquidation " + e.tx_hash + " has no block number");
        ProfitPoint point{e.tx_hash, liquidation_profit(e, prices, *e.block_number).usd};
        (bundled.count(e.tx_hash) ? d.bundled : d.unbundled).push_back(std::move(point));
    }
    auto by_profit = [](const ProfitPoint& a, const ProfitPoint& b) {
        if (a.usd != b.usd) return a.usd < b.usd;
        return a.tx_hash < b.tx_hash;
    };
    std::sort(d.bundled.begin(), d.bundled.end(), by_profit);
    std::sort(d.unbundled.begin(), d.unbundled.end(), by_profit);
    return d;
}

Rational empirical_cdf(std::span<const ProfitPoint> sorted, const Rational& x) {
    if (sorted.empty()) return Rational{0};
    auto n = std::count_if(sorted.begin(), sorted.end(), [&](const ProfitPoint& p) { return p.usd <= x; });
    return Rational(static_cast<long long>(n), static_cast<long long>(sorted.size()));
}

}  // namespace prioscope
