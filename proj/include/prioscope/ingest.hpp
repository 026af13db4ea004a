#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "prioscope/chain_model.hpp"

namespace prioscope {

/// What a loader does with a line it cannot parse or validate.
enum class BadLinePolicy { fail_fast, skip_and_count };

template <class T>
struct Loaded {
    std::vector<T> records;
    std::size_t skipped = 0;
};

inline constexpr std::string_view kUnknownPool = "Unknown";

/// Ordered marker rules. The first rule whose marker occurs in a Bitcoin
/// coinbase tag wins; Ethereum blocks need an exact miner address match.
class PoolRegistry {
public:
    PoolRegistry() = default;
    explicit PoolRegistry(std::vector<std::pair<std::string, std::string>> rules)
        : rules_(std::move(rules)) {}

    std::string attribute(const ChainBlock& block) const;
    const std::vector<std::pair<std::string, std::string>>& rules() const { return rules_; }

private:
    std::vector<std::pair<std::string, std::string>> rules_;
};

inline std::string attribute_pool(const ChainBlock& block, const PoolRegistry& registry) {
    return registry.attribute(block);
}

/// Transaction ids labelled as accelerated by an outside source.
/// Iteration order is first occurrence in the file.
class AccelLabelSet {
public:
    AccelLabelSet() = default;
    explicit AccelLabelSet(const std::vector<std::string>& ids);

    bool insert(const std::string& id);
    bool contains(const std::string& id) const { return index_.count(id) != 0; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::vector<std::string> ids_;
    std::unordered_set<std::string> index_;
};

/// Prices keyed by (block, asset, quote); at most one price per key.
class PriceStore {
public:
    /// Returns false if the key already holds a price.
    bool add(PricePoint point);
    std::optional<Rational> find(std::uint64_t block, const std::string& asset, Quote quote) const;
    /// Like find but throws MissingPrice.
    Rational at(std::uint64_t block, const std::string& asset, Quote quote) const;
    const std::vector<PricePoint>& points() const { return points_; }

private:
    std::vector<PricePoint> points_;
    std::map<std::tuple<std::uint64_t, std::string, Quote>, std::size_t> index_;
};

struct EventSet {
    std::vector<LiquidationEvent> liquidations;
    std::vector<OracleUpdate> updates;
};

/// Liquidation thresholds per (protocol, collateral asset); anything not
/// listed uses the default ratio of 1.5.
class ThresholdTable {
public:
    ThresholdTable() = default;
    explicit ThresholdTable(Rational fallback) : fallback_(std::move(fallback)) {}

    void set(Protocol protocol, const std::string& asset, Rational threshold);
    const Rational& lookup(Protocol protocol, const std::string& asset) const;

private:
    Rational fallback_{3, 2};
    std::map<std::pair<Protocol, std::string>, Rational> table_;
};

/// Contract address -> protocol name (DEX census input).
using ContractRegistry = std::unordered_map<std::string, std::string>;

/// Streams blocks one line at a time; memory use is bounded by the largest
/// block rather than the file.
class BlockStream {
public:
    BlockStream(const std::filesystem::path& path, Chain chain,
                BadLinePolicy policy = BadLinePolicy::fail_fast);

    /// Next valid block, or nullopt at end of file. Throws MalformedLine
    /// under fail-fast.
    std::optional<ChainBlock> next();

    std::size_t skipped() const { return skipped_; }
    std::size_t line_no() const { return line_no_; }

private:
    std::string path_;
    std::ifstream in_;
    Chain chain_;
    BadLinePolicy policy_;
    std::size_t line_no_ = 0;
    std::size_t skipped_ = 0;
};

Loaded<ChainBlock> load_blocks(const std::filesystem::path& path, Chain chain,
                               BadLinePolicy policy = BadLinePolicy::fail_fast);
Loaded<BundleRecord> load_bundles(const std::filesystem::path& path,
                                  BadLinePolicy policy = BadLinePolicy::fail_fast);
Loaded<MempoolSnapshot> load_snapshots(const std::filesystem::path& path,
                                       BadLinePolicy policy = BadLinePolicy::fail_fast);

struct LoadedPrices {
    PriceStore store;
    std::size_t skipped = 0;
};
LoadedPrices load_prices(const std::filesystem::path& path,
                         BadLinePolicy policy = BadLinePolicy::fail_fast);

struct LoadedEvents {
    EventSet events;
    std::size_t skipped = 0;
};
/// One file holds both record kinds: lines with "feed" are oracle updates,
/// lines with "protocol" are liquidations.
LoadedEvents load_events(const std::filesystem::path& path,
                         BadLinePolicy policy = BadLinePolicy::fail_fast);

AccelLabelSet load_accel_labels(const std::filesystem::path& path,
                                BadLinePolicy policy = BadLinePolicy::fail_fast);
PoolRegistry load_pool_registry(const std::filesystem::path& path);
ContractRegistry load_contract_registry(const std::filesystem::path& path);
ThresholdTable load_thresholds(const std::filesystem::path& path);

/// Single-line parsers. They throw InvariantViolation (or
/// std::invalid_argument for syntax) without location; the file loaders
/// wrap that into MalformedLine.
ChainBlock parse_block_line(std::string_view line, Chain chain);
BundleRecord parse_bundle_line(std::string_view line);
MempoolSnapshot parse_snapshot_line(std::string_view line);
PricePoint parse_price_line(std::string_view line);
LiquidationEvent parse_liquidation_line(std::string_view line);
OracleUpdate parse_oracle_update_line(std::string_view line);

/// Canonical JSONL form: fixed key order, no whitespace, integers as bare
/// digits of any length.
std::string to_jsonl(const ChainBlock& block);
std::string to_jsonl(const BundleRecord& bundle);
std::string to_jsonl(const MempoolSnapshot& snapshot);
std::string to_jsonl(const PricePoint& point);
std::string to_jsonl(const LiquidationEvent& event);
std::string to_jsonl(const OracleUpdate& update);

}  // namespace prioscope
