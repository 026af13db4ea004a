#include "prioscope/priometrics.hpp"

#include <chrono>
#include <stdexcept>

#include <fmt/format.h>

#include "prioscope/errors.hpp"
#include "prioscope/parallel.hpp"

namespace prioscope {

// ---------------------------------------------------------------------------
// CPFP exclusion

CpfpPartition cpfp_partition(const ChainBlock& block) {
    const auto& txs = block.btc_txs();
    std::unordered_map<std::string_view, std::size_t> by_id;
    for (std::size_t i = 1; i < txs.size(); ++i) by_id.emplace(txs[i].txid, i);

    std::vector<bool> linked(txs.size(), false);
    for (std::size_t i = 1; i < txs.size(); ++i) {
        for (const auto& in : txs[i].inputs) {
            auto it = by_id.find(in.txid);
            if (it == by_id.end() || it->second == i) continue;
            linked[i] = true;
            linked[it->second] = true;
        }
    }

    CpfpPartition out;
    for (std::size_t i = 1; i < txs.size(); ++i) (linked[i] ? out.excluded : out.retained).push_back(i);
    return out;
}

// ---------------------------------------------------------------------------
// position reports

Rational signed_position_error(std::uint32_t observed, PredictedRange predicted, std::uint32_t n) {
    std::int64_t d = 0;
    if (observed < predicted.lo) d = static_cast<std::int64_t>(predicted.lo) - observed;
    else if (observed > predicted.hi) d = static_cast<std::int64_t>(predicted.hi) - observed;
    return Rational(100 * d, n);
}

std::vector<FeeRate> btc_fee_keys(const ChainBlock& block, std::span<const std::size_t> retained) {
    const auto& txs = block.btc_txs();
    std::vector<FeeRate> keys;
    keys.reserve(retained.size());
    for (auto i : retained) keys.push_back(txs[i].fee_rate());
    return keys;
}

std::vector<Wei> eth_tip_keys(const ChainBlock& block, std::span<const std::size_t> retained) {
    const auto& txs = block.eth_txs();
    const Wei& base = block.base_fee_per_gas.value();
    std::vector<Wei> keys;
    keys.reserve(retained.size());
    for (auto i : retained) keys.push_back(miner_tip_per_gas(txs[i], base));
    return keys;
}

namespace {

template <class Key>
std::vector<PositionReport> reports_from_keys(const ChainBlock& block, std::span<const std::size_t> retained,
                                              const std::vector<Key>& keys, const std::string& pool) {
    auto predicted = predict_positions<Key>(keys);
    const auto n = static_cast<std::uint32_t>(retained.size());
    std::vector<PositionReport> out;
    out.reserve(retained.size());
    for (std::uint32_t k = 0; k < n; ++k) {
        PositionReport r;
        const std::size_t idx = retained[k];
        if (block.chain() == Chain::btc) r.txid = block.btc_txs()[idx].txid;
        else r.txid = block.eth_txs()[idx].hash;
        r.height = block.height;
        r.pool = pool;
        r.observed = k + 1;
        r.predicted = predicted[k];
        r.sppe = signed_position_error(r.observed, r.predicted, n);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

std::vector<PositionReport> position_report(const ChainBlock& block, std::span<const std::size_t> retained,
                                            const std::string& pool) {
    if (retained.empty()) throw EmptyBlock(block.height);
    if (block.chain() == Chain::btc) return reports_from_keys(block, retained, btc_fee_keys(block, retained), pool);
    return reports_from_keys(block, retained, eth_tip_keys(block, retained), pool);
}

Rational block_ppe(std::span<const PositionReport> reports) {
    if (reports.empty()) return Rational{0};
    Rational sum{0};
    for (const auto& r : reports) sum += r.ppe();
    return sum / static_cast<long long>(reports.size());
}

BlockAnalysis analyze_block(const ChainBlock& block, const PoolRegistry& registry) {
    BlockAnalysis a;
    a.height = block.height;
    a.timestamp = block.timestamp;
    a.pool = registry.attribute(block);
    std::vector<std::size_t> retained;
    if (block.chain() == Chain::btc) {
        auto part = cpfp_partition(block);
        a.cpfp_excluded = part.excluded.size();
        retained = std::move(part.retained);
    } else {
        retained.resize(block.tx_count());
        std::iota(retained.begin(), retained.end(), std::size_t{0});
    }
    if (retained.empty()) {
        a.empty = true;
        return a;
    }
    a.reports = position_report(block, retained, a.pool);
    return a;
}

// ---------------------------------------------------------------------------
// flags

namespace {

void check_threshold(const Rational& threshold) {
    if (threshold <= 0 || threshold > 100) throw std::invalid_argument("threshold must be in (0, 100]");
}

}  // namespace

std::vector<std::string> flag_accelerated(std::span<const PositionReport> reports, const Rational& threshold) {
    check_threshold(threshold);
    std::vector<std::string> out;
    for (const auto& r : reports) {
        if (r.sppe >= threshold) out.push_back(r.txid);
    }
    return out;
}

std::vector<PoolFlagShare> pool_flag_shares(std::span<const BlockAnalysis> blocks, const Rational& threshold) {
    check_threshold(threshold);
    std::map<std::string, PoolFlagShare> by_pool;
    for (const auto& b : blocks) {
        auto& entry = by_pool[b.pool];
        entry.pool = b.pool;
        ++entry.blocks;
        const bool any = std::any_of(b.reports.begin(), b.reports.end(),
                                     [&](const PositionReport& r) { return r.sppe >= threshold; });
        if (any) ++entry.flagged_blocks;
    }
    std::vector<PoolFlagShare> out;
    for (auto& [_, entry] : by_pool) {
        entry.share_pct = percent(Rational(entry.flagged_blocks), Rational(entry.blocks));
        out.push_back(std::move(entry));
    }
    return out;
}

// ---------------------------------------------------------------------------
// private inclusions

std::unordered_map<std::string, std::int64_t> first_seen_times(std::span<const MempoolSnapshot> snapshots) {
    std::unordered_map<std::string, std::int64_t> first;
    for (const auto& s : snapshots) {
        for (const auto& id : s.pending) {
            auto [it, inserted] = first.emplace(id, s.timestamp);
            if (!inserted && s.timestamp < it->second) it->second = s.timestamp;
        }
    }
    return first;
}

BlockPrivateTxs private_txs_in_block(const ChainBlock& block,
                                     const std::unordered_map<std::string, std::int64_t>& first_seen,
                                     const std::string& pool) {
    BlockPrivateTxs out;
    out.height = block.height;
    out.pool = pool;
    auto check = [&](const std::string& id) {
        ++out.considered;
        auto it = first_seen.find(id);
        if (it == first_seen.end() || it->second >= block.timestamp) out.private_txs.push_back(id);
    };
    if (block.chain() == Chain::btc) {
        const auto& txs = block.btc_txs();
        for (std::size_t i = 1; i < txs.size(); ++i) check(txs[i].txid);
    } else {
        for (const auto& tx : block.eth_txs()) check(tx.hash);
    }
    return out;
}

PrivateInclusionResult detect_private_inclusions(std::span<const ChainBlock> blocks,
                                                 std::span<const MempoolSnapshot> snapshots,
                                                 const PoolRegistry& registry, unsigned workers) {
    const auto first_seen = first_seen_times(snapshots);
    std::int64_t earliest = 0;
    bool any_snapshot = false;
    for (const auto& s : snapshots) {
        if (!any_snapshot || s.timestamp < earliest) earliest = s.timestamp;
        any_snapshot = true;
    }

    auto per_block = parallel_map(blocks.size(), workers, [&](std::size_t i) -> std::optional<BlockPrivateTxs> {
        const auto& block = blocks[i];
        if (!any_snapshot || earliest >= block.timestamp) return std::nullopt;
        return private_txs_in_block(block, first_seen, registry.attribute(block));
    });

    PrivateInclusionResult result;
    for (auto& entry : per_block) {
        if (!entry) {
            ++result.uncovered_blocks;
            continue;
        }
        auto& counts = result.per_pool[entry->pool];
        ++counts.blocks;
        counts.txs += entry->considered;
        counts.private_txs += entry->private_txs.size();
        result.blocks.push_back(std::move(*entry));
    }
    return result;
}

// ---------------------------------------------------------------------------
// pool shares

std::string_view to_string(Window window) {
    switch (window) {
        case Window::day: return "day";
        case Window::week: return "week";
        case Window::month: return "month";
    }
    return "day";
}

std::optional<Window> parse_window(std::string_view text) {
    if (text == "day") return Window::day;
    if (text == "week") return Window::week;
    if (text == "month") return Window::month;
    return std::nullopt;
}

std::int64_t window_start(std::int64_t timestamp, Window window) {
    using namespace std::chrono;
    const sys_days day = floor<days>(sys_seconds{seconds{timestamp}});
    sys_days start = day;
    switch (window) {
        case Window::day: break;
        case Window::week: start = day - (weekday{day} - Monday); break;
        case Window::month: {
            const year_month_day ymd{day};
            start = sys_days{ymd.year() / ymd.month() / 1};
            break;
        }
    }
    return duration_cast<seconds>(start.time_since_epoch()).count();
}

std::string utc_date(std::int64_t timestamp) {
    using namespace std::chrono;
    const year_month_day ymd{floor<days>(sys_seconds{seconds{timestamp}})};
    return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                       static_cast<unsigned>(ymd.day()));
}

Rational PoolShareWindow::subset_share(std::int64_t start, const std::set<std::string>& pools) const {
    auto total = totals.find(start);
    if (total == totals.end()) return Rational{0};
    std::uint64_t in_subset = 0;
    for (const auto& row : rows) {
        if (row.window_start == start && pools.count(row.pool)) in_subset += row.blocks;
    }
    return percent(Rational(in_subset), Rational(total->second));
}

PoolShareWindow pool_shares(std::span<const ChainBlock> blocks, const PoolRegistry& registry, Window window) {
    if (blocks.empty()) throw std::invalid_argument("pool shares need at least one block");
    std::map<std::pair<std::int64_t, std::string>, std::uint64_t> counts;
    PoolShareWindow out;
    out.window = window;
    for (const auto& b : blocks) {
        const auto start = window_start(b.timestamp, window);
        ++counts[{start, registry.attribute(b)}];
        ++out.totals[start];
    }
    for (const auto& [key, n] : counts) {
        out.rows.push_back({key.first, key.second, n, percent(Rational(n), Rational(out.totals.at(key.first)))});
    }
    return out;
}

Rational combined_share(std::span<const Rational> shares) {
    return std::accumulate(shares.begin(), shares.end(), Rational{0});
}

// ---------------------------------------------------------------------------
// delay / position statistics

SummaryStats summarize(std::vector<Rational> values) {
    SummaryStats s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    auto quantile = [&](const Rational& q) {
        const Rational pos = q * static_cast<long long>(values.size() - 1);
        const BigInt lower_big = numerator(pos) / denominator(pos);
        const auto lower = static_cast<std::size_t>(lower_big);
        const Rational frac = pos - Rational(lower_big);
        if (lower + 1 >= values.size()) return values.back();
        return values[lower] + frac * (values[lower + 1] - values[lower]);
    };
    s.min = values.front();
    s.max = values.back();
    s.p25 = quantile(Rational(1, 4));
    s.median = quantile(Rational(1, 2));
    s.p75 = quantile(Rational(3, 4));
    s.mean = std::accumulate(values.begin(), values.end(), Rational{0}) / static_cast<long long>(values.size());
    return s;
}

DelayPositionStats delay_position_stats(const std::unordered_set<std::string>& flagged,
                                        const std::unordered_map<std::string, std::int64_t>& reference_time,
                                        std::span<const ChainBlock> blocks) {
    std::vector<const ChainBlock*> by_height;
    by_height.reserve(blocks.size());
    for (const auto& b : blocks) by_height.push_back(&b);
    std::stable_sort(by_height.begin(), by_height.end(),
                     [](const ChainBlock* a, const ChainBlock* b) { return a->height < b->height; });

    // Running maximum of timestamps is monotone, and the first block where it
    // reaches t is the first block (by height) whose own timestamp is >= t.
    std::vector<std::int64_t> running_max(by_height.size());
    for (std::size_t i = 0; i < by_height.size(); ++i) {
        running_max[i] = i == 0 ? by_height[i]->timestamp : std::max(running_max[i - 1], by_height[i]->timestamp);
    }

    struct Inclusion {
        const ChainBlock* block;
        std::size_t position;  // 1-based
    };
    std::unordered_map<std::string, Inclusion> included;
    for (const ChainBlock* b : by_height) {
        auto note = [&](const std::string& id, std::size_t pos) {
            if (reference_time.count(id)) included.emplace(id, Inclusion{b, pos});
        };
        if (b->chain() == Chain::btc) {
            const auto& txs = b->btc_txs();
            for (std::size_t i = 0; i < txs.size(); ++i) note(txs[i].txid, i + 1);
        } else {
            const auto& txs = b->eth_txs();
            for (std::size_t i = 0; i < txs.size(); ++i) note(txs[i].hash, i + 1);
        }
    }

    std::vector<Rational> delays[2], percentiles[2];
    DelayPositionStats out;
    DelayPositionGroup* groups[2] = {&out.accelerated, &out.non_accelerated};

    // Deterministic order regardless of hash-map iteration.
    std::vector<std::pair<std::string, std::int64_t>> ordered(reference_time.begin(), reference_time.end());
    std::sort(ordered.begin(), ordered.end());
    for (const auto& [id, t] : ordered) {
        const int g = flagged.count(id) ? 0 : 1;
        auto inc = included.find(id);
        if (inc == included.end()) {
            groups[g]->unconfirmed.push_back(id);
            continue;
        }
        auto ref = std::lower_bound(running_max.begin(), running_max.end(), t);
        if (ref == running_max.end()) {
            groups[g]->unreferenced.push_back(id);
            continue;
        }
        const auto ref_height = by_height[static_cast<std::size_t>(ref - running_max.begin())]->height;
        const auto& block = *inc->second.block;
        const std::int64_t delay =
            static_cast<std::int64_t>(block.height) - static_cast<std::int64_t>(ref_height) + 1;
        delays[g].push_back(Rational(delay));
        percentiles[g].push_back(percent(Rational(static_cast<long long>(inc->second.position)),
                                         Rational(static_cast<long long>(block.tx_count()))));
    }
    for (int g = 0; g < 2; ++g) {
        groups[g]->delay = summarize(std::move(delays[g]));
        groups[g]->percentile = summarize(std::move(percentiles[g]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// value transferred

ValueTransferred value_transferred(const std::unordered_set<std::string>& flagged,
                                   std::span<const ChainBlock> blocks) {
    ValueTransferred v;
    for (const auto& b : blocks) {
        const auto& txs = b.btc_txs();
        for (std::size_t i = 1; i < txs.size(); ++i) {
            v.total_sat += txs[i].total_output_value;
            if (flagged.count(txs[i].txid)) v.flagged_sat += txs[i].total_output_value;
        }
    }
    v.share_pct = percent(Rational(v.flagged_sat), Rational(v.total_sat));
    return v;
}

// ---------------------------------------------------------------------------
// label cross-check

LabelConfusion accel_label_crosscheck(std::span<const std::string> flagged, const AccelLabelSet& labels) {
    LabelConfusion c;
    std::unordered_set<std::string> flagged_set(flagged.begin(), flagged.end());
    for (const auto& id : flagged_set) {
        if (labels.contains(id)) ++c.flagged_and_labeled;
        else ++c.flagged_only;
    }
    for (const auto& id : labels.ids()) {
        if (!flagged_set.count(id)) ++c.labeled_only;
    }
    return c;
}

std::vector<PoolShareRow> accel_share_timeseries(const AccelLabelSet& txids, std::span<const ChainBlock> blocks,
                                                 const PoolRegistry& registry, Window window) {
    std::map<std::pair<std::int64_t, std::string>, std::uint64_t> counts;
    std::map<std::int64_t, std::uint64_t> totals;
    for (const auto& b : blocks) {
        std::uint64_t hits = 0;
        if (b.chain() == Chain::btc) {
            for (const auto& tx : b.btc_txs()) hits += txids.contains(tx.txid);
        } else {
            for (const auto& tx : b.eth_txs()) hits += txids.contains(tx.hash);
        }
        if (hits == 0) continue;
        const auto start = window_start(b.timestamp, window);
        counts[{start, registry.attribute(b)}] += hits;
        totals[start] += hits;
    }
    std::vector<PoolShareRow> out;
    for (const auto& [key, n] : counts) {
        out.push_back({key.first, key.second, n, percent(Rational(n), Rational(totals.at(key.first)))});
    }
    return out;
}

}  // namespace prioscope
