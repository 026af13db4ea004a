#include "prioscope/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "prioscope/bundles.hpp"
#include "prioscope/csv.hpp"
#include "prioscope/defi.hpp"
#include "prioscope/errors.hpp"
#include "prioscope/ingest.hpp"
#include "prioscope/parallel.hpp"
#include "prioscope/priometrics.hpp"
#include "prioscope/synth.hpp"

namespace prioscope::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string blocks, bundles, snapshots, events, prices, pools, contracts, labels, thresholds, spec, subset;
    std::string chain = "btc";
    std::string threshold = "99";
    std::string window;
    std::string out;
    bool skip_bad = false;
    bool force = false;
    bool economics = false;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool chain_given = false;
    unsigned workers = 0;
};

std::shared_ptr<spdlog::logger> logger() {
    static auto log = [] {
        auto l = std::make_shared<spdlog::logger>("prioscope", std::make_shared<spdlog::sinks::stderr_sink_mt>());
        l->set_pattern("[%l] %v");
        return l;
    }();
    const char* env = std::getenv("PRIOSCOPE_LOG");
    const std::string level = env ? env : "info";
    if (level == "debug") log->set_level(spdlog::level::debug);
    else if (level == "error") log->set_level(spdlog::level::err);
    else log->set_level(spdlog::level::info);
    return log;
}

BadLinePolicy policy(const Options& o) {
    return o.skip_bad ? BadLinePolicy::skip_and_count : BadLinePolicy::fail_fast;
}

void note_skipped(const std::string& path, std::size_t skipped) {
    if (skipped) logger()->warn("{}: skipped {} bad line(s)", path, skipped);
}

Chain chain_of(const Options& o) { return *parse_chain(o.chain); }

Rational threshold_of(const Options& o) {
    Rational t;
    try {
        t = parse_decimal(o.threshold);
    } catch (const std::invalid_argument&) {
        throw UsageError("--threshold: not a number: " + o.threshold);
    }
    if (t <= 0 || t > 100) throw UsageError("--threshold must be in (0, 100], got " + o.threshold);
    return t;
}

Window window_of(const Options& o, Window fallback) {
    if (o.window.empty()) return fallback;
    return *parse_window(o.window);
}

/// Creates the output directory and refuses to replace existing reports
/// unless --force.
fs::path prepare_out(const Options& o, const std::vector<std::string>& files) {
    const fs::path dir(o.out);
    if (fs::exists(dir) && !fs::is_directory(dir)) throw UsageError("--out: not a directory: " + o.out);
    for (const auto& f : files) {
        if (fs::exists(dir / f) && !o.force)
            throw UsageError("--out: " + (dir / f).string() + " exists; pass --force to overwrite");
    }
    fs::create_directories(dir);
    return dir;
}

PoolRegistry registry_of(const Options& o) {
    return o.pools.empty() ? PoolRegistry{} : load_pool_registry(o.pools);
}

std::vector<ChainBlock> blocks_of(const Options& o, Chain chain) {
    auto loaded = load_blocks(o.blocks, chain, policy(o));
    note_skipped(o.blocks, loaded.skipped);
    logger()->info("{}: {} block(s)", o.blocks, loaded.records.size());
    return std::move(loaded.records);
}

std::string str(std::uint64_t v) { return std::to_string(v); }
std::string bool_str(bool v) { return v ? "true" : "false"; }
std::string fraction(const Rational& v) { return format_fixed(v, 6); }

// ---------------------------------------------------------------------------
// sppe

constexpr std::size_t kChunkBlocks = 2048;

int cmd_sppe(const Options& o) {
    const Chain chain = chain_of(o);
    const Rational threshold = threshold_of(o);
    std::vector<std::string> files{"sppe.csv", "block_ppe.csv", "pool_flags.csv", "flagged.txt"};
    if (chain == Chain::btc) files.push_back("value_transferred.csv");
    const fs::path dir = prepare_out(o, files);
    const PoolRegistry registry = registry_of(o);

    CsvWriter sppe(dir / "sppe.csv", {"txid", "height", "pool", "p_obs", "lo", "hi", "ppe", "sppe"});
    CsvWriter block_ppe_csv(dir / "block_ppe.csv", {"height", "pool", "ranked", "cpfp_excluded", "ppe"});
    std::ofstream flagged_out(dir / "flagged.txt", std::ios::binary | std::ios::trunc);
    if (!flagged_out) throw Error("cannot write " + (dir / "flagged.txt").string());

    std::vector<BlockAnalysis> kept;  // reports trimmed to flagged ones
    BigInt flagged_sat = 0, total_sat = 0;
    std::size_t flagged_count = 0;
    BlockStream stream(o.blocks, chain, policy(o));
    std::vector<ChainBlock> chunk;
    auto flush = [&] {
        auto analyses = parallel_map(chunk.size(), o.workers,
                                     [&](std::size_t i) { return analyze_block(chunk[i], registry); });
        std::unordered_set<std::string> chunk_flags;
        for (auto& a : analyses) {
            for (const auto& r : a.reports) {
                sppe.row({r.txid, str(r.height), r.pool, str(r.observed), str(r.predicted.lo), str(r.predicted.hi),
                          pct(r.ppe()), pct(r.sppe)});
            }
            block_ppe_csv.row({str(a.height), a.pool, str(a.reports.size()), str(a.cpfp_excluded),
                               pct(block_ppe(a.reports))});
            auto flags = flag_accelerated(a.reports, threshold);
            for (const auto& id : flags) {
                flagged_out << id << '\n';
                chunk_flags.insert(id);
            }
            flagged_count += flags.size();
            std::erase_if(a.reports, [&](const PositionReport& r) { return r.sppe < threshold; });
            kept.push_back(std::move(a));
        }
        if (chain == Chain::btc) {
            auto v = value_transferred(chunk_flags, chunk);
            flagged_sat += v.flagged_sat;
            total_sat += v.total_sat;
        }
        chunk.clear();
    };
    while (auto block = stream.next()) {
        chunk.push_back(std::move(*block));
        if (chunk.size() == kChunkBlocks) flush();
    }
    flush();
    note_skipped(o.blocks, stream.skipped());

    CsvWriter pools(dir / "pool_flags.csv", {"pool", "blocks", "flagged_blocks", "share_pct"});
    for (const auto& s : pool_flag_shares(kept, threshold))
        pools.row({s.pool, str(s.blocks), str(s.flagged_blocks), pct(s.share_pct)});
    if (chain == Chain::btc) {
        CsvWriter value(dir / "value_transferred.csv", {"flagged_sat", "total_sat", "share_pct"});
        value.row({to_string(flagged_sat), to_string(total_sat), pct(percent(flagged_sat, total_sat))});
        value.close();
    }
    flagged_out.close();
    if (!flagged_out) throw Error("failed writing flagged.txt");
    sppe.close();
    block_ppe_csv.close();
    pools.close();
    logger()->info("{} block(s), {} flagged transaction(s) at threshold {}", kept.size(), flagged_count,
                   o.threshold);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// pools

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int cmd_pools(const Options& o) {
    const Window window = window_of(o, Window::day);
    std::vector<std::string> files{"pool_shares.csv"};
    if (!o.subset.empty()) files.push_back("subset_shares.csv");
    const fs::path dir = prepare_out(o, files);
    const auto blocks = blocks_of(o, chain_of(o));
    if (blocks.empty()) throw Error(o.blocks + ": no blocks");
    const auto shares = pool_shares(blocks, registry_of(o), window);

    CsvWriter csv(dir / "pool_shares.csv", {"window_start", "pool", "blocks", "share_pct"});
    for (const auto& r : shares.rows) csv.row({utc_date(r.window_start), r.pool, str(r.blocks), pct(r.share_pct)});
    csv.close();
    if (!o.subset.empty()) {
        const auto list = split_list(o.subset);
        const std::set<std::string> members(list.begin(), list.end());
        std::string label;
        for (const auto& p : members) label += (label.empty() ? "" : "+") + p;
        CsvWriter sub(dir / "subset_shares.csv", {"window_start", "pools", "share_pct"});
        for (const auto& [start, total] : shares.totals) {
            (void)total;
            sub.row({utc_date(start), label, pct(shares.subset_share(start, members))});
        }
        sub.close();
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// private

int cmd_private(const Options& o) {
    const fs::path dir = prepare_out(o, {"private.csv", "private_pools.csv"});
    const auto blocks = blocks_of(o, chain_of(o));
    auto snaps = load_snapshots(o.snapshots, policy(o));
    note_skipped(o.snapshots, snaps.skipped);
    const auto result = detect_private_inclusions(blocks, snaps.records, registry_of(o), o.workers);
    if (result.uncovered_blocks)
        logger()->warn("{} block(s) precede every snapshot and were not classified", result.uncovered_blocks);

    CsvWriter csv(dir / "private.csv", {"height", "pool", "txid"});
    for (const auto& b : result.blocks) {
        for (const auto& id : b.private_txs) csv.row({str(b.height), b.pool, id});
    }
    csv.close();
    CsvWriter pools(dir / "private_pools.csv", {"pool", "blocks", "txs", "private_txs", "private_pct"});
    for (const auto& [pool, c] : result.per_pool) {
        pools.row({pool, str(c.blocks), str(c.txs), str(c.private_txs),
                   pct(percent(Rational(c.private_txs), Rational(c.txs)))});
    }
    pools.close();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bundles

void write_tx_economics(const fs::path& path, std::span<const ChainBlock> blocks) {
    CsvWriter csv(path, {"block_number", "position", "tx_hash", "gas_used", "base_fee_gwei", "max_fee_gwei",
                         "max_priority_fee_gwei", "gas_price_gwei", "fee_paid_eth", "miner_reward_wei"});
    for (const auto& b : blocks) {
        const Wei& base = *b.base_fee_per_gas;
        std::uint64_t pos = 0;
        for (const auto& tx : b.eth_txs()) {
            ++pos;
            csv.row({str(b.height), str(pos), tx.hash, str(tx.gas_used), format_gwei(base),
                     format_gwei(tx.max_fee_per_gas), format_gwei(tx.max_priority_fee_per_gas),
                     format_gwei(effective_gas_price(tx, base)), format_ether(tx_fee_paid(tx, base)),
                     to_string(tx_miner_reward(tx, base))});
        }
    }
    csv.close();
}

int cmd_bundles(const Options& o) {
    std::vector<std::string> files;
    if (!o.bundles.empty()) {
        files = {"bundle_econ.csv", "h2.csv", "h3.csv", "fee_gap_cdf.csv", "bundle_stats.csv"};
        if (!o.contracts.empty()) files.push_back("dex_census.csv");
    } else if (!o.economics) {
        throw UsageError("--bundles is required unless --economics is given");
    }
    if (o.economics) files.push_back("tx_econ.csv");
    const fs::path dir = prepare_out(o, files);
    const auto blocks = blocks_of(o, Chain::eth);
    if (o.economics) write_tx_economics(dir / "tx_econ.csv", blocks);
    if (o.bundles.empty()) return kExitOk;

    auto loaded = load_bundles(o.bundles, policy(o));
    note_skipped(o.bundles, loaded.skipped);
    const EthBlockIndex index(blocks);

    struct Row {
        std::optional<BundleEconomics> econ;
        std::optional<bool> h2, h3;
        std::string error;
    };
    const auto& bundles = loaded.records;
    auto rows = parallel_map(bundles.size(), o.workers, [&](std::size_t i) {
        Row r;
        const auto& b = bundles[i];
        const ChainBlock* block = index.block(b.block_number);
        try {
            if (!block) throw UnresolvedTx(b.tx_hashes.front() + " (block " + str(b.block_number) + " absent)");
            r.econ = bundle_economics(b, *block);
            if (b.tx_hashes.size() == 2) r.h2 = detect_h2(b, *block);
            if (b.tx_hashes.size() == 3) r.h3 = detect_h3_sandwich(b, *block);
        } catch (const Error& e) {
            r.error = e.what();
        }
        return r;
    });

    std::size_t unresolved = 0;
    std::vector<BundleRecord> resolved;
    std::vector<BundleRecord> matched;
    CsvWriter econ(dir / "bundle_econ.csv", {"block_number", "bundle_index", "tag", "size", "total_gas",
                                             "total_reward_wei", "actual_fee_gwei"});
    CsvWriter h2(dir / "h2.csv", {"block_number", "bundle_index", "match"});
    CsvWriter h3(dir / "h3.csv", {"block_number", "bundle_index", "match"});
    for (std::size_t i = 0; i < bundles.size(); ++i) {
        const auto& b = bundles[i];
        const auto& r = rows[i];
        if (!r.error.empty()) {
            if (!o.skip_bad)
                throw Error(o.bundles + ": bundle (" + str(b.block_number) + ", " + str(b.bundle_index) +
                            "): " + r.error);
            ++unresolved;
            continue;
        }
        resolved.push_back(b);
        econ.row({str(b.block_number), str(b.bundle_index), std::string(to_string(b.tag)), str(b.tx_hashes.size()),
                  to_string(r.econ->total_gas), to_string(r.econ->total_reward),
                  format_gwei(r.econ->actual_max_priority_fee())});
        if (r.h2) h2.row({str(b.block_number), str(b.bundle_index), bool_str(*r.h2)});
        if (r.h3) h3.row({str(b.block_number), str(b.bundle_index), bool_str(*r.h3)});
        if ((r.h2 && *r.h2) || (r.h3 && *r.h3)) matched.push_back(b);
    }
    econ.close();
    h2.close();
    h3.close();
    if (unresolved) logger()->warn("{}: skipped {} unresolvable bundle(s)", o.bundles, unresolved);

    const FeeGapCdf gaps = fee_gap_distribution(matched, index);
    CsvWriter cdf(dir / "fee_gap_cdf.csv", {"gap_gwei", "cumulative_fraction"});
    for (std::size_t i = 0; i < gaps.gaps.size(); ++i) {
        const Rational g = gaps.gaps[i].gap();
        if (i + 1 < gaps.gaps.size() && gaps.gaps[i + 1].gap() == g) continue;
        cdf.row({format_gwei(g), fraction(Rational(static_cast<long long>(i + 1),
                                                   static_cast<long long>(gaps.gaps.size())))});
    }
    cdf.close();

    const BundleStats s = bundle_stats(resolved, blocks, registry_of(o));
    CsvWriter stats(dir / "bundle_stats.csv", {"metric", "value"});
    auto dist = [&](const std::string& name, const DistributionSummary& d) {
        stats.row({name + "_count", str(d.count)});
        stats.row({name + "_min", format_fixed(d.min, 2)});
        stats.row({name + "_mean", format_fixed(d.mean, 2)});
        stats.row({name + "_median", format_fixed(d.median, 2)});
        stats.row({name + "_max", format_fixed(d.max, 2)});
        stats.row({name + "_stddev", fmt::format("{:.2f}", d.stddev)});
    };
    dist("bundle_size", s.bundle_size);
    dist("bundles_per_block", s.bundles_per_block);
    stats.row({"blocks_total", str(s.blocks_total)});
    stats.row({"blocks_with_bundles", str(s.blocks_with_bundles)});
    stats.row({"blocks_with_bundles_pct", pct(s.blocks_with_bundles_pct)});
    for (const auto& [pool, share] : s.pool_share_pct) stats.row({"pool_share_pct:" + pool, pct(share)});
    for (const auto& [tag, share] : s.tag_share_pct)
        stats.row({"tag_share_pct:" + std::string(to_string(tag)), pct(share)});
    stats.row({"bundle_txs", str(s.bundle_txs)});
    stats.row({"failed_bundle_txs", str(s.failed_bundle_txs)});
    stats.row({"failed_share_pct", pct(s.failed_share_pct)});
    stats.close();

    if (!o.contracts.empty()) {
        const auto contracts = load_contract_registry(o.contracts);
        CsvWriter dex(dir / "dex_census.csv", {"protocol", "bundles", "txs"});
        for (const auto& r : dex_call_census(resolved, index, contracts))
            dex.row({r.protocol, str(r.bundles), str(r.txs)});
        dex.close();
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// defi

int cmd_defi(const Options& o) {
    const fs::path dir =
        prepare_out(o, {"patterns.csv", "profits.csv", "enabled.csv", "feed_pairs.csv", "profit_cdf.csv"});
    auto events = load_events(o.events, policy(o));
    note_skipped(o.events, events.skipped);
    auto prices = load_prices(o.prices, policy(o));
    note_skipped(o.prices, prices.skipped);
    auto bundles = load_bundles(o.bundles, policy(o));
    note_skipped(o.bundles, bundles.skipped);
    const ThresholdTable thresholds = o.thresholds.empty() ? ThresholdTable{} : load_thresholds(o.thresholds);

    std::vector<ChainBlock> blocks;
    if (!o.blocks.empty()) blocks = blocks_of(o, Chain::eth);
    const EthBlockIndex index(blocks);
    std::unordered_map<std::string, std::uint64_t> bundle_block;
    for (const auto& b : bundles.records) {
        for (const auto& h : b.tx_hashes) bundle_block.emplace(h, b.block_number);
    }
    for (auto& e : events.events.liquidations) {
        if (e.block_number) continue;
        if (auto it = bundle_block.find(e.tx_hash); it != bundle_block.end()) e.block_number = it->second;
        else if (auto n = index.block_of(e.tx_hash)) e.block_number = *n;
        else throw InvariantViolation("no block number for liquidation " + e.tx_hash);
    }

    const EventIndex event_index(events.events);
    std::vector<BundlePattern> patterns;
    for (const auto& b : bundles.records) {
        auto p = classify_bundle_pattern(b, event_index);
        if (p.updates + p.liquidations > 0) patterns.push_back(std::move(p));
    }

    CsvWriter pat(dir / "patterns.csv",
                  {"block_number", "bundle_index", "size", "updates", "liquidations", "class", "feeds"});
    for (const auto& p : patterns) {
        std::string feeds;
        for (const auto& f : p.feeds) feeds += (feeds.empty() ? "" : ";") + f;
        pat.row({str(p.ref.block_number), str(p.ref.bundle_index), str(p.tx_hashes.size()), str(p.updates),
                 str(p.liquidations), std::string(to_string(p.cls)), feeds});
    }
    pat.close();

    CsvWriter pairs(dir / "feed_pairs.csv", {"feed", "updates"});
    for (const auto& [feed, n] : feed_pair_counts(patterns)) pairs.row({feed, str(n)});
    pairs.close();

    const auto bundled_list = liquidations_bundled_with_updates(patterns);
    const std::unordered_set<std::string> bundled(bundled_list.begin(), bundled_list.end());
    const auto& liqs = events.events.liquidations;
    auto profits = parallel_map(liqs.size(), o.workers, [&](std::size_t i) {
        return liquidation_profit(liqs[i], prices.store, *liqs[i].block_number);
    });
    CsvWriter prof(dir / "profits.csv", {"tx_hash", "protocol", "bundled_with_update", "profit_usd"});
    for (std::size_t i = 0; i < liqs.size(); ++i) {
        prof.row({liqs[i].tx_hash, std::string(to_string(liqs[i].protocol)),
                  bool_str(bundled.count(liqs[i].tx_hash) != 0), format_fixed(profits[i].usd, 2)});
    }
    prof.close();

    CsvWriter en(dir / "enabled.csv", {"tx_hash", "protocol", "block_number", "liquidatable_before",
                                       "liquidatable_at", "enabled_by_update"});
    for (const auto& e : liqs) {
        if (!bundled.count(e.tx_hash)) continue;
        const auto c = enabled_by_update(e, prices.store, *e.block_number, thresholds);
        en.row({e.tx_hash, std::string(to_string(e.protocol)), str(*e.block_number), bool_str(c.liquidatable_before),
                bool_str(c.liquidatable_at), bool_str(c.enabled())});
    }
    en.close();

    const auto dists = profit_by_bundling_class(liqs, patterns, prices.store);
    CsvWriter cdf(dir / "profit_cdf.csv", {"class", "profit_usd", "cumulative_fraction"});
    auto emit = [&](const char* name, const std::vector<ProfitPoint>& sorted) {
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (i + 1 < sorted.size() && sorted[i + 1].usd == sorted[i].usd) continue;
            cdf.row({name, format_fixed(sorted[i].usd, 2), fraction(empirical_cdf(sorted, sorted[i].usd))});
        }
    };
    emit("bundled_with_update", dists.bundled);
    emit("other", dists.unbundled);
    cdf.close();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// delay

int cmd_delay(const Options& o) {
    const Chain chain = chain_of(o);
    const fs::path dir = prepare_out(o, {"delay_stats.csv"});
    const auto blocks = blocks_of(o, chain);
    auto snaps = load_snapshots(o.snapshots, policy(o));
    note_skipped(o.snapshots, snaps.skipped);

    std::unordered_set<std::string> flagged;
    if (!o.labels.empty()) {
        const auto labels = load_accel_labels(o.labels, policy(o));
        flagged.insert(labels.ids().begin(), labels.ids().end());
    } else {
        const Rational threshold = threshold_of(o);
        const PoolRegistry registry = registry_of(o);
        auto analyses = parallel_map(blocks.size(), o.workers,
                                     [&](std::size_t i) { return analyze_block(blocks[i], registry); });
        for (const auto& a : analyses) {
            for (const auto& id : flag_accelerated(a.reports, threshold)) flagged.insert(id);
        }
    }
    const auto reference = first_seen_times(snaps.records);
    const auto stats = delay_position_stats(flagged, reference, blocks);

    CsvWriter csv(dir / "delay_stats.csv",
                  {"group", "metric", "count", "min", "p25", "median", "p75", "max", "mean"});
    auto emit = [&](const char* group, const DelayPositionGroup& g) {
        auto row = [&](const char* metric, const SummaryStats& s) {
            csv.row({group, metric, str(s.count), format_fixed(s.min, 2), format_fixed(s.p25, 2),
                     format_fixed(s.median, 2), format_fixed(s.p75, 2), format_fixed(s.max, 2),
                     format_fixed(s.mean, 2)});
        };
        row("delay_blocks", g.delay);
        row("position_pct", g.percentile);
        if (!g.unconfirmed.empty()) logger()->info("{}: {} transaction(s) never included", group, g.unconfirmed.size());
        if (!g.unreferenced.empty())
            logger()->info("{}: {} transaction(s) without a reference block", group, g.unreferenced.size());
    };
    emit("accelerated", stats.accelerated);
    emit("non_accelerated", stats.non_accelerated);
    csv.close();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// crosscheck

int cmd_crosscheck(const Options& o) {
    const Chain chain = chain_of(o);
    const Rational threshold = threshold_of(o);
    const Window window = window_of(o, Window::month);
    const fs::path dir = prepare_out(o, {"crosscheck.csv", "accel_share.csv"});
    const auto blocks = blocks_of(o, chain);
    const auto labels = load_accel_labels(o.labels, policy(o));
    const PoolRegistry registry = registry_of(o);

    auto analyses = parallel_map(blocks.size(), o.workers,
                                 [&](std::size_t i) { return analyze_block(blocks[i], registry); });
    std::vector<std::string> flagged;
    for (const auto& a : analyses) {
        for (auto& id : flag_accelerated(a.reports, threshold)) flagged.push_back(std::move(id));
    }
    const auto c = accel_label_crosscheck(flagged, labels);
    CsvWriter csv(dir / "crosscheck.csv", {"flagged_and_labeled", "flagged_only", "labeled_only"});
    csv.row({str(c.flagged_and_labeled), str(c.flagged_only), str(c.labeled_only)});
    csv.close();

    CsvWriter share(dir / "accel_share.csv", {"window_start", "pool", "txs", "share_pct"});
    for (const auto& r : accel_share_timeseries(labels, blocks, registry, window))
        share.row({utc_date(r.window_start), r.pool, str(r.blocks), pct(r.share_pct)});
    share.close();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// synth

int cmd_synth(const Options& o) {
    SynthSpec spec;
    if (!o.spec.empty()) {
        std::ifstream in(o.spec, std::ios::binary);
        if (!in) throw Error("cannot open " + o.spec);
        std::stringstream text;
        text << in.rdbuf();
        spec = synth_spec_from_json(text.str());
    }
    if (o.seed_given) spec.seed = o.seed;
    if (o.chain_given) spec.chain = chain_of(o);

    std::vector<std::string> files{"blocks.jsonl", "snapshots.jsonl", "pools.tsv", "ground_truth.json", "spec.json"};
    if (spec.chain == Chain::eth) {
        for (const char* f : {"bundles.jsonl", "contracts.tsv", "events.jsonl", "prices.jsonl"}) files.push_back(f);
    }
    const Corpus corpus = gen_corpus(spec);
    const fs::path dir = prepare_out(o, files);
    const auto written = write_corpus(corpus, dir);
    logger()->info("wrote {} file(s) to {}", written.size(), dir.string());
    return kExitOk;
}

// ---------------------------------------------------------------------------

CLI::App* add_command(CLI::App& app, Options& o, const char* name, const char* description) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--out", o.out, "Output directory")->required();
    sub->add_flag("--force", o.force, "Overwrite existing output files");
    sub->add_flag("--skip-bad", o.skip_bad, "Skip and count malformed input lines");
    sub->add_option("--workers", o.workers, "Worker threads (0 = available parallelism)");
    return sub;
}

void add_chain(CLI::App* sub, Options& o) {
    sub->add_option("--chain", o.chain, "btc or eth")->check(CLI::IsMember({"btc", "eth"}));
}

void add_window(CLI::App* sub, Options& o) {
    sub->add_option("--window", o.window, "day, week or month")->check(CLI::IsMember({"day", "week", "month"}));
}

}  // namespace

int run(const std::vector<std::string>& args) {
    Options o;
    CLI::App app{"Transaction-ordering forensics over block, mempool and bundle data", "prioscope"};
    app.require_subcommand(1);

    auto* sppe = add_command(app, o, "sppe", "Signed position prediction error per transaction");
    sppe->add_option("--blocks", o.blocks, "Blocks JSONL")->required();
    sppe->add_option("--pools", o.pools, "Pool marker TSV");
    sppe->add_option("--threshold", o.threshold, "SPPE percent threshold in (0, 100]");
    add_chain(sppe, o);

    auto* pools = add_command(app, o, "pools", "Pool block shares per calendar window");
    pools->add_option("--blocks", o.blocks, "Blocks JSONL")->required();
    pools->add_option("--pools", o.pools, "Pool marker TSV");
    pools->add_option("--subset", o.subset, "Comma-separated pools whose shares are summed");
    add_chain(pools, o);
    add_window(pools, o);

    auto* priv = add_command(app, o, "private", "Transactions never seen in the public mempool");
    priv->add_option("--blocks", o.blocks, "Blocks JSONL")->required();
    priv->add_option("--snapshots", o.snapshots, "Mempool snapshots JSONL")->required();
    priv->add_option("--pools", o.pools, "Pool marker TSV");
    add_chain(priv, o);

    auto* bundles = add_command(app, o, "bundles", "Bundle economics and heuristics");
    bundles->add_option("--blocks", o.blocks, "Ethereum blocks JSONL")->required();
    bundles->add_option("--bundles", o.bundles, "Bundles JSONL");
    bundles->add_option("--pools", o.pools, "Pool marker TSV");
    bundles->add_option("--contracts", o.contracts, "Contract registry TSV");
    bundles->add_flag("--economics", o.economics, "Also write per-transaction economics");

    auto* defi = add_command(app, o, "defi", "Oracle-update and liquidation bundles");
    defi->add_option("--events", o.events, "Events JSONL")->required();
    defi->add_option("--prices", o.prices, "Prices JSONL")->required();
    defi->add_option("--bundles", o.bundles, "Bundles JSONL")->required();
    defi->add_option("--blocks", o.blocks, "Ethereum blocks JSONL");
    defi->add_option("--thresholds", o.thresholds, "Liquidation threshold TSV");

    auto* delay = add_command(app, o, "delay", "Inclusion delay and position of accelerated transactions");
    delay->add_option("--blocks", o.blocks, "Blocks JSONL")->required();
    delay->add_option("--snapshots", o.snapshots, "Mempool snapshots JSONL")->required();
    delay->add_option("--labels", o.labels, "Accelerated transaction ids (otherwise SPPE flags)");
    delay->add_option("--pools", o.pools, "Pool marker TSV");
    delay->add_option("--threshold", o.threshold, "SPPE percent threshold in (0, 100]");
    add_chain(delay, o);

    auto* synth = add_command(app, o, "synth", "Generate a synthetic corpus with ground truth");
    synth->add_option("--spec", o.spec, "Synth spec JSON");
    auto* seed = synth->add_option("--seed", o.seed, "PRNG seed");
    auto* synth_chain = synth->add_option("--chain", o.chain, "btc or eth")->check(CLI::IsMember({"btc", "eth"}));

    auto* cross = add_command(app, o, "crosscheck", "Compare SPPE flags with external acceleration labels");
    cross->add_option("--blocks", o.blocks, "Blocks JSONL")->required();
    cross->add_option("--labels", o.labels, "Accelerated transaction ids")->required();
    cross->add_option("--pools", o.pools, "Pool marker TSV");
    cross->add_option("--threshold", o.threshold, "SPPE percent threshold in (0, 100]");
    add_chain(cross, o);
    add_window(cross, o);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, std::cout, std::cerr);
        return code == 0 ? kExitOk : kExitUsage;
    }
    o.seed_given = seed->count() > 0;
    o.chain_given = synth_chain->count() > 0;

    try {
        if (sppe->parsed()) return cmd_sppe(o);
        if (pools->parsed()) return cmd_pools(o);
        if (priv->parsed()) return cmd_private(o);
        if (bundles->parsed()) return cmd_bundles(o);
        if (defi->parsed()) return cmd_defi(o);
        if (delay->parsed()) return cmd_delay(o);
        if (synth->parsed()) return cmd_synth(o);
        if (cross->parsed()) return cmd_crosscheck(o);
    } catch (const UsageError& e) {
        logger()->error("{}", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        logger()->error("{}", e.what());
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace prioscope::cli
