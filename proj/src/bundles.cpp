#include "prioscope/bundles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "prioscope/errors.hpp"

namespace prioscope {

EthBlockIndex::EthBlockIndex(std::span<const ChainBlock> blocks) {
    for (const auto& b : blocks) {
        blocks_[b.height] = &b;
        const auto& txs = b.eth_txs();
        for (std::size_t i = 0; i < txs.size(); ++i) txs_[txs[i].hash] = {b.height, i};
    }
}

const ChainBlock* EthBlockIndex::block(std::uint64_t number) const {
    auto it = blocks_.find(number);
    return it == blocks_.end() ? nullptr : it->second;
}

const EthTx* EthBlockIndex::tx(std::uint64_t number, const std::string& hash) const {
    auto it = txs_.find(hash);
    if (it == txs_.end() || it->second.first != number) return nullptr;
    return &blocks_.at(number)->eth_txs()[it->second.second];
}

std::optional<std::uint64_t> EthBlockIndex::block_of(const std::string& hash) const {
    auto it = txs_.find(hash);
    if (it == txs_.end()) return std::nullopt;
    return it->second.first;
}

std::vector<const EthTx*> resolve_bundle(const BundleRecord& bundle, const ChainBlock& block) {
    const auto& txs = block.eth_txs();
    std::vector<const EthTx*> out;
    out.reserve(bundle.tx_hashes.size());
    for (const auto& h : bundle.tx_hashes) {
        auto it = std::find_if(txs.begin(), txs.end(), [&](const EthTx& tx) { return tx.hash == h; });
        if (it == txs.end()) throw UnresolvedTx(h);
        out.push_back(&*it);
    }
    return out;
}

BundleEconomics bundle_economics(const BundleRecord& bundle, const ChainBlock& block) {
    const Wei& base = block.base_fee_per_gas.value();
    BundleEconomics e;
    e.ref = bundle.ref();
    for (const EthTx* tx : resolve_bundle(bundle, block)) {
        e.total_reward += tx_miner_reward(*tx, base);
        e.total_gas += tx->gas_used;
    }
    if (e.total_gas == 0) throw ZeroGas();
    return e;
}

bool h2_pattern(const EthTx& first, const EthTx& second) {
    return first.issuer != second.issuer && first.max_priority_fee_per_gas > 0 && first.coinbase_transfer == 0 &&
           second.max_priority_fee_per_gas == 0 && second.coinbase_transfer > 0;
}

bool h3_pattern(const EthTx& first, const EthTx& middle, const EthTx& last) {
    return first.issuer == last.issuer && middle.issuer != first.issuer && first.max_priority_fee_per_gas == 0 &&
           last.max_priority_fee_per_gas == 0 && middle.max_priority_fee_per_gas > 0 && last.coinbase_transfer > 0;
}

bool detect_h2(const BundleRecord& bundle, const ChainBlock& block) {
    if (bundle.tx_hashes.size() != 2) throw WrongSize(2, bundle.tx_hashes.size());
    auto txs = resolve_bundle(bundle, block);
    return h2_pattern(*txs[0], *txs[1]);
}

bool detect_h3_sandwich(const BundleRecord& bundle, const ChainBlock& block) {
    if (bundle.tx_hashes.size() != 3) throw WrongSize(3, bundle.tx_hashes.size());
    auto txs = resolve_bundle(bundle, block);
    return h3_pattern(*txs[0], *txs[1], *txs[2]);
}

std::size_t public_tx_position(const BundleRecord& bundle) {
    switch (bundle.tx_hashes.size()) {
        case 2: return 0;
        case 3: return 1;
        default: throw WrongSize(2, bundle.tx_hashes.size());
    }
}

DistributionSummary describe(std::vector<Rational> values) {
    DistributionSummary d;
    d.count = values.size();
    if (values.empty()) return d;
    std::sort(values.begin(), values.end());
    const auto n = static_cast<long long>(values.size());
    d.min = values.front();
    d.max = values.back();
    d.median = values[(n - 1) / 2];  // lower median
    d.mean = std::accumulate(values.begin(), values.end(), Rational{0}) / n;
    if (n > 1) {
        Rational ss{0};
        for (const auto& v : values) ss += (v - d.mean) * (v - d.mean);
        d.stddev = std::sqrt(static_cast<double>(ss / (n - 1)));
    }
    return d;
}

BundleStats bundle_stats(std::span<const BundleRecord> bundles, std::span<const ChainBlock> blocks,
                         const PoolRegistry& registry) {
    BundleStats s;
    EthBlockIndex index(blocks);
    std::vector<Rational> sizes;
    std::map<std::uint64_t, std::uint64_t> per_block;
    std::uint64_t refs = 0;
    for (const auto& b : bundles) {
        sizes.emplace_back(static_cast<long long>(b.tx_hashes.size()));
        ++per_block[b.block_number];
        const ChainBlock* block = index.block(b.block_number);
        ++s.bundles_per_pool[block ? registry.attribute(*block) : std::string(kUnknownPool)];
        s.tag_tx_refs[b.tag] += b.tx_hashes.size();
        refs += b.tx_hashes.size();
        for (const auto& h : b.tx_hashes) {
            ++s.bundle_txs;
            const EthTx* tx = index.tx(b.block_number, h);
            if (tx && tx->status == TxStatus::fail) ++s.failed_bundle_txs;
        }
    }
    s.bundle_size = describe(std::move(sizes));
    std::vector<Rational> counts;
    for (const auto& [_, n] : per_block) counts.emplace_back(static_cast<long long>(n));
    s.bundles_per_block = describe(std::move(counts));

    s.blocks_total = index.block_count();
    for (const auto& [number, _] : per_block) s.blocks_with_bundles += index.block(number) != nullptr;
    s.blocks_with_bundles_pct = percent(Rational(s.blocks_with_bundles), Rational(s.blocks_total));

    for (const auto& [pool, n] : s.bundles_per_pool) {
        s.pool_share_pct[pool] = percent(Rational(n), Rational(static_cast<long long>(bundles.size())));
    }
    for (const auto& [tag, n] : s.tag_tx_refs) s.tag_share_pct[tag] = percent(Rational(n), Rational(refs));
    s.failed_share_pct = percent(Rational(s.failed_bundle_txs), Rational(s.bundle_txs));
    return s;
}

Rational FeeGapCdf::cdf_at(const Rational& x) const {
    if (gaps.empty()) return Rational{0};
    auto n = std::count_if(gaps.begin(), gaps.end(), [&](const FeeGap& g) { return g.gap() <= x; });
    return Rational(static_cast<long long>(n), static_cast<long long>(gaps.size()));
}

Rational FeeGapCdf::fraction_at_least(const Rational& x) const {
    if (gaps.empty()) return Rational{0};
    auto n = std::count_if(gaps.begin(), gaps.end(), [&](const FeeGap& g) { return g.gap() >= x; });
    return Rational(static_cast<long long>(n), static_cast<long long>(gaps.size()));
}

FeeGapCdf fee_gap_distribution(std::span<const BundleRecord> matched, const EthBlockIndex& blocks) {
    FeeGapCdf cdf;
    for (const auto& b : matched) {
        const ChainBlock* block = blocks.block(b.block_number);
        if (!block) throw UnresolvedTx(b.tx_hashes.front());
        const auto econ = bundle_economics(b, *block);
        const auto txs = resolve_bundle(b, *block);
        const EthTx& pub = *txs[public_tx_position(b)];
        cdf.gaps.push_back({b.ref(), econ.actual_max_priority_fee(), Rational(pub.max_priority_fee_per_gas)});
    }
    std::sort(cdf.gaps.begin(), cdf.gaps.end(), [](const FeeGap& a, const FeeGap& b) {
        const Rational ga = a.gap(), gb = b.gap();
        if (ga != gb) return ga < gb;
        return a.ref < b.ref;
    });
    return cdf;
}

std::vector<DexCensusRow> dex_call_census(std::span<const BundleRecord> bundles, const EthBlockIndex& blocks,
                                          const ContractRegistry& contracts) {
    std::map<std::string, std::set<BundleRef>> bundle_sets;
    std::map<std::string, std::set<std::string>> tx_sets;
    for (const auto& b : bundles) {
        for (const auto& h : b.tx_hashes) {
            const EthTx* tx = blocks.tx(b.block_number, h);
            if (!tx) continue;
            auto it = contracts.find(tx->recipient);
            if (it == contracts.end()) continue;
            bundle_sets[it->second].insert(b.ref());
            tx_sets[it->second].insert(h);
        }
    }
    std::set<std::string> protocols;
    for (const auto& [_, p] : contracts) protocols.insert(p);
    std::vector<DexCensusRow> out;
    for (const auto& p : protocols) {
        out.push_back({p, bundle_sets[p].size(), tx_sets[p].size()});
    }
    return out;
}

}  // namespace prioscope
