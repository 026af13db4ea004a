#include "prioscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "json_lines.hpp"
#include "prioscope/errors.hpp"

namespace prioscope {

std::uint64_t SynthRng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("below(0)");
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
        const std::uint64_t r = engine_();
        if (r >= threshold) return r % n;
    }
}

std::uint64_t SynthRng::between(std::uint64_t lo, std::uint64_t hi) {
    if (lo > hi) std::swap(lo, hi);
    if (lo == 0 && hi == std::numeric_limits<std::uint64_t>::max()) return engine_();
    return lo + below(hi - lo + 1);
}

std::uint64_t SynthRng::log_uniform(std::uint64_t lo, std::uint64_t hi) {
    if (lo == 0) lo = 1;
    if (lo >= hi) return lo;
    unsigned octaves = 0;
    while (octaves < 63 && (lo << (octaves + 1)) <= hi && (lo << (octaves + 1)) >> (octaves + 1) == lo) ++octaves;
    const unsigned e = static_cast<unsigned>(below(octaves + 1));
    const std::uint64_t a = lo << e;
    const std::uint64_t b = e == octaves ? hi : std::min(hi, (lo << (e + 1)) - 1);
    return between(a, b);
}

std::string SynthRng::hex(std::size_t chars) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(chars);
    while (out.size() < chars) {
        std::uint64_t r = engine_();
        for (int i = 0; i < 16 && out.size() < chars; ++i, r >>= 4) out += digits[r & 0xf];
    }
    return out;
}

// ---------------------------------------------------------------------------
// spec and manifest files

using ojson = nlohmann::ordered_json;

SynthSpec synth_spec_from_json(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const ojson::exception& e) {
        throw InfeasibleSpec(std::string("spec is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InfeasibleSpec("spec must be a JSON object");
    SynthSpec s;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "seed") s.seed = value.get<std::uint64_t>();
            else if (key == "chain") {
                auto c = parse_chain(value.get<std::string>());
                if (!c) throw InfeasibleSpec("unknown chain '" + value.get<std::string>() + "'");
                s.chain = *c;
            } else if (key == "blocks") s.blocks = value.get<std::uint32_t>();
            else if (key == "txs_per_block") {
                s.min_txs_per_block = value.at(0).get<std::uint32_t>();
                s.max_txs_per_block = value.at(1).get<std::uint32_t>();
            } else if (key == "fee_range") {
                s.fee_min = value.at(0).get<std::uint64_t>();
                s.fee_max = value.at(1).get<std::uint64_t>();
            } else if (key == "planted_accelerations") s.planted_accelerations = value.get<std::uint32_t>();
            else if (key == "planted_h2") s.planted_h2 = value.get<std::uint32_t>();
            else if (key == "planted_h3") s.planted_h3 = value.get<std::uint32_t>();
            else if (key == "decoy_bundles") s.decoy_bundles = value.get<std::uint32_t>();
            else if (key == "planted_private_share") s.planted_private_share = value.get<double>();
            else if (key == "liquidations") s.liquidations = value.get<std::uint32_t>();
            else throw InfeasibleSpec("unknown spec key '" + key + "'");
        }
    } catch (const ojson::exception& e) {
        throw InfeasibleSpec(std::string("bad spec value: ") + e.what());
    }
    return s;
}

std::string synth_spec_to_json(const SynthSpec& s) {
    ojson j;
    j["seed"] = s.seed;
    j["chain"] = std::string(to_string(s.chain));
    j["blocks"] = s.blocks;
    j["txs_per_block"] = {s.min_txs_per_block, s.max_txs_per_block};
    j["fee_range"] = {s.fee_min, s.fee_max};
    j["planted_accelerations"] = s.planted_accelerations;
    j["planted_h2"] = s.planted_h2;
    j["planted_h3"] = s.planted_h3;
    j["decoy_bundles"] = s.decoy_bundles;
    j["planted_private_share"] = s.planted_private_share;
    j["liquidations"] = s.liquidations;
    return j.dump(2) + "\n";
}

std::string ground_truth_to_json(const GroundTruth& truth) {
    auto refs = [](const std::vector<BundleRef>& list) {
        std::vector<std::string> items;
        for (const auto& r : list) {
            items.push_back(jsonl::ObjectWriter{}
                                .num("block_number", r.block_number)
                                .num("bundle_index", static_cast<std::uint64_t>(r.bundle_index))
                                .finish());
        }
        return items;
    };
    return jsonl::ObjectWriter{}
               .str_array("accelerated", truth.accelerated)
               .str_array("private", truth.private_txs)
               .raw_array("h2_bundles", refs(truth.h2_bundles))
               .raw_array("h3_bundles", refs(truth.h3_bundles))
               .finish() +
           "\n";
}

// ---------------------------------------------------------------------------
// generation

namespace {

constexpr std::uint64_t kBtcFirstHeight = 700'000;
constexpr std::uint64_t kEthFirstHeight = 13'000'000;
constexpr std::int64_t kFirstTimestamp = 1'630'000'000;

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

void check_feasible(const SynthSpec& s) {
    if (s.blocks == 0) throw InfeasibleSpec("blocks must be at least 1");
    if (s.min_txs_per_block == 0) throw InfeasibleSpec("blocks need at least one transaction");
    if (s.min_txs_per_block > s.max_txs_per_block) throw InfeasibleSpec("txs_per_block range is empty");
    if (s.fee_max <= s.fee_min) throw InfeasibleSpec("fee_range needs fee_max > fee_min");
    if (!(s.planted_private_share >= 0.0 && s.planted_private_share <= 1.0))
        throw InfeasibleSpec("planted_private_share must be in [0, 1]");
    if (s.planted_accelerations > s.min_txs_per_block)
        throw InfeasibleSpec("more planted accelerations than transactions per block");
    if (s.chain == Chain::btc && (s.planted_h2 || s.planted_h3 || s.decoy_bundles || s.liquidations))
        throw InfeasibleSpec("bundles and DeFi events need an eth corpus");
    if (s.chain == Chain::eth && s.fee_max > std::numeric_limits<std::uint64_t>::max() / 1'000'000'000)
        throw InfeasibleSpec("fee_range too large for gwei");
    const std::uint64_t k = s.planted_accelerations;
    if (k > 0) {
        const std::uint64_t z = ceil_div(s.planted_h2, s.blocks) + 2 * ceil_div(s.planted_h3, s.blocks);
        const std::uint64_t need = 100 * (2 * k - 1 + z);
        if (s.min_txs_per_block < need)
            throw InfeasibleSpec("planting " + std::to_string(k) + " accelerations per block needs at least " +
                                 std::to_string(need) + " transactions per block");
    }
}

struct Generator {
    const SynthSpec& spec;
    SynthRng rng;
    Corpus corpus;
    std::uint32_t private_ppm;
    std::vector<std::string> dex_addresses;
    std::vector<std::uint64_t> eth_usd;  // whole dollars, index 0 is the block before the corpus

    explicit Generator(const SynthSpec& s)
        : spec(s), rng(s.seed),
          private_ppm(static_cast<std::uint32_t>(std::llround(s.planted_private_share * 1'000'000.0))) {
        corpus.spec = s;
    }

    bool draw_private() { return private_ppm > 0 && rng.chance_ppm(private_ppm); }

    std::uint32_t draw_tx_count() { return static_cast<std::uint32_t>(rng.between(spec.min_txs_per_block, spec.max_txs_per_block)); }

    std::int64_t timestamp(std::uint32_t i) const {
        return kFirstTimestamp + static_cast<std::int64_t>(i) * (spec.chain == Chain::btc ? 600 : 13);
    }

    void snapshot_before(std::uint32_t i, const std::vector<std::string>& pending) {
        const std::int64_t lead = spec.chain == Chain::btc ? 300 : 6;
        corpus.snapshots.push_back({timestamp(i) - lead, pending});
    }

    // -- bitcoin -------------------------------------------------------------

    void btc_pools() {
        corpus.pool_rules = {{"/ViaBTC/", "ViaBTC"},   {"/AntPool/", "AntPool"}, {"F2Pool", "F2Pool"},
                             {"/Poolin/", "Poolin"},   {"/BTC.COM/", "BTC.com"}, {"/SlushPool/", "SlushPool"},
                             {"/Binance/", "Binance Pool"}};
    }

    BtcTx btc_tx(std::uint64_t rate) {
        BtcTx tx;
        tx.txid = rng.hex(64);
        tx.vsize = static_cast<std::int64_t>(rng.between(110, 1000));
        tx.fee = static_cast<std::int64_t>(rate) * tx.vsize;
        const auto inputs = rng.between(1, 3);
        for (std::uint64_t j = 0; j < inputs; ++j)
            tx.inputs.push_back({rng.hex(64), static_cast<std::uint32_t>(rng.below(4))});
        tx.total_output_value = static_cast<std::int64_t>(rng.between(10'000, 500'000'000));
        return tx;
    }

    void btc_block(std::uint32_t i) {
        ChainBlock block;
        block.height = kBtcFirstHeight + i;
        block.timestamp = timestamp(i);
        const auto pool = rng.below(corpus.pool_rules.size() + 1);
        block.miner_marker = (pool < corpus.pool_rules.size() ? corpus.pool_rules[pool].first : std::string("/solo/")) +
                             "Mined/" + rng.hex(8);

        const std::uint32_t n = draw_tx_count();
        const std::uint32_t k = spec.planted_accelerations;
        BtcTxList planted;
        for (std::uint32_t j = 0; j < k; ++j) planted.push_back(btc_tx(spec.fee_min));
        BtcTxList ordinary;
        for (std::uint32_t j = k; j < n; ++j) ordinary.push_back(btc_tx(rng.log_uniform(spec.fee_min + 1, spec.fee_max)));
        std::stable_sort(ordinary.begin(), ordinary.end(),
                         [](const BtcTx& a, const BtcTx& b) { return a.fee_rate() > b.fee_rate(); });

        BtcTx coinbase;
        coinbase.txid = rng.hex(64);
        coinbase.vsize = static_cast<std::int64_t>(rng.between(150, 300));
        coinbase.total_output_value = 625'000'000;
        BtcTxList txs{coinbase};
        std::vector<std::string> pending;
        auto add = [&](BtcTx& tx) {
            txs[0].total_output_value += tx.fee;
            if (draw_private()) corpus.truth.private_txs.push_back(tx.txid);
            else pending.push_back(tx.txid);
            txs.push_back(std::move(tx));
        };
        for (auto& tx : planted) {
            corpus.truth.accelerated.push_back(tx.txid);
            add(tx);
        }
        for (auto& tx : ordinary) add(tx);
        block.txs = std::move(txs);
        snapshot_before(i, pending);
        corpus.blocks.push_back(std::move(block));
    }

    // -- ethereum ------------------------------------------------------------

    std::vector<std::string> eth_miners;

    void eth_pools() {
        for (const char* name : {"Ethermine", "F2Pool", "SparkPool", "Hiveon", "Nanopool"}) {
            corpus.pool_rules.emplace_back(rng.hex(40), name);
            eth_miners.push_back(corpus.pool_rules.back().first);
        }
        eth_miners.push_back(rng.hex(40));  // unattributed
        for (const char* name : {"Uniswap", "SushiSwap", "Balancer", "Curve"}) {
            dex_addresses.push_back(rng.hex(40));
            corpus.contracts.emplace_back(dex_addresses.back(), name);
        }
    }

    EthTx eth_tx(const Wei& base, std::uint64_t tip_gwei, std::string issuer = {}) {
        EthTx tx;
        tx.hash = rng.hex(64);
        tx.issuer = issuer.empty() ? rng.hex(40) : std::move(issuer);
        tx.recipient = rng.chance_ppm(100'000) ? dex_addresses[rng.below(dex_addresses.size())] : rng.hex(40);
        tx.gas_used = rng.between(21'000, 300'000);
        tx.max_priority_fee_per_gas = Wei(tip_gwei) * kWeiPerGwei;
        tx.max_fee_per_gas = base + tx.max_priority_fee_per_gas + Wei(rng.between(0, 50'000'000'000ULL));
        tx.coinbase_transfer = 0;
        tx.status = rng.chance_ppm(20'000) ? TxStatus::fail : TxStatus::ok;
        return tx;
    }

    std::uint64_t ordinary_tip() { return rng.log_uniform(spec.fee_min + 1, spec.fee_max); }

    std::string other_issuer(const std::string& not_this) {
        for (;;) {
            auto a = rng.hex(40);
            if (a != not_this) return a;
        }
    }

    Wei transfer() { return Wei(rng.between(1'000'000'000'000'000ULL, 100'000'000'000'000'000ULL)); }

    // Bundle and DeFi transactions appended below the ordinary ones.
    struct Extra {
        EthTx tx;
        bool is_private = false;
    };
    struct PendingBundle {
        std::vector<std::string> hashes;
        BundleTag tag = BundleTag::flashbots;
        int kind = 0;  // 2 = h2, 3 = h3, 0 = other
    };

    void h2_bundle(const Wei& base, std::vector<Extra>& extras, std::vector<PendingBundle>& bundles) {
        EthTx first = eth_tx(base, ordinary_tip());
        EthTx second = eth_tx(base, 0, other_issuer(first.issuer));
        second.coinbase_transfer = transfer();
        bundles.push_back({{first.hash, second.hash}, BundleTag::flashbots, 2});
        extras.push_back({std::move(first), false});
        extras.push_back({std::move(second), true});
    }

    void h3_bundle(const Wei& base, std::vector<Extra>& extras, std::vector<PendingBundle>& bundles) {
        EthTx front = eth_tx(base, 0);
        EthTx victim = eth_tx(base, ordinary_tip(), other_issuer(front.issuer));
        EthTx back = eth_tx(base, 0, front.issuer);
        back.coinbase_transfer = transfer();
        bundles.push_back({{front.hash, victim.hash, back.hash}, BundleTag::flashbots, 3});
        extras.push_back({std::move(front), true});
        extras.push_back({std::move(victim), false});
        extras.push_back({std::move(back), true});
    }

    // Every transaction carries a positive tip and no transfer, so neither
    // heuristic can match.
    void decoy_bundle(const Wei& base, std::vector<Extra>& extras, std::vector<PendingBundle>& bundles) {
        static constexpr BundleTag tags[] = {BundleTag::flashbots, BundleTag::rogue, BundleTag::miner_payout};
        const auto size = rng.between(1, 4);
        PendingBundle b{{}, tags[rng.below(3)], 0};
        for (std::uint64_t j = 0; j < size; ++j) {
            EthTx tx = eth_tx(base, ordinary_tip());
            b.hashes.push_back(tx.hash);
            extras.push_back({std::move(tx), true});
        }
        bundles.push_back(std::move(b));
    }

    void eth_prices() {
        std::uint64_t p = rng.between(1500, 4000);
        for (std::uint32_t i = 0; i <= spec.blocks; ++i) {
            eth_usd.push_back(p);
            const std::uint64_t step = rng.between(0, 40);
            p = rng.below(2) ? p + step : (p > step + 100 ? p - step : p + step);
        }
        for (std::uint32_t i = 0; i <= spec.blocks; ++i) {
            const std::uint64_t h = kEthFirstHeight + i - 1;
            const BigInt dollars(eth_usd[i]);
            corpus.prices.push_back({h, "ETH", Quote::usd, dollars * 100'000'000, 8});
            corpus.prices.push_back({h, "USDC", Quote::eth, usdc_in_eth(i), 18});
            corpus.prices.push_back({h, "USDC", Quote::usd, BigInt(100'000'000), 8});
            corpus.prices.push_back({h, "WETH", Quote::eth, kWeiPerEther, 18});
            corpus.prices.push_back({h, "WETH", Quote::usd, dollars * 100'000'000, 8});
        }
    }

    BigInt usdc_in_eth(std::uint32_t price_index) const { return kWeiPerEther / eth_usd[price_index]; }

    // Liquidation j: bundled behind an oracle update when j is even, with a
    // larger debt and bonus so every bundled profit exceeds every
    // unbundled one.
    void liquidation(std::uint32_t j, std::uint32_t block_index, const Wei& base, std::vector<Extra>& extras,
                     std::vector<PendingBundle>& bundles) {
        const bool bundled = j % 2 == 0;
        const Protocol protocol = (j / 2) % 2 == 0 ? Protocol::aave : Protocol::compound;
        const std::uint32_t price_index = block_index + 1;
        const std::uint64_t height = kEthFirstHeight + block_index;
        const std::uint64_t debt = bundled ? rng.between(5'000, 50'000) : rng.between(1'000, 5'000);
        const std::uint64_t bonus_bp = bundled ? rng.between(800, 1500) : rng.between(100, 500);

        LiquidationEvent e;
        e.protocol = protocol;
        e.debt_asset = "USDC";
        e.debt_repaid = BigInt(debt) * 1'000'000;
        e.debt_decimals = 6;
        e.collateral_asset = "WETH";
        e.collateral_decimals = 18;
        if (protocol == Protocol::aave)
            e.collateral_seized = BigInt(debt) * usdc_in_eth(price_index) * (10'000 + bonus_bp) / 10'000;
        else
            e.collateral_seized = BigInt(debt) * kWeiPerEther * (10'000 + bonus_bp) / (10'000 * eth_usd[price_index]);
        e.block_number = height;

        EthTx liq = eth_tx(base, ordinary_tip());
        e.tx_hash = liq.hash;
        if (bundled) {
            EthTx upd = eth_tx(base, ordinary_tip());
            OracleUpdate u;
            u.tx_hash = upd.hash;
            u.block_number = height;
            if (protocol == Protocol::aave) {
                u.feed = "USDC-ETH";
                u.price = usdc_in_eth(price_index);
                u.decimals = 18;
            } else {
                u.feed = "ETH-USD";
                u.price = BigInt(eth_usd[price_index]) * 100'000'000;
                u.decimals = 8;
            }
            corpus.events.updates.push_back(std::move(u));
            bundles.push_back({{upd.hash, liq.hash}, BundleTag::flashbots, 0});
            extras.push_back({std::move(upd), true});
            extras.push_back({std::move(liq), true});
        } else {
            extras.push_back({std::move(liq), false});
        }
        corpus.events.liquidations.push_back(std::move(e));
    }

    void eth_block(std::uint32_t i) {
        ChainBlock block;
        block.height = kEthFirstHeight + i;
        block.timestamp = timestamp(i);
        block.miner_marker = eth_miners[rng.below(eth_miners.size())];
        const Wei base(rng.between(20'000'000'000ULL, 100'000'000'000ULL));
        block.base_fee_per_gas = base;

        const std::uint32_t n = draw_tx_count();
        const std::uint32_t k = spec.planted_accelerations;
        EthTxList planted;
        for (std::uint32_t j = 0; j < k; ++j) planted.push_back(eth_tx(base, spec.fee_min));
        EthTxList ordinary;
        for (std::uint32_t j = k; j < n; ++j) ordinary.push_back(eth_tx(base, ordinary_tip()));
        std::stable_sort(ordinary.begin(), ordinary.end(), [](const EthTx& a, const EthTx& b) {
            return a.max_priority_fee_per_gas > b.max_priority_fee_per_gas;
        });

        std::vector<Extra> extras;
        std::vector<PendingBundle> bundles;
        for (std::uint32_t j = i; j < spec.planted_h2; j += spec.blocks) h2_bundle(base, extras, bundles);
        for (std::uint32_t j = i; j < spec.planted_h3; j += spec.blocks) h3_bundle(base, extras, bundles);
        for (std::uint32_t j = i; j < spec.decoy_bundles; j += spec.blocks) decoy_bundle(base, extras, bundles);
        for (std::uint32_t j = i; j < spec.liquidations; j += spec.blocks) liquidation(j, i, base, extras, bundles);

        EthTxList txs;
        std::vector<std::string> pending;
        auto add = [&](EthTx& tx, bool forced_private) {
            const bool hidden = forced_private || draw_private();
            (hidden ? corpus.truth.private_txs : pending).push_back(tx.hash);
            txs.push_back(std::move(tx));
        };
        for (auto& tx : planted) {
            corpus.truth.accelerated.push_back(tx.hash);
            add(tx, false);
        }
        for (auto& tx : ordinary) add(tx, false);
        for (auto& x : extras) {
            // Bundled transactions never reach the public mempool.
            if (x.is_private) {
                corpus.truth.private_txs.push_back(x.tx.hash);
                txs.push_back(std::move(x.tx));
            } else {
                add(x.tx, false);
            }
        }

        for (std::uint32_t b = 0; b < bundles.size(); ++b) {
            BundleRecord rec{block.height, b, bundles[b].hashes, bundles[b].tag};
            if (bundles[b].kind == 2) corpus.truth.h2_bundles.push_back(rec.ref());
            if (bundles[b].kind == 3) corpus.truth.h3_bundles.push_back(rec.ref());
            corpus.bundles.push_back(std::move(rec));
        }
        block.txs = std::move(txs);
        snapshot_before(i, pending);
        corpus.blocks.push_back(std::move(block));
    }

    void run() {
        if (spec.chain == Chain::btc) {
            btc_pools();
            for (std::uint32_t i = 0; i < spec.blocks; ++i) btc_block(i);
        } else {
            eth_pools();
            eth_prices();
            for (std::uint32_t i = 0; i < spec.blocks; ++i) eth_block(i);
        }
        for (const auto& b : corpus.blocks) validate(b);
    }
};

void write_text(const std::filesystem::path& path, const std::string& text,
                std::vector<std::filesystem::path>& written) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    out.close();
    if (!out) throw Error("failed writing " + path.string());
    written.push_back(path);
}

template <class Range>
std::string lines(const Range& records) {
    std::string text;
    for (const auto& r : records) text += to_jsonl(r) + "\n";
    return text;
}

std::string tsv(const std::vector<std::pair<std::string, std::string>>& rows) {
    std::string text;
    for (const auto& [a, b] : rows) text += a + "\t" + b + "\n";
    return text;
}

}  // namespace

Corpus gen_corpus(const SynthSpec& spec) {
    check_feasible(spec);
    Generator g(spec);
    g.run();
    return std::move(g.corpus);
}

std::vector<std::filesystem::path> write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    write_text(dir / "blocks.jsonl", lines(corpus.blocks), written);
    write_text(dir / "snapshots.jsonl", lines(corpus.snapshots), written);
    write_text(dir / "pools.tsv", tsv(corpus.pool_rules), written);
    if (corpus.spec.chain == Chain::eth) {
        write_text(dir / "bundles.jsonl", lines(corpus.bundles), written);
        write_text(dir / "contracts.tsv", tsv(corpus.contracts), written);
        std::string events = lines(corpus.events.updates) + lines(corpus.events.liquidations);
        write_text(dir / "events.jsonl", events, written);
        write_text(dir / "prices.jsonl", lines(corpus.prices), written);
    }
    write_text(dir / "ground_truth.json", ground_truth_to_json(corpus.truth), written);
    write_text(dir / "spec.json", synth_spec_to_json(corpus.spec), written);
    return written;
}

}  // namespace prioscope
