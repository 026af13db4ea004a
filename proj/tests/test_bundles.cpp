#include <doctest.h>

#include <random>

#include "builders.hpp"
#include "oracles.hpp"
#include "prioscope/bundles.hpp"
#include "prioscope/errors.hpp"

using namespace prioscope;
using build::gwei;
using build::id;

namespace {

BundleRecord bundle_of(std::uint64_t block, std::uint32_t index, std::vector<std::string> hashes,
                       BundleTag tag = BundleTag::flashbots) {
    return {block, index, std::move(hashes), tag};
}

const std::string kAlice = id(0xa, 40);
const std::string kBob = id(0xb, 40);
const std::string kCarol = id(0xc, 40);

}  // namespace

TEST_CASE("hand-computed bundle: 600000 gwei over 200000 gas") {
    auto block = build::eth_block(1, gwei(30),
                                  {build::eth_tx(id(1), kAlice, gwei(100), gwei(2), 100000),
                                   build::eth_tx(id(2), kBob, gwei(100), 0, 100000, gwei(400000))});
    auto econ = bundle_economics(bundle_of(1, 0, {id(1), id(2)}), block);
    CHECK(econ.total_gas == 200000);
    CHECK(econ.total_reward == gwei(600000));
    CHECK(econ.actual_max_priority_fee() == Rational(gwei(3)));
    CHECK(format_gwei(econ.actual_max_priority_fee()) == "3.000000000");

    auto single = bundle_economics(bundle_of(1, 1, {id(1)}), block);
    CHECK(single.actual_max_priority_fee() == Rational(gwei(2)));

    auto zero = build::eth_block(2, gwei(30), {build::eth_tx(id(3), kAlice, gwei(100), 0, 50000)});
    CHECK(bundle_economics(bundle_of(2, 0, {id(3)}), zero).actual_max_priority_fee() == 0);
}

TEST_CASE("economics errors") {
    auto block = build::eth_block(1, gwei(30), {build::eth_tx(id(1), kAlice, gwei(100), gwei(2), 100000)});
    CHECK_THROWS_AS(bundle_economics(bundle_of(1, 0, {id(9)}), block), UnresolvedTx);
    CHECK_THROWS_AS(bundle_economics(bundle_of(1, 0, {}), block), ZeroGas);
    auto cheap = build::eth_block(1, gwei(200), {build::eth_tx(id(1), kAlice, gwei(100), gwei(2), 100000)});
    CHECK_THROWS_AS(bundle_economics(bundle_of(1, 0, {id(1)}), cheap), BaseFeeExceedsMaxFee);
}

TEST_CASE("additivity and mediant on random bundle pairs") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
        const Wei base = gwei(1 + rng() % 100);
        EthTxList txs;
        auto add = [&](std::size_t k, std::vector<std::string>& hashes) {
            for (std::size_t i = 0; i < k; ++i) {
                const Wei tip = gwei(rng() % 50);
                const Wei transfer = rng() % 2 ? Wei(0) : Wei(rng() % 1'000'000'000'000'000ULL);
                txs.push_back(build::eth_tx(oracle::hex_id(rng), oracle::hex_id(rng, 40), base + tip, tip,
                                            21000 + rng() % 500000, transfer));
                hashes.push_back(txs.back().hash);
            }
        };
        std::vector<std::string> a, b;
        add(1 + rng() % 4, a);
        add(1 + rng() % 4, b);
        auto block = build::eth_block(7, base, txs);
        auto ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        const auto ea = bundle_economics(bundle_of(7, 0, a), block);
        const auto eb = bundle_economics(bundle_of(7, 1, b), block);
        const auto eab = bundle_economics(bundle_of(7, 2, ab), block);
        CHECK(eab.total_gas == ea.total_gas + eb.total_gas);
        CHECK(eab.total_reward == ea.total_reward + eb.total_reward);
        const auto fa = ea.actual_max_priority_fee(), fb = eb.actual_max_priority_fee();
        const auto f = eab.actual_max_priority_fee();
        CHECK(f >= std::min(fa, fb));
        CHECK(f <= std::max(fa, fb));
        CHECK(f * Rational(eab.total_gas) == Rational(eab.total_reward));
    }
}

TEST_CASE("pair pattern matches exactly one condition combination") {
    // bits: issuers equal, tx1 tip > 0, tx1 transfer > 0, tx2 tip > 0, tx2 transfer > 0
    int matches = 0;
    for (int m = 0; m < 32; ++m) {
        const bool same = m & 1, tip1 = m & 2, xfer1 = m & 4, tip2 = m & 8, xfer2 = m & 16;
        auto t1 = build::eth_tx(id(1), kAlice, gwei(10), tip1 ? gwei(1) : Wei(0), 21000, xfer1 ? gwei(5) : Wei(0));
        auto t2 = build::eth_tx(id(2), same ? kAlice : kBob, gwei(10), tip2 ? gwei(1) : Wei(0), 21000,
                                xfer2 ? gwei(5) : Wei(0));
        auto block = build::eth_block(1, gwei(1), {t1, t2});
        const bool got = detect_h2(bundle_of(1, 0, {id(1), id(2)}), block);
        const bool expected = m == (2 | 16);
        CAPTURE(m);
        CHECK(got == expected);
        CHECK(got == h2_pattern(t1, t2));
        matches += got;
    }
    CHECK(matches == 1);
}

TEST_CASE("sandwich pattern matches exactly one condition combination") {
    // bits: issuer1 == issuer3, issuer1 == issuer2, tips of the three txs, last transfer
    int matches = 0;
    for (int m = 0; m < 64; ++m) {
        const bool eq13 = m & 1, eq12 = m & 2, tip1 = m & 4, tip2 = m & 8, tip3 = m & 16, xfer3 = m & 32;
        const std::string i1 = kAlice;
        const std::string i2 = eq12 ? kAlice : kBob;
        const std::string i3 = eq13 ? kAlice : kCarol;
        auto tip = [](bool on) { return on ? gwei(1) : Wei(0); };
        EthTxList txs{build::eth_tx(id(1), i1, gwei(10), tip(tip1), 21000),
                      build::eth_tx(id(2), i2, gwei(10), tip(tip2), 21000),
                      build::eth_tx(id(3), i3, gwei(10), tip(tip3), 21000, xfer3 ? gwei(5) : Wei(0))};
        auto block = build::eth_block(1, gwei(1), txs);
        const bool got = detect_h3_sandwich(bundle_of(1, 0, {id(1), id(2), id(3)}), block);
        const bool expected = m == (1 | 8 | 32);
        CAPTURE(m);
        CHECK(got == expected);
        matches += got;
    }
    CHECK(matches == 1);
    // Three distinct issuers never match.
    auto block = build::eth_block(1, gwei(1),
                                  {build::eth_tx(id(1), kAlice, gwei(10), 0, 21000),
                                   build::eth_tx(id(2), kBob, gwei(10), gwei(1), 21000),
                                   build::eth_tx(id(3), kCarol, gwei(10), 0, 21000, gwei(5))});
    CHECK_FALSE(detect_h3_sandwich(bundle_of(1, 0, {id(1), id(2), id(3)}), block));
}

TEST_CASE("heuristics demand their bundle size") {
    auto block = build::eth_block(1, gwei(1),
                                  {build::eth_tx(id(1), kAlice, gwei(10), 0, 21000),
                                   build::eth_tx(id(2), kBob, gwei(10), gwei(1), 21000),
                                   build::eth_tx(id(3), kCarol, gwei(10), 0, 21000)});
    CHECK_THROWS_AS(detect_h2(bundle_of(1, 0, {id(1), id(2), id(3)}), block), WrongSize);
    CHECK_THROWS_AS(detect_h3_sandwich(bundle_of(1, 0, {id(1), id(2)}), block), WrongSize);
    CHECK_THROWS_AS(detect_h2(bundle_of(1, 0, {id(1), id(8)}), block), UnresolvedTx);
}

TEST_CASE("size distribution") {
    CHECK(describe({Rational(1)}).max == 1);
    CHECK(describe({Rational(1)}).mean == 1);
    CHECK(describe({Rational(1)}).stddev == 0.0);
    auto d = describe({Rational(1), Rational(1), Rational(2), Rational(631)});
    CHECK(d.max == 631);
    CHECK(d.median == 1);
    CHECK(d.min == 1);
    CHECK(d.mean == Rational(635, 4));
    // Sample standard deviation, two-pass in doubles.
    const double mean = 635.0 / 4;
    double ss = 0;
    for (double x : {1.0, 1.0, 2.0, 631.0}) ss += (x - mean) * (x - mean);
    CHECK(d.stddev == doctest::Approx(std::sqrt(ss / 3)));
}

TEST_CASE("corpus bundle statistics") {
    std::vector<ChainBlock> blocks;
    std::vector<BundleRecord> bundles;
    PoolRegistry reg({{id(1, 40), "Ethermine"}, {id(2, 40), "Spark Pool"}});
    for (std::uint64_t b = 0; b < 100; ++b) {
        const std::string miner = b % 4 == 0 ? id(2, 40) : id(1, 40);
        EthTxList txs{build::eth_tx(id(b * 10 + 1), kAlice, gwei(10), gwei(1), 21000, 0,
                                    b % 10 == 0 ? TxStatus::fail : TxStatus::ok),
                      build::eth_tx(id(b * 10 + 2), kBob, gwei(10), gwei(1), 21000)};
        blocks.push_back(build::eth_block(b, gwei(1), txs, 1'600'000'000, miner));
        if (b < 52) bundles.push_back(bundle_of(b, 0, {id(b * 10 + 1), id(b * 10 + 2)}, b % 2 ? BundleTag::rogue : BundleTag::flashbots));
    }
    bundles.push_back(bundle_of(0, 1, {id(2)}, BundleTag::miner_payout));
    auto s = bundle_stats(bundles, blocks, reg);
    CHECK(s.blocks_total == 100);
    CHECK(s.blocks_with_bundles == 52);
    CHECK(s.blocks_with_bundles_pct == 52);
    CHECK(s.bundles_per_block.max == 2);
    CHECK(s.bundle_txs == 105);
    CHECK(s.failed_bundle_txs == 6);  // blocks 0, 10, ..., 50
    CHECK(s.bundles_per_pool.at("Spark Pool") == 14);  // blocks 0, 4, ..., 48 plus the extra one in 0
    Rational total_tag{0};
    for (const auto& [_, share] : s.tag_share_pct) total_tag += share;
    CHECK(total_tag == 100);
    Rational total_pool{0};
    for (const auto& [_, share] : s.pool_share_pct) total_pool += share;
    CHECK(total_pool == 100);
}

TEST_CASE("fee gap distribution") {
    std::vector<ChainBlock> blocks;
    std::vector<BundleRecord> matched;
    // Public tip 1 gwei; private transfer sized so the gap is 2, 50, 99, 100 or 250 gwei.
    const std::vector<std::uint64_t> gaps{2, 50, 99, 100, 250};
    for (std::uint64_t i = 0; i < gaps.size(); ++i) {
        const std::uint64_t gas = 100000;
        // actual = (1 * gas + transfer) / (2 * gas) = 1 + gap  =>  transfer = gas * (1 + 2 * gap)
        const Wei transfer = gwei(gas * (1 + 2 * gaps[i]));
        EthTxList txs{build::eth_tx(id(i * 2 + 1), kAlice, gwei(50), gwei(1), gas),
                      build::eth_tx(id(i * 2 + 2), kBob, gwei(50), 0, gas, transfer)};
        blocks.push_back(build::eth_block(i, gwei(10), txs));
        matched.push_back(bundle_of(i, 0, {id(i * 2 + 1), id(i * 2 + 2)}));
    }
    EthBlockIndex index(blocks);
    auto cdf = fee_gap_distribution(matched, index);
    REQUIRE(cdf.gaps.size() == 5);
    for (std::size_t i = 0; i < gaps.size(); ++i) CHECK(cdf.gaps[i].gap() == Rational(gwei(gaps[i])));
    CHECK(cdf.fraction_at_least(Rational(gwei(100))) == Rational(2, 5));
    CHECK(cdf.cdf_at(Rational(gwei(99))) == Rational(3, 5));
    CHECK(cdf.cdf_at(Rational(gwei(1000))) == 1);
}

TEST_CASE("exchange contract census uses set semantics") {
    const std::string uni = id(0x51, 40), sushi = id(0x52, 40);
    ContractRegistry reg{{uni, "Uniswap"}, {sushi, "SushiSwap"}};
    auto to = [](EthTx tx, const std::string& r) {
        tx.recipient = r;
        return tx;
    };
    EthTxList txs{to(build::eth_tx(id(1), kAlice, gwei(10), gwei(1), 21000), uni),
                  to(build::eth_tx(id(2), kAlice, gwei(10), gwei(1), 21000), uni),
                  to(build::eth_tx(id(3), kAlice, gwei(10), gwei(1), 21000), uni),
                  to(build::eth_tx(id(4), kAlice, gwei(10), gwei(1), 21000), sushi),
                  build::eth_tx(id(5), kAlice, gwei(10), gwei(1), 21000)};
    std::vector<ChainBlock> blocks{build::eth_block(1, gwei(1), txs)};
    EthBlockIndex index(blocks);
    std::vector<BundleRecord> bundles{bundle_of(1, 0, {id(1), id(2)}), bundle_of(1, 1, {id(3), id(4)}),
                                      bundle_of(1, 2, {id(5)})};
    auto rows = dex_call_census(bundles, index, reg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].protocol == "SushiSwap");
    CHECK(rows[0].bundles == 1);
    CHECK(rows[0].txs == 1);
    CHECK(rows[1].protocol == "Uniswap");
    CHECK(rows[1].bundles == 2);
    CHECK(rows[1].txs == 3);

    for (const auto& r : dex_call_census(std::vector<BundleRecord>{bundle_of(1, 2, {id(5)})}, index, reg)) {
        CHECK(r.bundles == 0);
        CHECK(r.txs == 0);
    }
}
