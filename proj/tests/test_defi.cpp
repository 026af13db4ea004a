#include <doctest.h>

#include <random>

#include "builders.hpp"
#include "oracles.hpp"
#include "prioscope/defi.hpp"
#include "prioscope/errors.hpp"

using namespace prioscope;
using build::id;

namespace {

void put(PriceStore& store, std::uint64_t block, const std::string& asset, Quote quote, BigInt price,
         unsigned decimals) {
    REQUIRE(store.add({block, asset, quote, std::move(price), decimals}));
}

LiquidationEvent liquidation(Protocol protocol, std::string hash, std::string debt, BigInt repaid, unsigned debt_dec,
                             std::string collateral, BigInt seized, unsigned coll_dec,
                             std::optional<std::uint64_t> block = std::nullopt) {
    LiquidationEvent e;
    e.protocol = protocol;
    e.tx_hash = std::move(hash);
    e.debt_asset = std::move(debt);
    e.debt_repaid = std::move(repaid);
    e.debt_decimals = debt_dec;
    e.collateral_asset = std::move(collateral);
    e.collateral_seized = std::move(seized);
    e.collateral_decimals = coll_dec;
    e.block_number = block;
    return e;
}

BigInt pow10i(unsigned n) { return pow10(n); }

}  // namespace

TEST_CASE("worked aave liquidation: 0.1 ETH, 200 USD") {
    PriceStore prices;
    put(prices, 100, "USDC", Quote::eth, 5, 4);     // 0.0005 ETH
    put(prices, 100, "WETH", Quote::eth, 1, 0);     // 1 ETH
    put(prices, 100, "ETH", Quote::usd, 2000, 0);
    auto e = liquidation(Protocol::aave, id(1), "USDC", 1000 * pow10i(6), 6, "WETH", 6 * pow10i(17), 18);
    auto p = liquidation_profit(e, prices, 100);
    REQUIRE(p.eth.has_value());
    CHECK(*p.eth == Rational(1, 10));
    CHECK(p.usd == 200);
    CHECK(p.quote_profit == Rational(1, 10));
}

TEST_CASE("compound profit and break-even") {
    PriceStore prices;
    put(prices, 5, "DAI", Quote::usd, 1, 0);
    put(prices, 5, "WBTC", Quote::usd, 54, 0);
    auto e = liquidation(Protocol::compound, id(2), "DAI", 500, 0, "WBTC", 10, 0);
    auto p = liquidation_profit(e, prices, 5);
    CHECK(p.usd == 40);
    CHECK_FALSE(p.eth.has_value());

    auto even = liquidation(Protocol::compound, id(3), "DAI", 540, 0, "WBTC", 10, 0);
    CHECK(liquidation_profit(even, prices, 5).usd == 0);
    CHECK_THROWS_AS(liquidation_profit(e, prices, 6), MissingPrice);
}

TEST_CASE("profit is the same through ETH or USD under consistent prices") {
    std::mt19937_64 rng(1559);
    for (int trial = 0; trial < 1000; ++trial) {
        const BigInt eth_usd = 1 + rng() % 5'000'000'000'000ULL;  // 8 decimals
        const BigInt debt_eth = 1 + rng() % 1'000'000'000'000'000ULL;  // 18 decimals
        const BigInt coll_eth = 1 + rng() % 1'000'000'000'000'000'000ULL;
        PriceStore eth_path, usd_path;
        put(eth_path, 1, "ETH", Quote::usd, eth_usd, 8);
        put(eth_path, 1, "DEBT", Quote::eth, debt_eth, 18);
        put(eth_path, 1, "COLL", Quote::eth, coll_eth, 18);
        // USD price = ETH price * ETH-USD, exactly representable with 26 decimals.
        put(usd_path, 1, "DEBT", Quote::usd, debt_eth * eth_usd, 26);
        put(usd_path, 1, "COLL", Quote::usd, coll_eth * eth_usd, 26);
        auto a = liquidation(Protocol::aave, id(1), "DEBT", rng() % 10'000'000'000ULL, 6, "COLL",
                             rng() % 1'000'000'000'000'000'000ULL, 18);
        auto c = a;
        c.protocol = Protocol::compound;
        CHECK(liquidation_profit(a, eth_path, 1).usd == liquidation_profit(c, usd_path, 1).usd);
    }
}

TEST_CASE("profit is linear in the amounts") {
    std::mt19937_64 rng(9);
    PriceStore prices;
    put(prices, 1, "A", Quote::usd, 123457, 3);
    put(prices, 1, "B", Quote::usd, 98765, 2);
    for (int i = 0; i < 200; ++i) {
        auto e = liquidation(Protocol::compound, id(1), "A", rng() % 1'000'000, 2, "B", rng() % 1'000'000, 4);
        auto twice = e;
        twice.debt_repaid *= 2;
        twice.collateral_seized *= 2;
        CHECK(liquidation_profit(twice, prices, 1).usd == 2 * liquidation_profit(e, prices, 1).usd);
    }
}

TEST_CASE("enabled by update: the three ratio cases") {
    // Debt 100 USD; collateral price moves so the ratio is as listed.
    auto scenario = [](const char* before, const char* at) {
        PriceStore prices;
        put(prices, 9, "DEBT", Quote::usd, 1, 0);
        put(prices, 10, "DEBT", Quote::usd, 1, 0);
        put(prices, 9, "COLL", Quote::usd, parse_uint(before), 2);
        put(prices, 10, "COLL", Quote::usd, parse_uint(at), 2);
        auto e = liquidation(Protocol::compound, id(1), "DEBT", 100, 0, "COLL", 100, 0);
        return enabled_by_update(e, prices, 10, ThresholdTable{});
    };
    auto a = scenario("160", "145");
    CHECK_FALSE(a.liquidatable_before);
    CHECK(a.liquidatable_at);
    CHECK(a.enabled());
    auto b = scenario("140", "140");
    CHECK(b.liquidatable_before);
    CHECK_FALSE(b.enabled());
    auto c = scenario("160", "160");
    CHECK_FALSE(c.liquidatable_at);
    CHECK_FALSE(c.enabled());
    CHECK_FALSE(scenario("150", "150").liquidatable_at);  // strictly below
}

TEST_CASE("raising the threshold never clears liquidatability") {
    std::mt19937_64 rng(33);
    PriceStore prices;
    put(prices, 1, "DEBT", Quote::usd, 1, 0);
    put(prices, 2, "DEBT", Quote::usd, 1, 0);
    put(prices, 1, "COLL", Quote::usd, 1, 0);
    put(prices, 2, "COLL", Quote::usd, 1, 0);
    for (int i = 0; i < 300; ++i) {
        auto e = liquidation(Protocol::compound, id(1), "DEBT", 1 + rng() % 1000, 0, "COLL", rng() % 2000, 0);
        ThresholdTable low, high;
        const Rational t(static_cast<long long>(50 + rng() % 200), 100);
        low.set(Protocol::compound, "COLL", t);
        high.set(Protocol::compound, "COLL", t + Rational(static_cast<long long>(rng() % 50), 100));
        if (enabled_by_update(e, prices, 2, low).liquidatable_at) CHECK(enabled_by_update(e, prices, 2, high).liquidatable_at);
    }
    CHECK_THROWS_AS(enabled_by_update(liquidation(Protocol::compound, id(1), "DEBT", 1, 0, "COLL", 1, 0), prices, 3,
                                      ThresholdTable{}),
                    MissingPrice);
}

TEST_CASE("pattern classes") {
    using T = EventTag;
    auto cls = [](std::vector<T> tags) { return classify_tags(tags); };
    CHECK(cls({T::update, T::liquidation}) == PatternClass::update_then_liquidation);
    CHECK(cls({T::update, T::update, T::liquidation, T::liquidation}) ==
          PatternClass::double_update_then_liquidations);
    CHECK(cls({T::liquidation, T::update}) == PatternClass::other);
    CHECK(cls({T::update}) == PatternClass::other);
    CHECK(cls({T::liquidation}) == PatternClass::other);
    CHECK(cls({}) == PatternClass::other);
    CHECK(cls({T::update, T::update, T::update, T::liquidation}) == PatternClass::other);
}

TEST_CASE("trailing unrelated transactions never change the class") {
    std::mt19937_64 rng(2);
    const std::vector<EventTag> kinds{EventTag::update, EventTag::liquidation, EventTag::other};
    for (int i = 0; i < 2000; ++i) {
        std::vector<EventTag> tags;
        for (std::uint64_t k = rng() % 6; k > 0; --k) tags.push_back(kinds[rng() % 3]);
        auto padded = tags;
        for (std::uint64_t k = 1 + rng() % 3; k > 0; --k) padded.push_back(EventTag::other);
        CHECK(classify_tags(tags) == classify_tags(padded));
    }
}

TEST_CASE("bundle patterns, feed counts and profit split") {
    EventSet events;
    events.updates.push_back({id(1), "ETH-USD", 200000000000, 8, std::nullopt});
    events.updates.push_back({id(2), "BTC-ETH", 15, 0, std::nullopt});
    events.updates.push_back({id(5), "ETH-USD", 200000000000, 8, std::nullopt});
    events.liquidations.push_back(liquidation(Protocol::compound, id(3), "DAI", 100, 0, "COLL", 200, 0, 7));
    events.liquidations.push_back(liquidation(Protocol::compound, id(4), "DAI", 100, 0, "COLL", 110, 0, 7));
    events.liquidations.push_back(liquidation(Protocol::compound, id(6), "DAI", 100, 0, "COLL", 150, 0, 7));
    EventIndex index(events);

    std::vector<BundlePattern> patterns{
        classify_bundle_pattern({7, 0, {id(1), id(2), id(3), id(9)}, BundleTag::flashbots}, index),
        classify_bundle_pattern({7, 1, {id(5), id(6)}, BundleTag::flashbots}, index),
        classify_bundle_pattern({7, 2, {id(9)}, BundleTag::flashbots}, index)};
    CHECK(patterns[0].cls == PatternClass::double_update_then_liquidations);
    CHECK(patterns[0].updates == 2);
    CHECK(patterns[0].feeds == std::vector<std::string>{"ETH-USD", "BTC-ETH"});
    CHECK(patterns[1].cls == PatternClass::update_then_liquidation);
    CHECK(patterns[2].cls == PatternClass::other);

    auto feeds = feed_pair_counts(patterns);
    CHECK(feeds.at("ETH-USD") == 2);
    CHECK(feeds.at("BTC-ETH") == 1);

    PriceStore prices;
    put(prices, 7, "DAI", Quote::usd, 1, 0);
    put(prices, 7, "COLL", Quote::usd, 1, 0);
    auto split = profit_by_bundling_class(events.liquidations, patterns, prices);
    REQUIRE(split.bundled.size() == 2);
    REQUIRE(split.unbundled.size() == 1);
    CHECK(split.bundled[0].usd == 50);   // sorted by profit
    CHECK(split.bundled[1].usd == 100);
    CHECK(split.unbundled[0].tx_hash == id(4));
    CHECK(empirical_cdf(split.bundled, 50) == Rational(1, 2));
    CHECK(empirical_cdf(split.unbundled, 9) == 0);
    CHECK(empirical_cdf({}, 9) == 0);

    auto missing = events.liquidations;
    missing[0].block_number.reset();
    CHECK_THROWS_AS(profit_by_bundling_class(missing, patterns, prices), InvariantViolation);
}
