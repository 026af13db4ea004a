#include <doctest.h>

#include <random>

#include "builders.hpp"
#include "prioscope/errors.hpp"

using namespace prioscope;
using build::gwei;
using build::id;

TEST_CASE("effective gas price is min(max_fee, base + tip)") {
    const auto tx = build::eth_tx(id(1), id(2, 40), gwei(100), gwei(2), 21000);
    CHECK(effective_gas_price(tx, gwei(50)) == gwei(52));
    CHECK(effective_gas_price(tx, gwei(99)) == gwei(100));   // capped
    CHECK(effective_gas_price(tx, gwei(100)) == gwei(100));  // base equals cap, tip squeezed to 0
    CHECK(miner_tip_per_gas(tx, gwei(99)) == gwei(1));
    CHECK(tx_fee_paid(tx, gwei(50)) == gwei(52) * 21000);
    CHECK_THROWS_AS(effective_gas_price(tx, gwei(101)), BaseFeeExceedsMaxFee);
}

TEST_CASE("legacy transactions use their gas price as cap and tip") {
    const auto tx = EthTx::legacy(id(1), id(2, 40), "", 21000, gwei(30), 0, TxStatus::ok);
    CHECK(effective_gas_price(tx, gwei(10)) == gwei(30));
    CHECK(miner_tip_per_gas(tx, gwei(10)) == gwei(20));
    CHECK_NOTHROW(validate(tx));
}

TEST_CASE("miner reward counts the coinbase transfer") {
    const auto tx = build::eth_tx(id(1), id(2, 40), gwei(200), gwei(3), 100000, gwei(400000));
    CHECK(tx_miner_reward(tx, gwei(10)) == gwei(3) * 100000 + gwei(400000));
}

TEST_CASE("reward properties on random transactions") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const Wei base(rng() % 200'000'000'000ULL);
        const Wei cap = base + Wei(rng() % 100'000'000'000ULL);
        const Wei tip(rng() % 120'000'000'000ULL);
        const Wei transfer(rng() % 3 == 0 ? 0 : rng());
        const std::uint64_t gas = 21000 + rng() % 1'000'000;
        auto tx = build::eth_tx(id(1), id(2, 40), cap, tip > cap ? cap : tip, gas, transfer);
        const Wei reward = tx_miner_reward(tx, base);
        CHECK(reward >= transfer);
        CHECK(effective_gas_price(tx, base) <= tx.max_fee_per_gas);
        CHECK(effective_gas_price(tx, base) >= base);
        // A larger tip never lowers the reward.
        auto richer = tx;
        richer.max_priority_fee_per_gas = tx.max_priority_fee_per_gas + 1;
        if (richer.max_priority_fee_per_gas <= richer.max_fee_per_gas) CHECK(tx_miner_reward(richer, base) >= reward);
    }
}

TEST_CASE("fee rate ordering is a strict weak order") {
    std::mt19937_64 rng(5);
    std::vector<FeeRate> rates;
    for (int i = 0; i < 60; ++i) rates.push_back({static_cast<std::int64_t>(rng() % 50), 1 + static_cast<std::int64_t>(rng() % 6)});
    for (const auto& a : rates) {
        CHECK_FALSE(a < a);
        for (const auto& b : rates) {
            if (a < b) CHECK_FALSE(b < a);
            const bool a_eq_b = !(a < b) && !(b < a);
            for (const auto& c : rates) {
                if (a < b && b < c) CHECK(a < c);
                const bool b_eq_c = !(b < c) && !(c < b);
                if (a_eq_b && b_eq_c) CHECK((!(a < c) && !(c < a)));
            }
        }
    }
    CHECK(FeeRate{2, 1} == FeeRate{4, 2});
    CHECK(FeeRate{1, 3} < FeeRate{1, 2});
    // No overflow at extreme magnitudes.
    CHECK(FeeRate{INT64_MAX, 2} > FeeRate{INT64_MAX - 1, 2});
}

TEST_CASE("validation rejects malformed records") {
    CHECK_THROWS_AS(validate(build::btc_tx("abc", 1)), InvariantViolation);
    CHECK_THROWS_AS(validate(build::btc_tx(id(1), 1, 0)), InvariantViolation);
    CHECK_THROWS_AS(validate(build::btc_tx(id(1), -1)), InvariantViolation);
    CHECK_THROWS_AS(validate(build::btc_tx(id(1), 1, 100, {{"zz", 0}})), InvariantViolation);

    auto tx = build::eth_tx(id(1), id(2, 40), gwei(10), gwei(11), 21000);
    CHECK_THROWS_AS(validate(tx), InvariantViolation);  // tip above cap
    tx = build::eth_tx(id(1), id(2, 40), gwei(10), gwei(1), 0);
    CHECK_THROWS_AS(validate(tx), InvariantViolation);  // no gas
    tx = build::eth_tx(id(1), "xyz", gwei(10), gwei(1), 1);
    CHECK_THROWS_AS(validate(tx), InvariantViolation);

    auto dup = build::btc_block(5, {build::btc_tx(id(9), 1), build::btc_tx(id(9), 2)});
    CHECK_THROWS_AS(validate(dup), InvariantViolation);

    auto eth = build::eth_block(1, gwei(1), {});
    eth.base_fee_per_gas.reset();
    CHECK_THROWS_AS(validate(eth), InvariantViolation);
    auto btc = build::btc_block(1, {});
    btc.base_fee_per_gas = Wei(1);
    CHECK_THROWS_AS(validate(btc), InvariantViolation);
}

TEST_CASE("chain-specific accessors") {
    auto btc = build::btc_block(1, {build::btc_tx(id(3), 10)});
    CHECK(btc.chain() == Chain::btc);
    CHECK(btc.tx_count() == 2);
    CHECK_THROWS_AS(btc.eth_txs(), InvariantViolation);
    auto eth = build::eth_block(1, gwei(1), {});
    CHECK(eth.chain() == Chain::eth);
    CHECK_THROWS_AS(eth.btc_txs(), InvariantViolation);
}

TEST_CASE("label parsers") {
    CHECK(parse_chain("btc") == Chain::btc);
    CHECK_FALSE(parse_chain("BTC").has_value());
    CHECK(parse_bundle_tag("miner_payout") == BundleTag::miner_payout);
    CHECK_FALSE(parse_bundle_tag("nonsense").has_value());
    CHECK(is_feed_label("ETH-USD"));
    CHECK_FALSE(is_feed_label("ETHUSD"));
    CHECK_FALSE(is_feed_label("ETH-"));
    CHECK(reference_quote(Protocol::aave) == Quote::eth);
    CHECK(reference_quote(Protocol::compound) == Quote::usd);
}
