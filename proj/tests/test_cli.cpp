#include <doctest.h>

#include "oracles.hpp"
#include "prioscope/cli.hpp"

namespace fs = std::filesystem;
using prioscope::cli::run;

namespace {

const std::string kFixtures = FIXTURE_DIR;

/// Every regular file under `dir`, by name.
std::map<std::string, std::string> contents(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) out[e.path().filename().string()] = oracle::slurp(e.path());
    return out;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
    const auto out = oracle::temp_dir("cli_usage");
    CHECK(run({"sppe", "--out", out.string()}) == 1);  // no --blocks
    CHECK(run({"nonsense"}) == 1);
    CHECK(run({}) == 1);
    const std::string blocks = kFixtures + "/btc_pool_day.jsonl";
    CHECK(run({"sppe", "--blocks", blocks, "--out", out.string(), "--threshold", "0"}) == 1);
    CHECK(run({"sppe", "--blocks", blocks, "--out", out.string(), "--threshold", "abc"}) == 1);
    CHECK(run({"sppe", "--blocks", blocks, "--out", out.string(), "--chain", "doge"}) == 1);
    CHECK(run({"bundles", "--blocks", blocks, "--out", out.string()}) == 1);  // needs --bundles
}

TEST_CASE("existing reports are kept unless --force") {
    const auto out = oracle::temp_dir("cli_force");
    const std::string blocks = kFixtures + "/btc_pool_day.jsonl";
    REQUIRE(run({"pools", "--blocks", blocks, "--out", out.string()}) == 0);
    oracle::spit(out / "pool_shares.csv", "keep me");
    CHECK(run({"pools", "--blocks", blocks, "--out", out.string()}) == 1);
    CHECK(oracle::slurp(out / "pool_shares.csv") == "keep me");
    CHECK(run({"pools", "--blocks", blocks, "--out", out.string(), "--force"}) == 0);
    CHECK(oracle::slurp(out / "pool_shares.csv") != "keep me");
}

TEST_CASE("malformed data exits 2 unless skipped") {
    const auto dir = oracle::temp_dir("cli_bad");
    const auto lines = oracle::slurp(kFixtures + "/btc_pool_day.jsonl");
    const auto first = lines.substr(0, lines.find('\n') + 1);
    oracle::spit(dir / "blocks.jsonl", first + "{broken\n" + first);
    CHECK(run({"pools", "--blocks", (dir / "blocks.jsonl").string(), "--out", (dir / "o").string()}) == 2);
    CHECK(run({"pools", "--blocks", (dir / "blocks.jsonl").string(), "--out", (dir / "o").string(), "--skip-bad"}) ==
          0);
    CHECK(run({"pools", "--blocks", (dir / "missing.jsonl").string(), "--out", (dir / "o2").string()}) == 2);
}

TEST_CASE("pool subset report") {
    const auto out = oracle::temp_dir("cli_pools");
    REQUIRE(run({"pools", "--blocks", kFixtures + "/btc_pool_day.jsonl", "--pools", kFixtures + "/btc_pools.tsv",
                 "--subset", "F2Pool,AntPool,Binance,Huobi,ViaBTC", "--out", out.string()}) == 0);
    const auto rows = oracle::read_csv(out / "subset_shares.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][0] == "2020-11-30");
    CHECK(rows[1][2] == "55.20");
}

TEST_CASE("per-transaction economics reproduce the experiment table") {
    const auto out = oracle::temp_dir("cli_econ");
    REQUIRE(run({"bundles", "--economics", "--blocks", kFixtures + "/eth_private_experiment.jsonl", "--out",
                 out.string()}) == 0);
    const auto rows = oracle::read_csv(out / "tx_econ.csv");
    REQUIRE(rows.size() == 9);
    REQUIRE(rows[0][7] == "gas_price_gwei");
    const std::vector<std::string> gas_price{"90.70919543",  "107.24228063", "116.25583529", "114.75160643",
                                             "125.38021870", "122.60367762", "106.39675202", "85.67488108"};
    const std::vector<std::string> fee_paid{"0.00190489", "0.00225209", "0.00244137", "0.00240978",
                                            "0.00263298", "0.00257468", "0.00223433", "0.00179917"};
    for (std::size_t i = 0; i < gas_price.size(); ++i) {
        CAPTURE(i);
        CHECK(rows[i + 1][7] == gas_price[i] + "0");
        const double fee = std::stod(rows[i + 1][8]);
        CHECK(std::abs(fee - 21000 * std::stod(gas_price[i]) * 1e-9) < 1e-12);
        CHECK(prioscope::format_fixed(prioscope::parse_decimal(rows[i + 1][8]), 8) == fee_paid[i]);
    }
}

TEST_CASE("synthetic corpus through the sppe and private commands") {
    const auto dir = oracle::temp_dir("cli_synth");
    oracle::spit(dir / "spec.json", R"({"seed": 9, "blocks": 6, "planted_accelerations": 1, "planted_private_share": 0.2})");
    REQUIRE(run({"synth", "--spec", (dir / "spec.json").string(), "--out", (dir / "c").string()}) == 0);
    REQUIRE(run({"sppe", "--blocks", (dir / "c/blocks.jsonl").string(), "--pools", (dir / "c/pools.tsv").string(),
                 "--out", (dir / "r").string()}) == 0);
    const auto truth = oracle::slurp(dir / "c/ground_truth.json");
    const auto flagged = oracle::slurp(dir / "r/flagged.txt");
    std::size_t lines = 0;
    for (std::size_t p = 0; (p = flagged.find('\n', p)) != std::string::npos; ++p) ++lines;
    CHECK(lines == 6);
    for (std::size_t p = 0; p < flagged.size(); p += 65) CHECK(truth.find(flagged.substr(p, 64)) != std::string::npos);

    REQUIRE(run({"private", "--blocks", (dir / "c/blocks.jsonl").string(), "--snapshots",
                 (dir / "c/snapshots.jsonl").string(), "--out", (dir / "p").string()}) == 0);
    const auto priv = oracle::read_csv(dir / "p/private.csv");
    CHECK(priv.size() > 1);
    for (std::size_t i = 1; i < priv.size(); ++i) CHECK(truth.find(priv[i][2]) != std::string::npos);
}

TEST_CASE("synth is reproducible from the seed") {
    const auto a = oracle::temp_dir("cli_seed_a"), b = oracle::temp_dir("cli_seed_b");
    REQUIRE(run({"synth", "--seed", "42", "--chain", "eth", "--out", a.string()}) == 0);
    REQUIRE(run({"synth", "--seed", "42", "--chain", "eth", "--out", b.string()}) == 0);
    CHECK(contents(a) == contents(b));
    CHECK(contents(a).size() == 9);
}

TEST_CASE("worker count never changes the reports") {
    const auto dir = oracle::temp_dir("cli_workers");
    oracle::spit(dir / "spec.json",
                 R"({"seed": 5, "chain": "eth", "blocks": 12, "txs_per_block": [400, 420], "planted_accelerations": 1,)"
                 R"( "planted_h2": 5, "planted_h3": 4, "decoy_bundles": 6, "liquidations": 6, "planted_private_share": 0.1})");
    REQUIRE(run({"synth", "--spec", (dir / "spec.json").string(), "--out", (dir / "c").string()}) == 0);
    const auto c = [&](const char* f) { return (dir / "c" / f).string(); };
    for (const char* workers : {"1", "8"}) {
        const auto out = (dir / (std::string("w") + workers)).string();
        CHECK(run({"sppe", "--chain", "eth", "--blocks", c("blocks.jsonl"), "--pools", c("pools.tsv"), "--out", out,
                   "--workers", workers}) == 0);
        CHECK(run({"private", "--chain", "eth", "--blocks", c("blocks.jsonl"), "--snapshots", c("snapshots.jsonl"),
                   "--out", out, "--workers", workers}) == 0);
        CHECK(run({"bundles", "--blocks", c("blocks.jsonl"), "--bundles", c("bundles.jsonl"), "--contracts",
                   c("contracts.tsv"), "--economics", "--out", out, "--workers", workers}) == 0);
        CHECK(run({"defi", "--events", c("events.jsonl"), "--prices", c("prices.jsonl"), "--bundles",
                   c("bundles.jsonl"), "--blocks", c("blocks.jsonl"), "--out", out, "--workers", workers}) == 0);
        CHECK(run({"delay", "--chain", "eth", "--blocks", c("blocks.jsonl"), "--snapshots", c("snapshots.jsonl"),
                   "--out", out, "--workers", workers}) == 0);
    }
    const auto one = contents(dir / "w1");
    CHECK(one.size() >= 15);
    CHECK(one == contents(dir / "w8"));
}

TEST_CASE("delay and crosscheck on the acceleration experiment") {
    const auto out = oracle::temp_dir("cli_delay");
    REQUIRE(run({"delay", "--blocks", kFixtures + "/btc_acceleration_experiment.jsonl", "--snapshots",
                 kFixtures + "/btc_acceleration_snapshots.jsonl", "--labels",
                 kFixtures + "/btc_acceleration_labels.txt", "--out", out.string()}) == 0);
    const auto rows = oracle::read_csv(out / "delay_stats.csv");
    bool found = false;
    for (const auto& r : rows) {
        if (r.size() > 2 && r[0] == "accelerated" && r[1] == "delay_blocks") {
            found = true;
            CHECK(r == std::vector<std::string>{"accelerated", "delay_blocks", "10", "1.00", "1.00", "2.00", "2.00",
                                                "3.00", "1.80"});
        }
    }
    CHECK(found);

    REQUIRE(run({"crosscheck", "--blocks", kFixtures + "/btc_acceleration_experiment.jsonl", "--labels",
                 kFixtures + "/btc_acceleration_labels.txt", "--pools", kFixtures + "/btc_pools.tsv", "--out",
                 out.string()}) == 0);
    CHECK(oracle::read_csv(out / "crosscheck.csv").size() == 2);
}
