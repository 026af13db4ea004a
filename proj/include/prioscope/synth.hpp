#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "prioscope/chain_model.hpp"
#include "prioscope/ingest.hpp"

namespace prioscope {

/// Parameters of a synthetic corpus. Fee bounds are sat/vbyte for Bitcoin
/// and miner tip in gwei for Ethereum. Bundles and DeFi events exist only
/// for Ethereum corpora.
struct SynthSpec {
    std::uint64_t seed = 42;
    Chain chain = Chain::btc;
    std::uint32_t blocks = 10;
    std::uint32_t min_txs_per_block = 100;
    std::uint32_t max_txs_per_block = 150;
    std::uint64_t fee_min = 1;
    std::uint64_t fee_max = 500;
    std::uint32_t planted_accelerations = 0;  // per block
    std::uint32_t planted_h2 = 0;             // corpus total
    std::uint32_t planted_h3 = 0;             // corpus total
    std::uint32_t decoy_bundles = 0;          // corpus total, never match a pattern
    double planted_private_share = 0.0;       // fraction of ordinary txs kept out of every snapshot
    std::uint32_t liquidations = 0;           // corpus total, every other one bundled with an oracle update
};

SynthSpec synth_spec_from_json(const std::string& text);
std::string synth_spec_to_json(const SynthSpec& spec);

struct GroundTruth {
    std::vector<std::string> accelerated;
    std::vector<std::string> private_txs;
    std::vector<BundleRef> h2_bundles;
    std::vector<BundleRef> h3_bundles;
};

std::string ground_truth_to_json(const GroundTruth& truth);

struct Corpus {
    SynthSpec spec;
    std::vector<ChainBlock> blocks;
    std::vector<MempoolSnapshot> snapshots;
    std::vector<BundleRecord> bundles;
    EventSet events;
    std::vector<PricePoint> prices;
    std::vector<std::pair<std::string, std::string>> pool_rules;
    std::vector<std::pair<std::string, std::string>> contracts;  // address, protocol
    GroundTruth truth;
};

/// Deterministic generator: the corpus is a pure function of the spec.
///
/// Blocks are in fee order except that the planted accelerated
/// transactions, which carry the corpus-minimum fee, sit directly below
/// the coinbase (Bitcoin) or at the top (Ethereum). Planted bundles and
/// DeFi transactions are appended at the end of their block, so only
/// their zero tips affect the fee ranking. One snapshot precedes every
/// block and lists that block's public transactions.
///
/// Throws InfeasibleSpec when the spec cannot guarantee its ground truth,
/// in particular when a planted transaction could score below SPPE 99
/// (needs every block to hold at least 100 * (2k - 1 + z) transactions,
/// k planted and z zero-tip bundle transactions per block).
Corpus gen_corpus(const SynthSpec& spec);

/// Writes the corpus in the ingest formats plus ground_truth.json and
/// spec.json. Returns the paths written.
std::vector<std::filesystem::path> write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

/// Portable random source: MT19937-64 with unbiased range reduction, so a
/// given seed yields the same corpus on every standard library.
class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n);
    /// Uniform in [lo, hi].
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi);
    /// Octave-wise log-uniform integer in [lo, hi] with lo >= 1: picks a
    /// power-of-two band uniformly, then a value uniformly inside it.
    std::uint64_t log_uniform(std::uint64_t lo, std::uint64_t hi);
    /// True with probability ppm / 1'000'000.
    bool chance_ppm(std::uint32_t ppm) { return below(1'000'000) < ppm; }
    /// Lowercase hex string of `chars` digits.
    std::string hex(std::size_t chars);

private:
    std::mt19937_64 engine_;
};

}  // namespace prioscope
