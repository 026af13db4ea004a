#include "prioscope/ingest.hpp"

#include <set>
#include <stdexcept>

#include "json_lines.hpp"
#include "prioscope/errors.hpp"

namespace prioscope {

using jsonl::json;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t' || s.back() == '\n')) {
        s.remove_suffix(1);
    }
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return in;
}

/// Calls `handle(line)` for every non-blank line. Parse and invariant
/// errors become MalformedLine with the line number; under skip-and-count
/// they are tallied instead.
template <class Handler>
std::size_t for_each_line(const std::filesystem::path& path, BadLinePolicy policy, Handler&& handle) {
    std::ifstream in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::size_t skipped = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = trim(line);
        if (body.empty()) continue;
        try {
            try {
                handle(body);
            } catch (const UnknownTag& e) {
                if (e.path().empty()) throw UnknownTag(path.string(), line_no, e.value());
                throw;
            } catch (const MalformedLine&) {
                throw;
            } catch (const std::invalid_argument& e) {
                throw MalformedLine(path.string(), line_no, e.what());
            } catch (const InvariantViolation& e) {
                throw MalformedLine(path.string(), line_no, e.what());
            }
        } catch (const MalformedLine&) {
            if (policy == BadLinePolicy::fail_fast) throw;
            ++skipped;
        }
    }
    return skipped;
}

/// Re-throws a location-free error raised by a post-parse check.
[[noreturn]] void reject(const std::string& reason) { throw std::invalid_argument(reason); }

BtcTx parse_btc_tx(const json& j) {
    BtcTx tx;
    tx.txid = jsonl::get_string(j, "txid");
    tx.vsize = jsonl::get_i64(j, "vsize");
    tx.fee = jsonl::get_i64(j, "fee_sat");
    for (const auto& in : jsonl::get_array(j, "inputs")) {
        if (!in.is_object()) reject("inputs must be objects");
        OutPoint op;
        op.txid = jsonl::get_string(in, "txid");
        auto vout = jsonl::get_u64(in, "vout");
        if (vout > 0xffffffffULL) reject("vout out of range");
        op.vout = static_cast<std::uint32_t>(vout);
        tx.inputs.push_back(std::move(op));
    }
    tx.total_output_value = jsonl::get_i64(j, "out_sat");
    return tx;
}

TxStatus parse_status(const std::string& s) {
    if (s == "ok") return TxStatus::ok;
    if (s == "fail") return TxStatus::fail;
    reject("status must be \"ok\" or \"fail\"");
}

EthTx parse_eth_tx(const json& j) {
    auto hash = jsonl::get_string(j, "hash");
    auto from = jsonl::get_string(j, "from");
    auto to = jsonl::get_string(j, "to");
    auto gas_used = jsonl::get_u64(j, "gas_used");
    auto transfer = jsonl::get_big(j, "coinbase_transfer_wei");
    auto status = parse_status(jsonl::get_string(j, "status"));
    const bool has_1559 = jsonl::has(j, "max_fee_per_gas_wei") || jsonl::has(j, "max_priority_fee_per_gas_wei");
    if (!has_1559 && jsonl::has(j, "gas_price_wei")) {
        return EthTx::legacy(std::move(hash), std::move(from), std::move(to), gas_used,
                             jsonl::get_big(j, "gas_price_wei"), transfer, status);
    }
    EthTx tx;
    tx.hash = std::move(hash);
    tx.issuer = std::move(from);
    tx.recipient = std::move(to);
    tx.gas_used = gas_used;
    tx.max_fee_per_gas = jsonl::get_big(j, "max_fee_per_gas_wei");
    tx.max_priority_fee_per_gas = jsonl::get_big(j, "max_priority_fee_per_gas_wei");
    tx.coinbase_transfer = std::move(transfer);
    tx.status = status;
    return tx;
}

std::optional<std::uint64_t> optional_block(const json& j) {
    if (!jsonl::has(j, "block_number")) return std::nullopt;
    return jsonl::get_u64(j, "block_number");
}

std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        parts.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return parts;
}

/// Reads a small TSV config file, every line split on tabs into exactly
/// `columns` fields. Config errors are always fatal.
template <class Handler>
void for_each_tsv_row(const std::filesystem::path& path, std::size_t columns, Handler&& handle) {
    for_each_line(path, BadLinePolicy::fail_fast, [&](std::string_view line) {
        auto parts = split_tabs(line);
        if (parts.size() != columns) {
            reject("expected " + std::to_string(columns) + " tab-separated columns, got " +
                   std::to_string(parts.size()));
        }
        for (const auto& p : parts) {
            if (p.empty()) reject("empty column");
        }
        handle(parts);
    });
}

}  // namespace

// ---------------------------------------------------------------------------
// registries and stores

std::string PoolRegistry::attribute(const ChainBlock& block) const {
    const bool exact = block.chain() == Chain::eth;
    for (const auto& [marker, pool] : rules_) {
        if (exact ? block.miner_marker == marker : block.miner_marker.find(marker) != std::string::npos) {
            return pool;
        }
    }
    return std::string(kUnknownPool);
}

AccelLabelSet::AccelLabelSet(const std::vector<std::string>& ids) {
    for (const auto& id : ids) insert(id);
}

bool AccelLabelSet::insert(const std::string& id) {
    if (!index_.insert(id).second) return false;
    ids_.push_back(id);
    return true;
}

bool PriceStore::add(PricePoint point) {
    auto key = std::make_tuple(point.block_number, point.asset, point.quote);
    if (index_.count(key)) return false;
    index_.emplace(std::move(key), points_.size());
    points_.push_back(std::move(point));
    return true;
}

std::optional<Rational> PriceStore::find(std::uint64_t block, const std::string& asset, Quote quote) const {
    auto it = index_.find(std::make_tuple(block, asset, quote));
    if (it == index_.end()) return std::nullopt;
    return points_[it->second].value();
}

Rational PriceStore::at(std::uint64_t block, const std::string& asset, Quote quote) const {
    auto price = find(block, asset, quote);
    if (!price) throw MissingPrice(asset, block, std::string(to_string(quote)));
    return *price;
}

void ThresholdTable::set(Protocol protocol, const std::string& asset, Rational threshold) {
    table_[{protocol, asset}] = std::move(threshold);
}

const Rational& ThresholdTable::lookup(Protocol protocol, const std::string& asset) const {
    auto it = table_.find({protocol, asset});
    return it == table_.end() ? fallback_ : it->second;
}

// ---------------------------------------------------------------------------
// single-line parsers

ChainBlock parse_block_line(std::string_view line, Chain chain) {
    json j = jsonl::parse(line);
    auto declared = parse_chain(jsonl::get_string(j, "chain"));
    if (!declared) reject("chain must be \"btc\" or \"eth\"");
    if (*declared != chain) reject("expected a " + std::string(to_string(chain)) + " block");

    ChainBlock block;
    block.timestamp = jsonl::get_i64(j, "timestamp");
    if (chain == Chain::btc) {
        block.height = jsonl::get_u64(j, "height");
        block.miner_marker = jsonl::get_string(j, "coinbase_tag");
        if (jsonl::has(j, "base_fee_per_gas_wei")) reject("btc block must not carry base_fee_per_gas_wei");
        BtcTxList txs;
        for (const auto& t : jsonl::get_array(j, "txs")) {
            if (!t.is_object()) reject("txs must be objects");
            txs.push_back(parse_btc_tx(t));
        }
        block.txs = std::move(txs);
    } else {
        block.height = jsonl::get_u64(j, "number");
        block.miner_marker = jsonl::get_string(j, "miner");
        block.base_fee_per_gas = jsonl::get_big(j, "base_fee_per_gas_wei");
        EthTxList txs;
        for (const auto& t : jsonl::get_array(j, "txs")) {
            if (!t.is_object()) reject("txs must be objects");
            txs.push_back(parse_eth_tx(t));
        }
        block.txs = std::move(txs);
    }
    validate(block);
    return block;
}

BundleRecord parse_bundle_line(std::string_view line) {
    json j = jsonl::parse(line);
    BundleRecord b;
    b.block_number = jsonl::get_u64(j, "block_number");
    auto index = jsonl::get_u64(j, "bundle_index");
    if (index > 0xffffffffULL) reject("bundle_index out of range");
    b.bundle_index = static_cast<std::uint32_t>(index);
    b.tx_hashes = jsonl::get_string_array(j, "tx_hashes");
    auto tag_text = jsonl::get_string(j, "tag");
    auto tag = parse_bundle_tag(tag_text);
    // Location is attached by the file loader.
    if (!tag) throw UnknownTag("", 0, tag_text);
    b.tag = *tag;
    validate(b);
    return b;
}

MempoolSnapshot parse_snapshot_line(std::string_view line) {
    json j = jsonl::parse(line);
    MempoolSnapshot s;
    s.timestamp = jsonl::get_i64(j, "timestamp");
    s.pending = jsonl::get_string_array(j, "pending");
    validate(s);
    return s;
}

PricePoint parse_price_line(std::string_view line) {
    json j = jsonl::parse(line);
    PricePoint p;
    p.block_number = jsonl::get_u64(j, "block_number");
    p.asset = jsonl::get_string(j, "asset");
    auto quote = parse_quote(jsonl::get_string(j, "quote"));
    if (!quote) reject("quote must be \"ETH\" or \"USD\"");
    p.quote = *quote;
    p.price = jsonl::get_big(j, "price");
    p.decimals = jsonl::get_decimals(j, "decimals");
    validate(p);
    return p;
}

LiquidationEvent parse_liquidation_line(std::string_view line) {
    json j = jsonl::parse(line);
    LiquidationEvent e;
    auto protocol = parse_protocol(jsonl::get_string(j, "protocol"));
    if (!protocol) reject("protocol must be \"aave\" or \"compound\"");
    e.protocol = *protocol;
    e.tx_hash = jsonl::get_string(j, "tx_hash");
    e.debt_asset = jsonl::get_string(j, "debt_asset");
    e.debt_repaid = jsonl::get_big(j, "debt_repaid");
    e.debt_decimals = jsonl::get_decimals(j, "debt_decimals");
    e.collateral_asset = jsonl::get_string(j, "collateral_asset");
    e.collateral_seized = jsonl::get_big(j, "collateral_seized");
    e.collateral_decimals = jsonl::get_decimals(j, "collateral_decimals");
    e.block_number = optional_block(j);
    validate(e);
    return e;
}

OracleUpdate parse_oracle_update_line(std::string_view line) {
    json j = jsonl::parse(line);
    OracleUpdate u;
    u.tx_hash = jsonl::get_string(j, "tx_hash");
    u.feed = jsonl::get_string(j, "feed");
    u.price = jsonl::get_big(j, "price");
    u.decimals = jsonl::get_decimals(j, "decimals");
    u.block_number = optional_block(j);
    validate(u);
    return u;
}

// ---------------------------------------------------------------------------
// streaming loaders

BlockStream::BlockStream(const std::filesystem::path& path, Chain chain, BadLinePolicy policy)
    : path_(path.string()), in_(open_input(path)), chain_(chain), policy_(policy) {}

std::optional<ChainBlock> BlockStream::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        std::string_view body = trim(line);
        if (body.empty()) continue;
        try {
            return parse_block_line(body, chain_);
        } catch (const std::invalid_argument& e) {
            if (policy_ == BadLinePolicy::fail_fast) throw MalformedLine(path_, line_no_, e.what());
        } catch (const InvariantViolation& e) {
            if (policy_ == BadLinePolicy::fail_fast) throw MalformedLine(path_, line_no_, e.what());
        }
        ++skipped_;
    }
    return std::nullopt;
}

Loaded<ChainBlock> load_blocks(const std::filesystem::path& path, Chain chain, BadLinePolicy policy) {
    Loaded<ChainBlock> out;
    BlockStream stream(path, chain, policy);
    while (auto block = stream.next()) out.records.push_back(std::move(*block));
    out.skipped = stream.skipped();
    return out;
}

Loaded<BundleRecord> load_bundles(const std::filesystem::path& path, BadLinePolicy policy) {
    Loaded<BundleRecord> out;
    std::set<BundleRef> seen;
    out.skipped = for_each_line(path, policy, [&](std::string_view line) {
        BundleRecord b = parse_bundle_line(line);
        if (!seen.insert(b.ref()).second) {
            reject("duplicate bundle (" + std::to_string(b.block_number) + ", " +
                   std::to_string(b.bundle_index) + ")");
        }
        out.records.push_back(std::move(b));
    });
    return out;
}

Loaded<MempoolSnapshot> load_snapshots(const std::filesystem::path& path, BadLinePolicy policy) {
    Loaded<MempoolSnapshot> out;
    out.skipped = for_each_line(path, policy, [&](std::string_view line) {
        auto s = parse_snapshot_line(line);
        if (!out.records.empty() && s.timestamp <= out.records.back().timestamp) {
            reject("snapshot timestamps must be strictly increasing");
        }
        out.records.push_back(std::move(s));
    });
    return out;
}

LoadedPrices load_prices(const std::filesystem::path& path, BadLinePolicy policy) {
    LoadedPrices out;
    out.skipped = for_each_line(path, policy, [&](std::string_view line) {
        auto p = parse_price_line(line);
        const std::string key = p.asset + "-" + std::string(to_string(p.quote)) + " at block " +
                                std::to_string(p.block_number);
        if (!out.store.add(std::move(p))) reject("duplicate price for " + key);
    });
    return out;
}

LoadedEvents load_events(const std::filesystem::path& path, BadLinePolicy policy) {
    LoadedEvents out;
    out.skipped = for_each_line(path, policy, [&](std::string_view line) {
        json probe = jsonl::parse(line);
        if (jsonl::has(probe, "feed")) {
            out.events.updates.push_back(parse_oracle_update_line(line));
        } else if (jsonl::has(probe, "protocol")) {
            out.events.liquidations.push_back(parse_liquidation_line(line));
        } else {
            reject("neither a liquidation (\"protocol\") nor an oracle update (\"feed\")");
        }
    });
    return out;
}

AccelLabelSet load_accel_labels(const std::filesystem::path& path, BadLinePolicy policy) {
    AccelLabelSet labels;
    for_each_line(path, policy, [&](std::string_view line) {
        if (!is_hex_id(line, 64)) reject("label must be a 64-hex-char txid");
        labels.insert(std::string(line));
    });
    return labels;
}

PoolRegistry load_pool_registry(const std::filesystem::path& path) {
    std::vector<std::pair<std::string, std::string>> rules;
    for_each_tsv_row(path, 2, [&](const std::vector<std::string>& cols) { rules.emplace_back(cols[0], cols[1]); });
    return PoolRegistry(std::move(rules));
}

ContractRegistry load_contract_registry(const std::filesystem::path& path) {
    ContractRegistry registry;
    for_each_tsv_row(path, 2, [&](const std::vector<std::string>& cols) {
        if (!is_hex_id(cols[0], 40)) reject("contract address must be 40 hex chars");
        if (!registry.emplace(cols[0], cols[1]).second) reject("duplicate contract address " + cols[0]);
    });
    return registry;
}

ThresholdTable load_thresholds(const std::filesystem::path& path) {
    ThresholdTable table;
    for_each_tsv_row(path, 3, [&](const std::vector<std::string>& cols) {
        auto protocol = parse_protocol(cols[0]);
        if (!protocol) reject("protocol must be aave or compound");
        Rational threshold = parse_decimal(cols[2]);
        if (threshold <= 0) reject("threshold must be positive");
        table.set(*protocol, cols[1], std::move(threshold));
    });
    return table;
}

// ---------------------------------------------------------------------------
// canonical serialization

std::string to_jsonl(const ChainBlock& block) {
    jsonl::ObjectWriter w;
    std::vector<std::string> txs;
    if (block.chain() == Chain::btc) {
        for (const auto& tx : block.btc_txs()) {
            std::vector<std::string> inputs;
            for (const auto& in : tx.inputs) {
                inputs.push_back(jsonl::ObjectWriter{}
                                     .str("txid", in.txid)
                                     .num("vout", static_cast<std::uint64_t>(in.vout))
                                     .finish());
            }
            txs.push_back(jsonl::ObjectWriter{}
                              .str("txid", tx.txid)
                              .num("vsize", tx.vsize)
                              .num("fee_sat", tx.fee)
                              .raw_array("inputs", inputs)
                              .num("out_sat", tx.total_output_value)
                              .finish());
        }
        return w.str("chain", "btc")
            .num("height", block.height)
            .num("timestamp", block.timestamp)
            .str("coinbase_tag", block.miner_marker)
            .raw_array("txs", txs)
            .finish();
    }
    for (const auto& tx : block.eth_txs()) {
        txs.push_back(jsonl::ObjectWriter{}
                          .str("hash", tx.hash)
                          .str("from", tx.issuer)
                          .str("to", tx.recipient)
                          .num("gas_used", tx.gas_used)
                          .num("max_fee_per_gas_wei", tx.max_fee_per_gas)
                          .num("max_priority_fee_per_gas_wei", tx.max_priority_fee_per_gas)
                          .num("coinbase_transfer_wei", tx.coinbase_transfer)
                          .str("status", tx.status == TxStatus::ok ? "ok" : "fail")
                          .finish());
    }
    return w.str("chain", "eth")
        .num("number", block.height)
        .num("timestamp", block.timestamp)
        .str("miner", block.miner_marker)
        .num("base_fee_per_gas_wei", block.base_fee_per_gas.value_or(Wei{0}))
        .raw_array("txs", txs)
        .finish();
}

std::string to_jsonl(const BundleRecord& bundle) {
    return jsonl::ObjectWriter{}
        .num("block_number", bundle.block_number)
        .num("bundle_index", static_cast<std::uint64_t>(bundle.bundle_index))
        .str_array("tx_hashes", bundle.tx_hashes)
        .str("tag", to_string(bundle.tag))
        .finish();
}

std::string to_jsonl(const MempoolSnapshot& snapshot) {
    return jsonl::ObjectWriter{}.num("timestamp", snapshot.timestamp).str_array("pending", snapshot.pending).finish();
}

std::string to_jsonl(const PricePoint& point) {
    return jsonl::ObjectWriter{}
        .num("block_number", point.block_number)
        .str("asset", point.asset)
        .str("quote", to_string(point.quote))
        .num("price", point.price)
        .num("decimals", static_cast<std::uint64_t>(point.decimals))
        .finish();
}

std::string to_jsonl(const LiquidationEvent& event) {
    jsonl::ObjectWriter w;
    w.str("protocol", to_string(event.protocol))
        .str("tx_hash", event.tx_hash)
        .str("debt_asset", event.debt_asset)
        .num("debt_repaid", event.debt_repaid)
        .num("debt_decimals", static_cast<std::uint64_t>(event.debt_decimals))
        .str("collateral_asset", event.collateral_asset)
        .num("collateral_seized", event.collateral_seized)
        .num("collateral_decimals", static_cast<std::uint64_t>(event.collateral_decimals));
    if (event.block_number) w.num("block_number", *event.block_number);
    return w.finish();
}

std::string to_jsonl(const OracleUpdate& update) {
    jsonl::ObjectWriter w;
    w.str("tx_hash", update.tx_hash)
        .str("feed", update.feed)
        .num("price", update.price)
        .num("decimals", static_cast<std::uint64_t>(update.decimals));
    if (update.block_number) w.num("block_number", *update.block_number);
    return w.finish();
}

}  // namespace prioscope
