#pragma once

// Internal helpers for reading and writing JSON-lines records.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "prioscope/money.hpp"

namespace prioscope::jsonl {

using nlohmann::json;

/// Parses one JSON document. Integers that do not fit in 64 bits are kept
/// as their exact digit string (stored as a binary value, which plain JSON
/// text can never produce). Throws std::invalid_argument.
json parse(std::string_view text);

/// Field accessors; each throws std::invalid_argument naming the key.
const json& field(const json& obj, const char* key);
bool has(const json& obj, const char* key);
std::uint64_t get_u64(const json& obj, const char* key);
std::int64_t get_i64(const json& obj, const char* key);
BigInt get_big(const json& obj, const char* key);
unsigned get_decimals(const json& obj, const char* key);
std::string get_string(const json& obj, const char* key);
std::vector<std::string> get_string_array(const json& obj, const char* key);
const json& get_array(const json& obj, const char* key);

/// Builds a compact JSON object with keys in insertion order.
class ObjectWriter {
public:
    ObjectWriter& str(const char* key, std::string_view value);
    ObjectWriter& num(const char* key, std::uint64_t value);
    ObjectWriter& num(const char* key, std::int64_t value);
    ObjectWriter& num(const char* key, const BigInt& value);
    ObjectWriter& str_array(const char* key, const std::vector<std::string>& values);
    /// `items` are already-serialized JSON values.
    ObjectWriter& raw_array(const char* key, const std::vector<std::string>& items);
    std::string finish() const { return out_ + "}"; }

private:
    void key(const char* k);
    std::string out_ = "{";
    bool first_ = true;
};

std::string quote(std::string_view text);

}  // namespace prioscope::jsonl
