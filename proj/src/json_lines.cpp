#include "json_lines.hpp"

#include <limits>
#include <stdexcept>

namespace prioscope::jsonl {

namespace {

class ExactSax {
public:
    using number_integer_t = json::number_integer_t;
    using number_unsigned_t = json::number_unsigned_t;
    using number_float_t = json::number_float_t;
    using string_t = json::string_t;
    using binary_t = json::binary_t;

    bool null() { return put(json(nullptr)); }
    bool boolean(bool v) { return put(json(v)); }
    bool number_integer(number_integer_t v) { return put(json(v)); }
    bool number_unsigned(number_unsigned_t v) { return put(json(v)); }
    bool number_float(number_float_t v, const string_t& raw) {
        const bool integral = raw.find_first_of(".eE") == string_t::npos;
        if (integral && !raw.empty() && raw.front() != '-') {
            return put(json::binary(std::vector<std::uint8_t>(raw.begin(), raw.end())));
        }
        return put(json(v));
    }
    bool string(string_t& v) { return put(json(v)); }
    bool binary(binary_t& v) { return put(json::binary(v)); }

    bool start_object(std::size_t) { return open(json::object()); }
    bool key(string_t& k) {
        pending_key_ = k;
        return true;
    }
    bool end_object() { return close(); }
    bool start_array(std::size_t) { return open(json::array()); }
    bool end_array() { return close(); }

    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) {
        error_ = ex.what();
        return false;
    }

    json result;
    std::string error_;

private:
    json* put(json&& value) {
        if (stack_.empty()) {
            result = std::move(value);
            return &result;
        }
        json& parent = *stack_.back();
        if (parent.is_array()) {
            parent.push_back(std::move(value));
            return &parent.back();
        }
        json& slot = parent[pending_key_];
        slot = std::move(value);
        return &slot;
    }
    bool open(json&& container) {
        stack_.push_back(put(std::move(container)));
        return true;
    }
    bool close() {
        stack_.pop_back();
        return true;
    }

    std::vector<json*> stack_;
    std::string pending_key_;
};

std::invalid_argument bad(const char* key, const std::string& what) {
    return std::invalid_argument(std::string("field '") + key + "': " + what);
}

}  // namespace

json parse(std::string_view text) {
    ExactSax sax;
    const bool ok = json::sax_parse(text.begin(), text.end(), &sax);
    if (!ok) throw std::invalid_argument("invalid JSON: " + sax.error_);
    if (!sax.result.is_object()) throw std::invalid_argument("line is not a JSON object");
    return std::move(sax.result);
}

bool has(const json& obj, const char* key) { return obj.contains(key); }

const json& field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw bad(key, "missing");
    return *it;
}

std::uint64_t get_u64(const json& obj, const char* key) {
    const json& v = field(obj, key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw bad(key, "expected a non-negative 64-bit integer");
}

std::int64_t get_i64(const json& obj, const char* key) {
    const json& v = field(obj, key);
    if (v.is_number_unsigned()) {
        auto u = v.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) throw bad(key, "out of range");
        return static_cast<std::int64_t>(u);
    }
    if (v.is_number_integer()) return v.get<std::int64_t>();
    throw bad(key, "expected an integer");
}

BigInt get_big(const json& obj, const char* key) {
    const json& v = field(obj, key);
    if (v.is_number_unsigned()) return BigInt(v.get<std::uint64_t>());
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return BigInt(v.get<std::int64_t>());
    if (v.is_binary()) {
        const auto& bytes = v.get_binary();
        return parse_uint(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    }
    throw bad(key, "expected a non-negative integer");
}

unsigned get_decimals(const json& obj, const char* key) {
    auto d = get_u64(obj, key);
    if (d > 36) throw bad(key, "decimals must be in [0, 36]");
    return static_cast<unsigned>(d);
}

std::string get_string(const json& obj, const char* key) {
    const json& v = field(obj, key);
    if (!v.is_string()) throw bad(key, "expected a string");
    return v.get<std::string>();
}

const json& get_array(const json& obj, const char* key) {
    const json& v = field(obj, key);
    if (!v.is_array()) throw bad(key, "expected an array");
    return v;
}

std::vector<std::string> get_string_array(const json& obj, const char* key) {
    std::vector<std::string> out;
    for (const auto& item : get_array(obj, key)) {
        if (!item.is_string()) throw bad(key, "expected an array of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::string quote(std::string_view text) { return json(std::string(text)).dump(); }

void ObjectWriter::key(const char* k) {
    if (!first_) out_ += ',';
    first_ = false;
    out_ += '"';
    out_ += k;
    out_ += "\":";
}

ObjectWriter& ObjectWriter::str(const char* k, std::string_view value) {
    key(k);
    out_ += quote(value);
    return *this;
}

ObjectWriter& ObjectWriter::num(const char* k, std::uint64_t value) {
    key(k);
    out_ += std::to_string(value);
    return *this;
}

ObjectWriter& ObjectWriter::num(const char* k, std::int64_t value) {
    key(k);
    out_ += std::to_string(value);
    return *this;
}

ObjectWriter& ObjectWriter::num(const char* k, const BigInt& value) {
    key(k);
    out_ += value.str();
    return *this;
}

ObjectWriter& ObjectWriter::str_array(const char* k, const std::vector<std::string>& values) {
    key(k);
    out_ += '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ += ',';
        out_ += quote(values[i]);
    }
    out_ += ']';
    return *this;
}

ObjectWriter& ObjectWriter::raw_array(const char* k, const std::vector<std::string>& items) {
    key(k);
    out_ += '[';
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out_ += ',';
        out_ += items[i];
    }
    out_ += ']';
    return *this;
}

}  // namespace prioscope::jsonl
