#include "prioscope/money.hpp"

#include <stdexcept>

namespace prioscope {

BigInt pow10(unsigned exponent) {
    BigInt result{1};
    for (unsigned i = 0; i < exponent; ++i) result *= 10;
    return result;
}

BigInt parse_uint(std::string_view digits) {
    if (digits.empty()) throw std::invalid_argument("empty integer literal");
    BigInt value{0};
    for (char c : digits) {
        if (c < '0' || c > '9') {
            throw std::invalid_argument("not a non-negative integer: '" + std::string(digits) + "'");
        }
        value *= 10;
        value += c - '0';
    }
    return value;
}

Rational parse_decimal(std::string_view text) {
    std::string_view body = text;
    bool negative = false;
    if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }
    auto dot = body.find('.');
    std::string_view whole = body.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : body.substr(dot + 1);
    if (whole.empty() && frac.empty()) {
        throw std::invalid_argument("not a decimal number: '" + std::string(text) + "'");
    }
    if (dot != std::string_view::npos && frac.empty()) {
        throw std::invalid_argument("not a decimal number: '" + std::string(text) + "'");
    }
    BigInt w = whole.empty() ? BigInt{0} : parse_uint(whole);
    BigInt f = frac.empty() ? BigInt{0} : parse_uint(frac);
    Rational value = Rational(w) + Rational(f, pow10(static_cast<unsigned>(frac.size())));
    return negative ? Rational(-value) : value;
}

Rational scaled(const BigInt& amount, unsigned decimals) {
    return Rational(amount, pow10(decimals));
}

BigInt round_half_even(const Rational& value, unsigned digits) {
    const bool negative = value < 0;
    Rational magnitude = negative ? Rational(-value) : value;
    Rational shifted = magnitude * pow10(digits);
    BigInt num = numerator(shifted);
    BigInt den = denominator(shifted);
    BigInt q = num / den;
    BigInt twice_rem = 2 * (num % den);
    if (twice_rem > den || (twice_rem == den && (q & 1) != 0)) ++q;
    return negative ? BigInt(-q) : q;
}

std::string format_fixed(const Rational& value, unsigned digits) {
    BigInt q = round_half_even(value, digits);
    const bool negative = q < 0;
    if (negative) q = -q;
    std::string s = q.str();
    if (digits > 0) {
        if (s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
        s.insert(s.size() - digits, 1, '.');
    }
    return negative ? "-" + s : s;
}

std::string format_gwei(const Rational& wei) {
    return format_fixed(wei / Rational(kWeiPerGwei), 9);
}

std::string format_ether(const Rational& wei, unsigned digits) {
    return format_fixed(wei / Rational(kWeiPerEther), digits);
}

Rational percent(const Rational& part, const Rational& whole) {
    if (whole == 0) return Rational{0};
    return Rational(100) * part / whole;
}

std::string to_string(const BigInt& value) { return value.str(); }

}  // namespace prioscope
