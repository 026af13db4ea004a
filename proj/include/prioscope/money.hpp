#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace prioscope {

/// Arbitrary-precision integer used for every wei amount and for sums that
/// may exceed 64 bits.
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;

/// Exact rational; all fee-per-gas ratios, prices and percentages are kept
/// in this form and only rounded when written out.
using Rational = boost::multiprecision::number<
    boost::multiprecision::rational_adaptor<boost::multiprecision::cpp_int_backend<>>,
    boost::multiprecision::et_off>;

using Wei = BigInt;

inline const BigInt kWeiPerGwei{1'000'000'000};
inline const BigInt kWeiPerEther{BigInt{1'000'000'000} * 1'000'000'000};

BigInt pow10(unsigned exponent);

/// Parses a non-negative decimal integer made only of ASCII digits.
/// Throws std::invalid_argument on anything else (sign, blank, separators).
BigInt parse_uint(std::string_view digits);

/// Parses a plain decimal literal such as "99", "-0.5" or "1.72836605"
/// into an exact rational. Exponents are not accepted.
Rational parse_decimal(std::string_view text);

/// `amount / 10^decimals` as an exact rational.
Rational scaled(const BigInt& amount, unsigned decimals);

/// Rounds `value` to `digits` fractional digits, ties to even.
BigInt round_half_even(const Rational& value, unsigned digits);

/// Fixed-point rendering with `digits` fractional digits, ties to even.
/// Never renders a negative zero.
std::string format_fixed(const Rational& value, unsigned digits);

/// Wei (or wei per gas) rendered as gwei with 9 fractional digits.
std::string format_gwei(const Rational& wei);

/// Wei rendered as ether with `digits` fractional digits.
std::string format_ether(const Rational& wei, unsigned digits = 18);

/// `100 * part / whole`; zero when `whole` is zero.
Rational percent(const Rational& part, const Rational& whole);

std::string to_string(const BigInt& value);

}  // namespace prioscope
