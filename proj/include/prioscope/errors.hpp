#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace prioscope {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A record-level invariant does not hold (bad hex id, negative size, ...).
class InvariantViolation : public Error {
public:
    using Error::Error;
};

/// One input line could not be parsed or validated. Carries the source
/// location so the CLI can report `file:line`.
class MalformedLine : public Error {
public:
    MalformedLine(std::string path, std::size_t line_no, std::string reason)
        : Error(path + ":" + std::to_string(line_no) + ": " + reason),
          path_(std::move(path)),
          line_no_(line_no),
          reason_(std::move(reason)) {}

    const std::string& path() const noexcept { return path_; }
    std::size_t line_no() const noexcept { return line_no_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::string path_;
    std::size_t line_no_;
    std::string reason_;
};

class UnknownTag : public MalformedLine {
public:
    UnknownTag(std::string path, std::size_t line_no, std::string value)
        : MalformedLine(std::move(path), line_no, "unknown bundle tag '" + value + "'"),
          value_(std::move(value)) {}

    const std::string& value() const noexcept { return value_; }

private:
    std::string value_;
};

/// The block's base fee is above the transaction's fee cap, so the
/// transaction could not have been included in that block.
class BaseFeeExceedsMaxFee : public Error {
public:
    using Error::Error;
};

class UnresolvedTx : public Error {
public:
    explicit UnresolvedTx(std::string hash)
        : Error("transaction " + hash + " not found in block"), hash_(std::move(hash)) {}
    const std::string& hash() const noexcept { return hash_; }

private:
    std::string hash_;
};

class ZeroGas : public Error {
public:
    ZeroGas() : Error("bundle uses zero gas") {}
};

class WrongSize : public Error {
public:
    WrongSize(std::size_t expected, std::size_t actual)
        : Error("expected bundle of size " + std::to_string(expected) + ", got " +
                std::to_string(actual)) {}
};

class EmptyBlock : public Error {
public:
    explicit EmptyBlock(std::uint64_t height)
        : Error("block " + std::to_string(height) + " has no transactions left to rank") {}
};

class MissingPrice : public Error {
public:
    MissingPrice(const std::string& asset, std::uint64_t block, const std::string& quote)
        : Error("no " + asset + "-" + quote + " price at block " + std::to_string(block)) {}
};

class InfeasibleSpec : public Error {
public:
    using Error::Error;
};

}  // namespace prioscope
