#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "prioscope/money.hpp"

namespace prioscope {

/// Minimal RFC 4180 writer: header first, `\n` line endings, fields quoted
/// only when they contain a comma, quote, or newline.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

    void row(const std::vector<std::string>& fields);
    void close();

    static std::string escape(std::string_view field);

private:
    std::ofstream out_;
    std::string path_;
    std::size_t columns_;
};

/// Percent values are emitted with two fractional digits, ties to even.
inline std::string pct(const Rational& value) { return format_fixed(value, 2); }

}  // namespace prioscope
