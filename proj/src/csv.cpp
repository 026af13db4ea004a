#include "prioscope/csv.hpp"

#include "prioscope/errors.hpp"

namespace prioscope {

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path.string()), columns_(header.size()) {
    if (!out_) throw Error("cannot write " + path_);
    row(header);
}

std::string CsvWriter::escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != columns_) throw Error("row width does not match header in " + path_);
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << escape(fields[i]);
    }
    out_ << '\n';
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw Error("failed writing " + path_);
}

}  // namespace prioscope
