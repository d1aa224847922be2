#include "giantbic/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "giantbic/model.hpp"

namespace giantbic {

std::string format_real(double value, int significant_digits) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";  // folds -0
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                   std::chars_format::general, significant_digits);
    return std::string(buf.data(), res.ptr);
}

CsvTable::CsvTable(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
        if (!first) text_ += ',';
        text_ += h;
        first = false;
    }
    text_ += '\n';
}

CsvTable& CsvTable::row() {
    if (row_open_) text_ += '\n';
    row_open_ = true;
    row_empty_ = true;
    return *this;
}

void CsvTable::separator() {
    if (!row_open_) row();
    if (!row_empty_) text_ += ',';
    row_empty_ = false;
}

CsvTable& CsvTable::cell(double value) {
    separator();
    text_ += format_real(value);
    return *this;
}

CsvTable& CsvTable::cell(long long value) {
    separator();
    text_ += std::to_string(value);
    return *this;
}

CsvTable& CsvTable::cell(std::string_view text) {
    separator();
    text_ += text;
    return *this;
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << contents;
    // Close the pending row of CsvTable-style documents.
    if (!contents.empty() && contents.back() != '\n') out << '\n';
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

}  // namespace giantbic
