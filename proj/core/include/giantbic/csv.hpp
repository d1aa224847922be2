// csv.hpp - Locale-independent number formatting and small CSV helpers.

#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

namespace giantbic {

// Shortest general-format text with the given number of significant digits.
// Independent of the global C/C++ locale.
std::string format_real(double value, int significant_digits = 15);

// Accumulates a CSV document with a header row and ',' separators.
class CsvTable {
public:
    explicit CsvTable(std::initializer_list<std::string_view> header);

    CsvTable& row();                    // begin a new row
    CsvTable& cell(double value);
    CsvTable& cell(long long value);
    CsvTable& cell(int value) { return cell(static_cast<long long>(value)); }
    CsvTable& cell(std::size_t value) { return cell(static_cast<long long>(value)); }
    CsvTable& cell(std::string_view text);

    const std::string& str() const noexcept { return text_; }

private:
    void separator();

    std::string text_;
    bool row_open_{false};
    bool row_empty_{true};
};

void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace giantbic
