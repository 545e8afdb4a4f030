#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace regimeval {

// RFC-4180-style CSV: quoted fields may contain commas, quotes ("" escape)
// and newlines. Accepts LF and CRLF input; always writes LF.
struct CsvTable {
    struct Row {
        std::size_t line = 0;  // 1-based line the row starts on
        std::vector<std::string> fields;
    };
    std::vector<std::string> header;
    std::vector<Row> rows;

    // Index of a header column, -1 if absent.
    int column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, std::span<const std::string> fields);

}  // namespace regimeval
