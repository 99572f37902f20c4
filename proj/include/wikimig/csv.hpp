#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wikimig::csv {

struct Row {
    std::size_t line = 0;  // 1-based line number in the source
    std::vector<std::string> fields;
};

/// RFC 4180-style parsing: quoted fields, doubled quotes, CRLF, leading UTF-8 BOM.
/// Blank lines are skipped. Throws Error(Format) on an unterminated quote.
std::vector<Row> parse(std::string_view text);
std::vector<Row> read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

/// Shortest round-trip representation, so outputs are reproducible byte for byte.
std::string format_number(double value);

}  // namespace wikimig::csv
