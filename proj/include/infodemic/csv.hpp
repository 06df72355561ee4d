#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace infodemic::csv {

using Row = std::vector<std::string>;

/// Splits one CSV record. Double-quoted fields may contain commas and
/// doubled quotes; embedded newlines are not supported.
Row split_line(std::string_view line);

/// Reads a file with a header line. Returns data rows only; the header is
/// stored in `header` when non-null. Throws std::runtime_error if unreadable.
std::vector<Row> read_file(const std::filesystem::path& path, Row* header = nullptr);

std::string quote(std::string_view field);
std::string join(const Row& fields);

/// Shortest "%.*g" text (up to 17 digits) that round-trips the value.
/// NaN renders as "NA".
std::string format_double(double x);
std::string format_double(double x, int significant_digits);

/// Writes via a sibling temporary then renames into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

}  // namespace infodemic::csv
