#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fvalue::csv {

/// Header plus data rows of a comma-separated file. Blank lines are skipped.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<size_t> line_numbers;  // 1-based source line of each row

    /// Column index of `name`; throws ValidationError naming the file when absent.
    size_t column(std::string_view name) const;
    std::filesystem::path source;
};

std::vector<std::string> split_line(std::string_view line);
Table read(const std::filesystem::path& path);

double parse_double(std::string_view text, std::string_view context);
long parse_long(std::string_view text, std::string_view context);

/// Shortest representation that round-trips exactly; locale independent.
std::string format_double(double v);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace fvalue::csv
