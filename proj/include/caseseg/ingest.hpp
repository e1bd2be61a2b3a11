#pragma once

#include "caseseg/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace caseseg {

enum class TimestampFormat {
    table,    // "YY.MM.DD HH:MM:SS", e.g. "24.01.10 03:43:17"
    iso8601,  // "2024-01-10T03:43:17", space separator and Z / +HH:MM suffix accepted
    epoch,    // integer seconds
};

std::string_view to_string(TimestampFormat f) noexcept;
TimestampFormat parse_timestamp_format(std::string_view s);  // throws ParameterError

// Which columns to read and how. A column is matched by header name first;
// failing that, an all-digit reference is taken as a 0-based column index.
struct CsvSpec {
    std::string timestamp_column = "timestamp";
    std::string value_column = "value";
    TimestampFormat timestamp_format = TimestampFormat::iso8601;
    char delimiter = ',';
    bool decimal_comma = false;
};

// Raw delimiter-separated table. `lines` keeps each data row's original text
// (without line terminator) so callers can copy rows verbatim.
struct CsvTable {
    std::string header_line;
    std::vector<std::string> header;
    std::vector<std::string> lines;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_csv_line(std::string_view line, char delimiter);
CsvTable read_table(std::istream& in, char delimiter);
std::size_t resolve_column(const std::vector<std::string>& header, const std::string& ref);

std::optional<Timestamp> parse_timestamp(std::string_view text, TimestampFormat format);
std::string format_timestamp(Timestamp ts, TimestampFormat format);
std::optional<double> parse_value(std::string_view text, bool decimal_comma = false);
// Shortest text that parses back to exactly `value`.
std::string format_value(double value, bool decimal_comma = false);

// Errors: SchemaError for a missing column, ParseError (with 1-based row) for
// an unreadable or empty cell, OrderingError for decreasing timestamps.
TimeSeries parse_csv(const CsvTable& table, const CsvSpec& spec, std::string name = {});
TimeSeries parse_csv(std::istream& in, const CsvSpec& spec, std::string name = {});
TimeSeries parse_csv_file(const std::filesystem::path& path, const CsvSpec& spec);

// Header plus one row per sample, in `spec`'s column names, timestamp format,
// delimiter and decimal style. parse_csv reads it back to an equal series.
void write_series_csv(std::ostream& out, const TimeSeries& series, const CsvSpec& spec);

struct CleanResult {
    TimeSeries series;
    std::size_t removed_count = 0;
    std::vector<std::size_t> kept;  // original indices of the retained samples
};

// Drops (does not clip) every sample whose value exceeds cap.
CleanResult clean_outliers(const TimeSeries& series, double cap);

}  // namespace caseseg
