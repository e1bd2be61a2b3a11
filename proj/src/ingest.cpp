#include "caseseg/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace caseseg {

std::string_view to_string(TimestampFormat f) noexcept {
    switch (f) {
        case TimestampFormat::table: return "table";
        case TimestampFormat::iso8601: return "iso8601";
        case TimestampFormat::epoch: return "epoch";
    }
    return "iso8601";
}

TimestampFormat parse_timestamp_format(std::string_view s) {
    if (s == "table") return TimestampFormat::table;
    if (s == "iso8601" || s == "iso") return TimestampFormat::iso8601;
    if (s == "epoch") return TimestampFormat::epoch;
    throw ParameterError("unknown timestamp format '" + std::string(s) +
                         "' (expected table, iso8601 or epoch)");
}

namespace {

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

// Parses exactly `width` digits at `pos`, advancing it.
std::optional<int> digits(std::string_view s, std::size_t& pos, std::size_t width) {
    if (pos + width > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = 0; i < width; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + (c - '0');
    }
    pos += width;
    return v;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
    if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

std::optional<Timestamp> civil_to_epoch(int y, int mo, int d, int h, int mi, int sec) {
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return std::nullopt;
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<Timestamp>(days) * 86400 + h * 3600 + mi * 60 + sec;
}

std::optional<Timestamp> parse_table_timestamp(std::string_view s) {
    std::size_t p = 0;
    const auto yy = digits(s, p, 2);
    if (!yy || !expect(s, p, '.')) return std::nullopt;
    const auto mo = digits(s, p, 2);
    if (!mo || !expect(s, p, '.')) return std::nullopt;
    const auto d = digits(s, p, 2);
    if (!d || !expect(s, p, ' ')) return std::nullopt;
    const auto h = digits(s, p, 2);
    if (!h || !expect(s, p, ':')) return std::nullopt;
    const auto mi = digits(s, p, 2);
    if (!mi || !expect(s, p, ':')) return std::nullopt;
    const auto sec = digits(s, p, 2);
    if (!sec || p != s.size()) return std::nullopt;
    return civil_to_epoch(2000 + *yy, *mo, *d, *h, *mi, *sec);
}

std::optional<Timestamp> parse_iso_timestamp(std::string_view s) {
    std::size_t p = 0;
    const auto y = digits(s, p, 4);
    if (!y || !expect(s, p, '-')) return std::nullopt;
    const auto mo = digits(s, p, 2);
    if (!mo || !expect(s, p, '-')) return std::nullopt;
    const auto d = digits(s, p, 2);
    if (!d || !(expect(s, p, 'T') || expect(s, p, ' '))) return std::nullopt;
    const auto h = digits(s, p, 2);
    if (!h || !expect(s, p, ':')) return std::nullopt;
    const auto mi = digits(s, p, 2);
    if (!mi || !expect(s, p, ':')) return std::nullopt;
    const auto sec = digits(s, p, 2);
    if (!sec) return std::nullopt;
    auto ts = civil_to_epoch(*y, *mo, *d, *h, *mi, *sec);
    if (!ts) return std::nullopt;
    if (p == s.size() || (expect(s, p, 'Z') && p == s.size())) return ts;
    if (p < s.size() && (s[p] == '+' || s[p] == '-')) {
        const int sign = s[p] == '+' ? 1 : -1;
        ++p;
        const auto oh = digits(s, p, 2);
        if (!oh) return std::nullopt;
        expect(s, p, ':');
        const auto om = digits(s, p, 2);
        if (!om || p != s.size()) return std::nullopt;
        return *ts - sign * (*oh * 3600 + *om * 60);
    }
    return std::nullopt;
}

struct Civil {
    int year, month, day, hour, minute, second;
};

Civil epoch_to_civil(Timestamp ts) {
    using namespace std::chrono;
    Timestamp days = ts / 86400;
    Timestamp rem = ts % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
            static_cast<int>(static_cast<unsigned>(ymd.day())), static_cast<int>(rem / 3600),
            static_cast<int>(rem % 3600 / 60), static_cast<int>(rem % 60)};
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text, TimestampFormat format) {
    text = trim(text);
    switch (format) {
        case TimestampFormat::table: return parse_table_timestamp(text);
        case TimestampFormat::iso8601: return parse_iso_timestamp(text);
        case TimestampFormat::epoch: {
            Timestamp v = 0;
            const auto* end = text.data() + text.size();
            const auto [ptr, ec] = std::from_chars(text.data(), end, v);
            if (text.empty() || ec != std::errc{} || ptr != end) return std::nullopt;
            return v;
        }
    }
    return std::nullopt;
}

std::string format_timestamp(Timestamp ts, TimestampFormat format) {
    if (format == TimestampFormat::epoch) return std::to_string(ts);
    const Civil c = epoch_to_civil(ts);
    char buf[64];
    if (format == TimestampFormat::table) {
        std::snprintf(buf, sizeof buf, "%02d.%02d.%02d %02d:%02d:%02d", c.year % 100, c.month, c.day,
                      c.hour, c.minute, c.second);
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d", c.year, c.month, c.day,
                      c.hour, c.minute, c.second);
    }
    return buf;
}

std::optional<double> parse_value(std::string_view text, bool decimal_comma) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    std::string buf(text);
    if (decimal_comma) {
        if (buf.find('.') != std::string::npos) return std::nullopt;
        std::replace(buf.begin(), buf.end(), ',', '.');
    }
    if (buf.front() == '+') buf.erase(0, 1);
    double v = 0.0;
    const char* end = buf.data() + buf.size();
    const auto [ptr, ec] = std::from_chars(buf.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string format_value(double value, bool decimal_comma) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    std::string s(buf, ptr);
    if (decimal_comma) std::replace(s.begin(), s.end(), '.', ',');
    return s;
}

std::vector<std::string> split_csv_line(std::string_view line, char delimiter) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delimiter) {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

CsvTable read_table(std::istream& in, char delimiter) {
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (!have_header) {
            // A UTF-8 byte order mark would otherwise stick to the first column name.
            if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
            table.header_line = line;
            for (auto& h : split_csv_line(line, delimiter)) table.header.emplace_back(trim(h));
            have_header = true;
            continue;
        }
        table.rows.push_back(split_csv_line(line, delimiter));
        table.lines.push_back(std::move(line));
    }
    if (in.bad()) throw IoError("read error");
    if (!have_header) throw InputError("input has no header row");
    return table;
}

std::size_t resolve_column(const std::vector<std::string>& header, const std::string& ref) {
    const auto it = std::find(header.begin(), header.end(), ref);
    if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
    if (!ref.empty() && std::all_of(ref.begin(), ref.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        std::size_t idx = 0;
        std::from_chars(ref.data(), ref.data() + ref.size(), idx);
        if (idx < header.size()) return idx;
    }
    throw SchemaError(ref, "missing column '" + ref + "'");
}

TimeSeries parse_csv(const CsvTable& table, const CsvSpec& spec, std::string name) {
    const std::size_t ts_col = resolve_column(table.header, spec.timestamp_column);
    const std::size_t val_col = resolve_column(table.header, spec.value_column);
    const auto& ts_name = table.header[ts_col];
    const auto& val_name = table.header[val_col];

    TimeSeries series;
    series.name = std::move(name);
    series.timestamps.reserve(table.rows.size());
    series.values.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const std::size_t row = r + 1;
        if (cells.size() <= std::max(ts_col, val_col)) {
            throw ParseError(row, "row " + std::to_string(row) + ": expected at least " +
                                      std::to_string(std::max(ts_col, val_col) + 1) + " cells, got " +
                                      std::to_string(cells.size()));
        }
        const auto ts = parse_timestamp(cells[ts_col], spec.timestamp_format);
        if (!ts) {
            throw ParseError(row, "row " + std::to_string(row) + ": cannot parse " +
                                      std::string(to_string(spec.timestamp_format)) + " timestamp '" +
                                      cells[ts_col] + "' in column '" + ts_name + "'");
        }
        const auto v = parse_value(cells[val_col], spec.decimal_comma);
        if (!v) {
            throw ParseError(row, "row " + std::to_string(row) + ": cannot parse value '" +
                                      cells[val_col] + "' in column '" + val_name + "'");
        }
        if (!series.timestamps.empty() && *ts < series.timestamps.back()) {
            throw OrderingError(row, "row " + std::to_string(row) + ": timestamp '" + cells[ts_col] +
                                         "' is earlier than the previous row");
        }
        series.timestamps.push_back(*ts);
        series.values.push_back(*v);
    }
    return series;
}

TimeSeries parse_csv(std::istream& in, const CsvSpec& spec, std::string name) {
    return parse_csv(read_table(in, spec.delimiter), spec, std::move(name));
}

TimeSeries parse_csv_file(const std::filesystem::path& path, const CsvSpec& spec) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return parse_csv(in, spec, path.stem().string());
}

void write_series_csv(std::ostream& out, const TimeSeries& series, const CsvSpec& spec) {
    const auto column_name = [](const std::string& ref, const char* fallback) {
        const bool numeric = !ref.empty() && std::all_of(ref.begin(), ref.end(),
                                                         [](char c) { return c >= '0' && c <= '9'; });
        return numeric ? std::string(fallback) : ref;
    };
    const char d = spec.delimiter;
    out << column_name(spec.timestamp_column, "timestamp") << d
        << column_name(spec.value_column, "value") << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << format_timestamp(series.timestamps[i], spec.timestamp_format) << d
            << format_value(series.values[i], spec.decimal_comma) << '\n';
    }
}

CleanResult clean_outliers(const TimeSeries& series, double cap) {
    if (!std::isfinite(cap)) throw ParameterError("outlier cap must be finite");
    CleanResult result;
    result.series.name = series.name;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series.values[i] <= cap) {
            result.series.timestamps.push_back(series.timestamps[i]);
            result.series.values.push_back(series.values[i]);
            result.kept.push_back(i);
        }
    }
    result.removed_count = series.size() - result.series.size();
    return result;
}

}  // namespace caseseg
