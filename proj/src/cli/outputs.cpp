#include "caseseg/cli.hpp"
#include "caseseg/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace caseseg::cli {

void write_patterns_csv(std::ostream& out, const TimeSeries& series,
                        const std::vector<Pattern>& patterns) {
    out << "id,start,end,start_timestamp,end_timestamp,mean_at_detection,partial\n";
    for (const auto& p : patterns) {
        out << p.id << ',' << p.start << ',' << p.end << ','
            << format_timestamp(series.timestamps.at(p.start), TimestampFormat::iso8601) << ','
            << format_timestamp(series.timestamps.at(p.end), TimestampFormat::iso8601) << ','
            << format_value(p.mean_at_detection) << ',' << (p.partial ? "true" : "false") << '\n';
    }
}

namespace {

std::size_t to_index(const std::string& s, std::size_t row, const char* column) {
    std::size_t v = 0;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError(row, "row " + std::to_string(row) + ": cannot parse " + column + " '" + s + "'");
    }
    return v;
}

}  // namespace

std::vector<Pattern> read_patterns_csv(std::istream& in) {
    const CsvTable table = read_table(in, ',');
    const std::size_t id_col = resolve_column(table.header, "id");
    const std::size_t start_col = resolve_column(table.header, "start");
    const std::size_t end_col = resolve_column(table.header, "end");
    const auto optional_col = [&](const char* name) -> std::optional<std::size_t> {
        const auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it == table.header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - table.header.begin());
    };
    const auto mean_col = optional_col("mean_at_detection");
    const auto partial_col = optional_col("partial");

    std::vector<Pattern> patterns;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const std::size_t row = r + 1;
        if (cells.size() < table.header.size()) {
            throw ParseError(row, "row " + std::to_string(row) + ": too few cells");
        }
        Pattern p;
        p.id = to_index(cells[id_col], row, "id");
        p.start = to_index(cells[start_col], row, "start");
        p.end = to_index(cells[end_col], row, "end");
        if (mean_col) {
            const auto v = parse_value(cells[*mean_col]);
            if (!v) throw ParseError(row, "row " + std::to_string(row) + ": bad mean_at_detection");
            p.mean_at_detection = *v;
        }
        if (partial_col) p.partial = cells[*partial_col] == "true" || cells[*partial_col] == "1";
        patterns.push_back(p);
    }
    check_spans(patterns);
    return patterns;
}

void write_event_log_csv(std::ostream& out, const TimeSeries& series,
                         const CaseAssignment& assignment) {
    out << "case_id,timestamp,value\n";
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (!assignment.case_ids[i]) continue;
        out << *assignment.case_ids[i] << ','
            << format_timestamp(series.timestamps[i], TimestampFormat::iso8601) << ','
            << format_value(series.values[i]) << '\n';
    }
}

std::string series_plot_svg(const TimeSeries& series, const std::vector<Pattern>& patterns) {
    constexpr double width = 1200.0;
    constexpr double height = 300.0;
    constexpr double pad = 30.0;
    const std::size_t n = series.size();

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    if (n == 0) {
        svg << "</svg>\n";
        return svg.str();
    }
    const auto [lo_it, hi_it] = std::minmax_element(series.values.begin(), series.values.end());
    const double lo = *lo_it;
    const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
    const auto x_of = [&](std::size_t i) {
        return pad + (width - 2 * pad) * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n - 1, 1));
    };
    const auto y_of = [&](double v) { return height - pad - (height - 2 * pad) * (v - lo) / (hi - lo); };

    static constexpr const char* bands[] = {"#fde0c5", "#c6e2f5", "#d5efcf", "#eadcf2"};
    for (const auto& p : patterns) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
                      x_of(p.start), pad, std::max(x_of(p.end) - x_of(p.start), 0.5), height - 2 * pad,
                      bands[(p.id - 1) % 4]);
        svg << buf;
    }

    // At most ~2 points per horizontal pixel: keep each bucket's min and max.
    const std::size_t buckets = static_cast<std::size_t>(width - 2 * pad);
    const std::size_t per_bucket = std::max<std::size_t>(1, (n + buckets - 1) / buckets);
    svg << "<polyline fill=\"none\" stroke=\"#1f3b73\" stroke-width=\"0.8\" points=\"";
    for (std::size_t b = 0; b < n; b += per_bucket) {
        const std::size_t e = std::min(n, b + per_bucket);
        const auto [mn, mx] = std::minmax_element(series.values.begin() + static_cast<std::ptrdiff_t>(b),
                                                  series.values.begin() + static_cast<std::ptrdiff_t>(e));
        const auto first = mn < mx ? mn : mx;
        const auto second = mn < mx ? mx : mn;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x_of(static_cast<std::size_t>(first - series.values.begin())), y_of(*first));
        svg << buf;
        if (second != first) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x_of(static_cast<std::size_t>(second - series.values.begin())), y_of(*second));
            svg << buf;
        }
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << pad << "\" y=\"18\">" << (series.name.empty() ? "series" : series.name)
        << " (" << n << " samples, " << patterns.size() << " patterns)</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string format_percent(double ratio) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", ratio * 100.0);
    return buf;
}

std::string report_json(const EvalReport& report) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["counts"] = {{"tp", report.counts.tp}, {"fp", report.counts.fp}, {"fn", report.counts.fn}};
    j["precision"] = report.metrics.precision;
    j["recall"] = report.metrics.recall;
    j["f1"] = report.metrics.f1;
    j["degenerate"] = report.metrics.degenerate;
    j["percent"] = {{"precision", format_percent(report.metrics.precision)},
                    {"recall", format_percent(report.metrics.recall)},
                    {"f1", format_percent(report.metrics.f1)}};
    j["truth_count"] = report.overlap.rows();
    j["pred_count"] = report.overlap.cols();
    auto matching = ordered_json::array();
    for (const auto& m : report.matching) {
        matching.push_back({{"truth_id", m.truth_id},
                            {"pred_id", m.pred_id},
                            {"kind", std::string(to_string(report.truth_kinds.at(m.truth_id - 1)))},
                            {"overlap", report.overlap.at(m.truth_id - 1, m.pred_id - 1)}});
    }
    j["matching"] = std::move(matching);
    j["missed_truth_samples"] = report.missed_truth_samples;
    j["recall_including_missed"] = report.recall_including_missed;
    return j.dump(2) + "\n";
}

}  // namespace caseseg::cli
