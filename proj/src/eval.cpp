#include "caseseg/eval.hpp"

#include "caseseg/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace caseseg {

OverlapMatrix overlap_matrix(const std::vector<LabelSegment>& truth,
                             const std::vector<Pattern>& pred, std::size_t length) {
    check_spans(truth, length);
    check_spans(pred, length);
    OverlapMatrix m(truth.size(), pred.size());
    // Both lists are ordered and disjoint, so a merge-style sweep visits every
    // intersecting pair once.
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < truth.size() && j < pred.size()) {
        const std::size_t lo = std::max(truth[i].start, pred[j].start);
        const std::size_t hi = std::min(truth[i].end, pred[j].end);
        if (lo <= hi) m.at(i, j) = hi - lo + 1;
        if (truth[i].end < pred[j].end) {
            ++i;
        } else {
            ++j;
        }
    }
    return m;
}

std::vector<Match> match_labels(const OverlapMatrix& overlap) {
    struct Cell {
        std::uint64_t value;
        std::size_t row, col;
    };
    std::vector<Cell> cells;
    for (std::size_t r = 0; r < overlap.rows(); ++r) {
        for (std::size_t c = 0; c < overlap.cols(); ++c) {
            if (overlap.at(r, c) > 0) cells.push_back({overlap.at(r, c), r, c});
        }
    }
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });
    std::vector<bool> row_used(overlap.rows(), false);
    std::vector<bool> col_used(overlap.cols(), false);
    std::vector<Match> out;
    for (const auto& cell : cells) {
        if (row_used[cell.row] || col_used[cell.col]) continue;
        row_used[cell.row] = col_used[cell.col] = true;
        out.push_back({cell.row + 1, cell.col + 1});
    }
    return out;
}

ConfusionCounts confusion_counts(const std::vector<LabelSegment>& truth,
                                 const std::vector<Pattern>& pred,
                                 const std::vector<Match>& matching, std::size_t length) {
    const OverlapMatrix ov = overlap_matrix(truth, pred, length);
    std::vector<std::optional<std::size_t>> matched_row(pred.size());
    for (const auto& m : matching) {
        if (m.truth_id < 1 || m.truth_id > truth.size() || m.pred_id < 1 || m.pred_id > pred.size()) {
            throw ContractError("matching refers to truth " + std::to_string(m.truth_id) + " / pred " +
                                std::to_string(m.pred_id) + " outside the segment lists");
        }
        matched_row[m.pred_id - 1] = m.truth_id - 1;
    }
    ConfusionCounts counts;
    for (std::size_t j = 0; j < pred.size(); ++j) {
        const std::uint64_t inside_truth = ov.col_sum(j);
        const std::uint64_t outside_truth = pred[j].length() - inside_truth;
        if (matched_row[j]) {
            const std::uint64_t own = ov.at(*matched_row[j], j);
            counts.tp += own;
            counts.fp += inside_truth - own;
            counts.fn += outside_truth;
        } else {
            counts.fn += pred[j].length();
        }
    }
    return counts;
}

Metrics metrics(const ConfusionCounts& counts) {
    Metrics m;
    const auto ratio = [&m](std::uint64_t num, std::uint64_t den) {
        if (den == 0) {
            m.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.precision = ratio(counts.tp, counts.tp + counts.fp);
    m.recall = ratio(counts.tp, counts.tp + counts.fn);
    if (m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
        m.degenerate = true;
        m.f1 = 0.0;
    }
    return m;
}

EvalReport evaluate(const std::vector<LabelSegment>& truth, const std::vector<Pattern>& pred,
                    std::size_t length) {
    EvalReport report;
    report.overlap = overlap_matrix(truth, pred, length);
    report.matching = match_labels(report.overlap);
    report.counts = confusion_counts(truth, pred, report.matching, length);
    report.metrics = metrics(report.counts);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        report.truth_kinds.push_back(truth[i].kind);
        report.missed_truth_samples += truth[i].length() - report.overlap.row_sum(i);
    }
    const std::uint64_t den = report.counts.tp + report.counts.fn + report.missed_truth_samples;
    report.recall_including_missed =
        den == 0 ? 0.0 : static_cast<double>(report.counts.tp) / static_cast<double>(den);
    return report;
}

// ---------------------------------------------------------------------------
// Heatmap

std::string heatmap_csv(const OverlapMatrix& overlap) {
    std::ostringstream out;
    for (std::size_t c = 0; c < overlap.cols(); ++c) out << ',' << c + 1;
    out << '\n';
    for (std::size_t r = 0; r < overlap.rows(); ++r) {
        out << r + 1;
        for (std::size_t c = 0; c < overlap.cols(); ++c) out << ',' << overlap.at(r, c);
        out << '\n';
    }
    return out.str();
}

namespace {

// White at 0 to dark blue at the matrix maximum.
std::string cell_colour(std::uint64_t value, std::uint64_t max) {
    const double f = max == 0 ? 0.0 : static_cast<double>(value) / static_cast<double>(max);
    const auto mix = [f](int from, int to) {
        return static_cast<int>(from + (to - from) * f + 0.5);
    };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(255, 8), mix(255, 48), mix(255, 107));
    return buf;
}

std::size_t tick_step(std::size_t n) {
    std::size_t step = 1;
    while (n / step > 25) step = step == 1 ? 5 : step * 2;
    return step;
}

}  // namespace

std::string heatmap_svg(const OverlapMatrix& overlap) {
    constexpr int cell = 12;
    constexpr int left = 70;
    constexpr int top = 20;
    constexpr int bottom = 60;
    const int width = left + static_cast<int>(overlap.cols()) * cell + 20;
    const int height = top + static_cast<int>(overlap.rows()) * cell + bottom;
    const std::uint64_t max = overlap.max();

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"9\">\n";
    for (std::size_t r = 0; r < overlap.rows(); ++r) {
        for (std::size_t c = 0; c < overlap.cols(); ++c) {
            const auto v = overlap.at(r, c);
            svg << "<rect class=\"cell\" x=\"" << left + static_cast<int>(c) * cell << "\" y=\""
                << top + static_cast<int>(r) * cell << "\" width=\"" << cell << "\" height=\"" << cell
                << "\" fill=\"" << cell_colour(v, max) << "\"><title>cycle_EX " << r + 1
                << " / cycle_TS " << c + 1 << ": " << v << "</title></rect>\n";
        }
    }
    const int grid_bottom = top + static_cast<int>(overlap.rows()) * cell;
    const std::size_t col_step = tick_step(overlap.cols());
    for (std::size_t c = 0; c < overlap.cols(); c += col_step) {
        svg << "<text x=\"" << left + static_cast<int>(c) * cell + cell / 2 << "\" y=\""
            << grid_bottom + 12 << "\" text-anchor=\"middle\">" << c + 1 << "</text>\n";
    }
    const std::size_t row_step = tick_step(overlap.rows());
    for (std::size_t r = 0; r < overlap.rows(); r += row_step) {
        svg << "<text x=\"" << left - 4 << "\" y=\"" << top + static_cast<int>(r) * cell + cell - 3
            << "\" text-anchor=\"end\">" << r + 1 << "</text>\n";
    }
    svg << "<text x=\"" << left + static_cast<int>(overlap.cols()) * cell / 2 << "\" y=\""
        << grid_bottom + 34 << "\" text-anchor=\"middle\" font-size=\"12\">cycle_TS</text>\n";
    svg << "<text x=\"16\" y=\"" << top + static_cast<int>(overlap.rows()) * cell / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
        << top + static_cast<int>(overlap.rows()) * cell / 2 << ")\">cycle_EX</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void heatmap_export(const OverlapMatrix& overlap, const std::filesystem::path& stem) {
    const auto write = [](const std::filesystem::path& path, const std::string& body) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        out << body;
        if (!out) throw IoError("write failed for '" + path.string() + "'");
    };
    auto csv = stem;
    csv += ".csv";
    auto svg = stem;
    svg += ".svg";
    write(csv, heatmap_csv(overlap));
    write(svg, heatmap_svg(overlap));
}

// ---------------------------------------------------------------------------
// Label files

namespace {

std::size_t parse_index(const std::string& text, std::size_t row, const char* column) {
    std::size_t v = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError(row, "row " + std::to_string(row) + ": cannot parse " + column + " '" +
                                  text + "'");
    }
    return v;
}

}  // namespace

std::vector<LabelSegment> read_labels_csv(std::istream& in) {
    const CsvTable table = read_table(in, ',');
    const std::size_t id_col = resolve_column(table.header, "id");
    const std::size_t start_col = resolve_column(table.header, "start");
    const std::size_t end_col = resolve_column(table.header, "end");
    const auto kind_it = std::find(table.header.begin(), table.header.end(), "kind");
    std::vector<LabelSegment> labels;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const std::size_t row = r + 1;
        if (cells.size() < table.header.size()) {
            throw ParseError(row, "row " + std::to_string(row) + ": too few cells");
        }
        LabelSegment seg;
        seg.id = parse_index(cells[id_col], row, "id");
        seg.start = parse_index(cells[start_col], row, "start");
        seg.end = parse_index(cells[end_col], row, "end");
        if (kind_it != table.header.end()) {
            try {
                seg.kind = parse_label_kind(cells[static_cast<std::size_t>(kind_it - table.header.begin())]);
            } catch (const InputError& e) {
                throw ParseError(row, "row " + std::to_string(row) + ": " + e.what());
            }
        }
        labels.push_back(seg);
    }
    check_spans(labels);
    return labels;
}

std::vector<LabelSegment> read_labels_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return read_labels_csv(in);
}

void write_labels_csv(std::ostream& out, const std::vector<LabelSegment>& labels) {
    out << "id,start,end,kind\n";
    for (const auto& l : labels) {
        out << l.id << ',' << l.start << ',' << l.end << ',' << to_string(l.kind) << '\n';
    }
}

}  // namespace caseseg
