#include "caseseg/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace caseseg {

void TimeSeries::validate() const {
    if (timestamps.size() != values.size()) {
        throw ContractError("time series '" + name + "': " + std::to_string(timestamps.size()) +
                            " timestamps but " + std::to_string(values.size()) + " values");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw ContractError("time series '" + name + "': value at index " + std::to_string(i) +
                                " is not finite");
        }
        if (i > 0 && timestamps[i] < timestamps[i - 1]) {
            throw ContractError("time series '" + name + "': timestamp at index " +
                                std::to_string(i) + " decreases");
        }
    }
}

void DetectorParams::validate() const {
    if (!std::isfinite(y_th)) throw ParameterError("y_th must be finite");
    if (lwz_th < 1) throw ParameterError("lwz_th must be >= 1");
    if (look_ahead < 1) throw ParameterError("look_ahead must be >= 1");
    if (!std::isfinite(decrease_margin) || decrease_margin < 0.0) {
        throw ParameterError("decrease_margin must be finite and >= 0");
    }
}

std::string_view to_string(Closure c) noexcept {
    return c == Closure::trough ? "trough" : "literal";
}

std::string_view to_string(InputMode m) noexcept {
    return m == InputMode::raw ? "raw" : "increments";
}

Closure parse_closure(std::string_view s) {
    if (s == "trough") return Closure::trough;
    if (s == "literal") return Closure::literal;
    throw ParameterError("unknown closure '" + std::string(s) + "' (expected trough or literal)");
}

InputMode parse_input_mode(std::string_view s) {
    if (s == "raw") return InputMode::raw;
    if (s == "increments") return InputMode::increments;
    throw ParameterError("unknown input mode '" + std::string(s) + "' (expected raw or increments)");
}

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
        compensation_ += (sum_ - t) + x;
    } else {
        compensation_ += (x - t) + sum_;
    }
    sum_ = t;
}

std::string_view to_string(LabelKind k) noexcept {
    return k == LabelKind::cycle ? "cycle" : "outlier";
}

LabelKind parse_label_kind(std::string_view s) {
    if (s == "cycle") return LabelKind::cycle;
    if (s == "outlier") return LabelKind::outlier;
    throw InputError("unknown label kind '" + std::string(s) + "' (expected cycle or outlier)");
}

namespace {

template <typename Span>
void check_span_list(const std::vector<Span>& spans, std::optional<std::size_t> limit,
                     const char* what) {
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const auto& s = spans[i];
        const std::string label = std::string(what) + " " + std::to_string(i + 1);
        if (s.end < s.start) {
            throw ContractError(label + ": end " + std::to_string(s.end) + " before start " +
                                std::to_string(s.start));
        }
        if (limit && s.end >= *limit) {
            throw ContractError(label + ": end " + std::to_string(s.end) +
                                " outside series of length " + std::to_string(*limit));
        }
        if (i > 0 && s.start <= spans[i - 1].end) {
            throw ContractError(label + " overlaps or precedes the previous one");
        }
    }
}

}  // namespace

void check_spans(const std::vector<Pattern>& patterns, std::optional<std::size_t> limit) {
    check_span_list(patterns, limit, "pattern");
}

void check_spans(const std::vector<LabelSegment>& segments, std::optional<std::size_t> limit) {
    check_span_list(segments, limit, "label segment");
}

std::size_t CaseAssignment::assigned_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(case_ids.begin(), case_ids.end(), [](const auto& id) { return id.has_value(); }));
}

std::uint64_t OverlapMatrix::max() const noexcept {
    return cells_.empty() ? 0 : *std::max_element(cells_.begin(), cells_.end());
}

std::uint64_t OverlapMatrix::row_sum(std::size_t row) const {
    std::uint64_t s = 0;
    for (std::size_t c = 0; c < cols_; ++c) s += at(row, c);
    return s;
}

std::uint64_t OverlapMatrix::col_sum(std::size_t col) const {
    std::uint64_t s = 0;
    for (std::size_t r = 0; r < rows_; ++r) s += at(r, col);
    return s;
}

}  // namespace caseseg
