#pragma once

// Domain types shared by the ingest, detector, eval and synth modules.
// Sample indices are 0-based; pattern and label ids are 1-based.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace caseseg {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Anything wrong with the data handed to us: missing columns, bad cells,
// unreadable files. The CLI maps these to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

class SchemaError : public InputError {
public:
    SchemaError(std::string column, const std::string& what)
        : InputError(what), column_(std::move(column)) {}
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

class ParseError : public InputError {
public:
    ParseError(std::size_t row, const std::string& what) : InputError(what), row_(row) {}
    // 1-based data row (the header is row 0).
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class OrderingError : public ParseError {
public:
    using ParseError::ParseError;
};

class IoError : public InputError {
public:
    using InputError::InputError;
};

// Out-of-range or inconsistent parameters. CLI exit code 3.
class ParameterError : public Error {
public:
    using Error::Error;
};

// A precondition on structured arguments does not hold (overlapping
// patterns, segments outside the series, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Time series
// ---------------------------------------------------------------------------

using Timestamp = std::int64_t;  // seconds since 1970-01-01T00:00:00, no zone

struct TimeSeries {
    std::string name;
    std::vector<Timestamp> timestamps;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }

    // Throws ContractError if lengths differ, timestamps decrease or a value
    // is not finite.
    void validate() const;

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;
};

// ---------------------------------------------------------------------------
// Detector configuration and state
// ---------------------------------------------------------------------------

enum class Closure {
    // The three conditions mark the pattern as recognised once the following
    // samples have dropped into the low neighbourhood (look-ahead mean <=
    // y_th); the pattern ends right before the series rises above y_th again.
    trough,
    // The pattern ends at the first sample where all three conditions hold.
    literal,
};

enum class InputMode {
    raw,
    // Detection runs on one-sample increments y[i] - y[i-1] (first one 0).
    increments,
};

struct DetectorParams {
    double y_th = 10.3;              // minimum short-term mean of a pattern
    std::size_t lwz_th = 100;        // minimum pattern length (exclusive), samples
    std::size_t look_ahead = 30;     // window verifying the post-pattern decrease
    double decrease_margin = 0.0;    // look-ahead mean must fall this far below y_msh
    bool emit_partial_tail = false;  // emit an unfinished candidate at series end
    Closure closure = Closure::trough;
    InputMode input_mode = InputMode::raw;
    std::size_t snap_radius = 0;     // 0 disables snapping starts to a local minimum

    // Throws ParameterError.
    void validate() const;

    friend bool operator==(const DetectorParams&, const DetectorParams&) = default;
};

std::string_view to_string(Closure c) noexcept;
std::string_view to_string(InputMode m) noexcept;
Closure parse_closure(std::string_view s);      // throws ParameterError
InputMode parse_input_mode(std::string_view s);  // throws ParameterError

// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + compensation_; }
    void reset() noexcept { sum_ = compensation_ = 0.0; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

// Running mean over the open candidate values[start .. start + length - 1].
struct DetectorState {
    std::size_t start = 0;   // t_p
    std::size_t length = 0;  // LWZ
    CompensatedSum sum;

    double mean() const noexcept {
        return length == 0 ? 0.0 : sum.value() / static_cast<double>(length);
    }
    // Index of the most recent sample folded in. Requires length > 0.
    std::size_t current() const noexcept { return start + length - 1; }
};

// ---------------------------------------------------------------------------
// Detection results and ground truth
// ---------------------------------------------------------------------------

struct Pattern {
    std::size_t id = 0;  // 1-based
    std::size_t start = 0;
    std::size_t end = 0;  // inclusive
    double mean_at_detection = 0.0;
    bool partial = false;

    std::size_t length() const noexcept { return end - start + 1; }
    friend bool operator==(const Pattern&, const Pattern&) = default;
};

enum class LabelKind { cycle, outlier };

std::string_view to_string(LabelKind k) noexcept;
LabelKind parse_label_kind(std::string_view s);  // throws InputError

struct LabelSegment {
    std::size_t id = 0;  // 1-based
    std::size_t start = 0;
    std::size_t end = 0;  // inclusive
    LabelKind kind = LabelKind::cycle;

    std::size_t length() const noexcept { return end - start + 1; }
    friend bool operator==(const LabelSegment&, const LabelSegment&) = default;
};

// Throws ContractError unless the spans are non-empty, strictly ordered,
// disjoint and (when limit is given) inside [0, limit).
void check_spans(const std::vector<Pattern>& patterns,
                 std::optional<std::size_t> limit = std::nullopt);
void check_spans(const std::vector<LabelSegment>& segments,
                 std::optional<std::size_t> limit = std::nullopt);

// Per-sample case id; std::nullopt for samples outside every pattern.
struct CaseAssignment {
    std::vector<std::optional<std::size_t>> case_ids;

    std::size_t size() const noexcept { return case_ids.size(); }
    std::size_t assigned_count() const noexcept;
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Set when any of the three ratios hit 0/0.
    bool degenerate = false;
};

// Dense truth x prediction matrix of shared sample counts.
class OverlapMatrix {
public:
    OverlapMatrix() = default;
    OverlapMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), cells_(rows * cols, 0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::uint64_t& at(std::size_t row, std::size_t col) { return cells_.at(row * cols_ + col); }
    std::uint64_t at(std::size_t row, std::size_t col) const { return cells_.at(row * cols_ + col); }
    std::uint64_t max() const noexcept;
    std::uint64_t row_sum(std::size_t row) const;
    std::uint64_t col_sum(std::size_t col) const;

    friend bool operator==(const OverlapMatrix&, const OverlapMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::uint64_t> cells_;
};

struct Match {
    std::size_t truth_id = 0;  // 1-based
    std::size_t pred_id = 0;   // 1-based
    friend bool operator==(const Match&, const Match&) = default;
};

struct EvalReport {
    ConfusionCounts counts;
    Metrics metrics;
    OverlapMatrix overlap;
    std::vector<Match> matching;
    std::vector<LabelKind> truth_kinds;  // indexed by truth id - 1

    // Alternative reading of FN: truth samples no pattern covers at all.
    std::uint64_t missed_truth_samples = 0;
    double recall_including_missed = 0.0;
};

}  // namespace caseseg
