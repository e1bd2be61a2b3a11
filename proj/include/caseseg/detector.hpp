#pragma once

// Rule-based cycle detector on short-term means.
//
// A candidate pattern opens at t_p (0, or the sample after the previous
// pattern) and accumulates the running mean y_msh of values[t_p..t]. At each t
// three conditions are checked:
//
//   lwz > lwz_th                        the candidate is long enough
//   y_msh > y_th                        the candidate is high enough
//   mean(values[t+1 .. t+look_ahead])
//       < y_msh - decrease_margin       the series decreases after t
//
// With Closure::literal the pattern is [t_p, t] at the first t meeting all
// three. With Closure::trough (default) meeting all three while the look-ahead
// mean is already at or below y_th recognises the pattern, and its end is the
// first later t whose look-ahead mean climbs back above y_th (or the last
// sample). That keeps one pattern per cycle on a falling ramp, where the
// literal rule would fire every lwz_th samples.

#include "caseseg/core.hpp"

#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace caseseg {

// Folds next_value into the candidate's running mean.
DetectorState short_term_mean(DetectorState state, double next_value);

// Mean of values[t+1 .. min(t+look_ahead, size-1)]; nullopt when t is the
// last sample. Recomputed from scratch.
std::optional<double> look_ahead_mean(std::span<const double> values, std::size_t t,
                                      std::size_t look_ahead);

bool decrease_follows(const TimeSeries& series, std::size_t t, double y_msh,
                      const DetectorParams& params);

// The signal the detector scans: the raw values or their one-sample increments.
std::vector<double> detector_input(const TimeSeries& series, const DetectorParams& params);

// Single-pass detector. Each decision at sample t waits for look_ahead more
// samples, so push() reports patterns with that much latency.
class PatternDetector {
public:
    explicit PatternDetector(DetectorParams params);

    std::optional<Pattern> push(double value);
    // Decides the trailing samples with truncated look-ahead windows and, if
    // configured, emits the unfinished candidate as a partial pattern.
    std::vector<Pattern> finish();

    std::size_t samples_seen() const noexcept { return seen_; }

private:
    std::optional<Pattern> decide(double value, std::optional<double> ahead);
    void resum_window();

    DetectorParams params_;
    std::size_t seen_ = 0;
    std::size_t next_t_ = 0;  // index of pending_.front()
    std::optional<double> previous_raw_;

    std::deque<double> pending_;  // samples awaiting a decision
    CompensatedSum window_;       // sum of pending_[1..]
    std::size_t pops_since_resum_ = 0;

    bool open_ = false;
    bool settled_ = false;
    double recognised_mean_ = 0.0;
    DetectorState state_;
    std::size_t emitted_ = 0;
    bool finished_ = false;
};

std::vector<Pattern> detect_patterns(const TimeSeries& series, const DetectorParams& params);

// Same contract as detect_patterns, but every mean is recomputed from scratch
// over its index range. Quadratic; limited to 100,000 samples.
std::vector<Pattern> detect_patterns_reference(const TimeSeries& series,
                                               const DetectorParams& params);

// Moves each pattern start forward to the first minimum of values within
// snap_radius samples, never shrinking a complete pattern to lwz_th or less.
std::vector<Pattern> snap_starts(std::span<const double> values, std::vector<Pattern> patterns,
                                 const DetectorParams& params);

// Throws ContractError for unordered, overlapping or out-of-range patterns.
CaseAssignment assign_case_ids(const TimeSeries& series, const std::vector<Pattern>& patterns);

}  // namespace caseseg
