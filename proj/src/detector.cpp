#include "caseseg/detector.hpp"

#include <algorithm>
#include <numeric>

namespace caseseg {

DetectorState short_term_mean(DetectorState state, double next_value) {
    state.sum.add(next_value);
    ++state.length;
    return state;
}

std::optional<double> look_ahead_mean(std::span<const double> values, std::size_t t,
                                      std::size_t look_ahead) {
    if (t + 1 >= values.size() || look_ahead == 0) return std::nullopt;
    const std::size_t last = std::min(t + look_ahead, values.size() - 1);
    const double sum = std::accumulate(values.begin() + static_cast<std::ptrdiff_t>(t + 1),
                                       values.begin() + static_cast<std::ptrdiff_t>(last + 1), 0.0);
    return sum / static_cast<double>(last - t);
}

bool decrease_follows(const TimeSeries& series, std::size_t t, double y_msh,
                      const DetectorParams& params) {
    const auto ahead = look_ahead_mean(series.values, t, params.look_ahead);
    return ahead && *ahead < y_msh - params.decrease_margin;
}

std::vector<double> detector_input(const TimeSeries& series, const DetectorParams& params) {
    if (params.input_mode == InputMode::raw) return series.values;
    std::vector<double> out(series.size(), 0.0);
    for (std::size_t i = 1; i < series.size(); ++i) out[i] = series.values[i] - series.values[i - 1];
    return out;
}

// ---------------------------------------------------------------------------
// PatternDetector

PatternDetector::PatternDetector(DetectorParams params) : params_(params) {
    params_.validate();
}

void PatternDetector::resum_window() {
    window_.reset();
    for (std::size_t i = 1; i < pending_.size(); ++i) window_.add(pending_[i]);
    pops_since_resum_ = 0;
}

std::optional<Pattern> PatternDetector::decide(double value, std::optional<double> ahead) {
    const std::size_t t = next_t_;
    if (!open_) {
        state_ = DetectorState{t, 0, {}};
        open_ = true;
        settled_ = false;
    }
    state_ = short_term_mean(state_, value);
    const double y_msh = state_.mean();
    const bool decrease = ahead && *ahead < y_msh - params_.decrease_margin;
    const bool conditions = state_.length > params_.lwz_th && y_msh > params_.y_th && decrease;

    std::optional<double> close_mean;
    if (params_.closure == Closure::literal) {
        if (conditions) close_mean = y_msh;
    } else if (!settled_) {
        if (conditions && *ahead <= params_.y_th) {
            settled_ = true;
            recognised_mean_ = y_msh;
        }
    } else if (!ahead || *ahead > params_.y_th) {
        close_mean = recognised_mean_;
    }

    if (!close_mean) return std::nullopt;
    open_ = false;
    return Pattern{++emitted_, state_.start, t, *close_mean, false};
}

std::optional<Pattern> PatternDetector::push(double value) {
    if (finished_) throw ContractError("PatternDetector::push after finish");
    ++seen_;
    if (params_.input_mode == InputMode::increments) {
        const double raw = value;
        value = previous_raw_ ? raw - *previous_raw_ : 0.0;
        previous_raw_ = raw;
    }
    if (!pending_.empty()) window_.add(value);
    pending_.push_back(value);
    if (pending_.size() <= params_.look_ahead) return std::nullopt;

    const double ahead = window_.value() / static_cast<double>(params_.look_ahead);
    auto pattern = decide(pending_.front(), ahead);
    pending_.pop_front();
    ++next_t_;
    // pending_.front() just left the look-ahead window.
    if (++pops_since_resum_ >= params_.look_ahead) {
        resum_window();
    } else {
        window_.add(-pending_.front());
    }
    return pattern;
}

std::vector<Pattern> PatternDetector::finish() {
    if (finished_) return {};
    finished_ = true;
    std::vector<Pattern> out;
    while (!pending_.empty()) {
        std::optional<double> ahead;
        if (pending_.size() > 1) {
            resum_window();
            ahead = window_.value() / static_cast<double>(pending_.size() - 1);
        }
        if (auto p = decide(pending_.front(), ahead)) out.push_back(*p);
        pending_.pop_front();
        ++next_t_;
    }
    if (open_ && params_.emit_partial_tail) {
        out.push_back(Pattern{++emitted_, state_.start, state_.current(), state_.mean(), true});
        open_ = false;
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<Pattern> snap_starts(std::span<const double> values, std::vector<Pattern> patterns,
                                 const DetectorParams& params) {
    if (params.snap_radius == 0) return patterns;
    for (auto& p : patterns) {
        std::size_t limit = p.end;
        if (!p.partial) {
            if (p.length() <= params.lwz_th) continue;
            limit = p.end - params.lwz_th;
        }
        const std::size_t hi = std::min(p.start + params.snap_radius, limit);
        const auto first = values.begin() + static_cast<std::ptrdiff_t>(p.start);
        const auto last = values.begin() + static_cast<std::ptrdiff_t>(hi + 1);
        p.start = static_cast<std::size_t>(std::min_element(first, last) - values.begin());
    }
    return patterns;
}

std::vector<Pattern> detect_patterns(const TimeSeries& series, const DetectorParams& params) {
    PatternDetector detector(params);
    std::vector<Pattern> patterns;
    for (double v : series.values) {
        if (auto p = detector.push(v)) patterns.push_back(*p);
    }
    for (auto& p : detector.finish()) patterns.push_back(p);
    return snap_starts(series.values, std::move(patterns), params);
}

std::vector<Pattern> detect_patterns_reference(const TimeSeries& series,
                                               const DetectorParams& params) {
    params.validate();
    if (series.size() > 100'000) {
        throw ContractError("detect_patterns_reference is limited to 100,000 samples");
    }
    const TimeSeries signal{series.name, series.timestamps, detector_input(series, params)};
    const auto& y = signal.values;

    std::vector<Pattern> patterns;
    std::size_t start = 0;
    bool settled = false;
    double recognised = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const std::size_t lwz = t - start + 1;
        const double sum = std::accumulate(y.begin() + static_cast<std::ptrdiff_t>(start),
                                           y.begin() + static_cast<std::ptrdiff_t>(t + 1), 0.0);
        const double y_msh = sum / static_cast<double>(lwz);
        const auto ahead = look_ahead_mean(y, t, params.look_ahead);
        const bool all_three =
            lwz > params.lwz_th && y_msh > params.y_th && decrease_follows(signal, t, y_msh, params);

        bool close = false;
        double mean = y_msh;
        if (params.closure == Closure::literal) {
            close = all_three;
        } else if (settled) {
            close = !ahead || *ahead > params.y_th;
            mean = recognised;
        } else if (all_three && *ahead <= params.y_th) {
            settled = true;
            recognised = y_msh;
        }
        if (close) {
            patterns.push_back(Pattern{patterns.size() + 1, start, t, mean, false});
            start = t + 1;
            settled = false;
        }
    }
    if (params.emit_partial_tail && start < y.size()) {
        const double sum = std::accumulate(y.begin() + static_cast<std::ptrdiff_t>(start), y.end(), 0.0);
        patterns.push_back(Pattern{patterns.size() + 1, start, y.size() - 1,
                                   sum / static_cast<double>(y.size() - start), true});
    }
    return snap_starts(series.values, std::move(patterns), params);
}

CaseAssignment assign_case_ids(const TimeSeries& series, const std::vector<Pattern>& patterns) {
    check_spans(patterns, series.size());
    CaseAssignment out;
    out.case_ids.assign(series.size(), std::nullopt);
    for (const auto& p : patterns) {
        for (std::size_t i = p.start; i <= p.end; ++i) out.case_ids[i] = p.id;
    }
    return out;
}

}  // namespace caseseg
