#pragma once

#include "caseseg/core.hpp"

#include <cstdint>
#include <vector>

namespace caseseg {

// One cycle of `period` samples: ramp 0 -> peak, dwell at peak, ramp back
// down, dwell at 0. Both ramps take (period - 2*dwell) / 2 samples; an odd
// remainder lengthens the low dwell.
struct SynthParams {
    std::size_t n_cycles = 5;
    std::size_t period = 3000;
    double peak = 250.0;
    std::size_t dwell = 200;
    double noise_sigma = 0.0;
    std::uint64_t seed = 42;
    Timestamp start_time = 1'704'067'200;  // 2024-01-01T00:00:00, one sample per second
    double resolution = 1e-3;              // values are rounded to this step; 0 keeps full precision

    void validate() const;  // throws ParameterError
};

struct SyntheticSeries {
    TimeSeries series;
    std::vector<LabelSegment> labels;  // one cycle segment per generated cycle
};

// Noiseless value at `offset` (0 <= offset < period) within a cycle.
double cycle_template(const SynthParams& params, std::size_t offset);

// Gaussian noise is clamped so values stay >= 0. Output depends only on the
// parameters, not on the platform's standard library.
SyntheticSeries generate_cyclic_series(const SynthParams& params);

// Overwrites `count` distinct, uniformly drawn samples with spike_value.
// Requires count <= L and spike_value > max(values); throws ParameterError.
TimeSeries inject_outliers(const TimeSeries& series, std::size_t count, double spike_value,
                           std::uint64_t seed);

}  // namespace caseseg
