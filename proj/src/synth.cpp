#include "caseseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <limits>
#include <optional>
#include <random>

namespace caseseg {

namespace {

// mt19937_64's output sequence is fixed by the standard; the distributions
// are not, so the conversions live here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Box-Muller; the second variate is cached.
    double normal() {
        if (spare_) {
            const double z = *spare_;
            spare_.reset();
            return z;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        return r * std::cos(theta);
    }

    // Uniform in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x = 0;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

double quantize(double v, double step) {
    return step > 0.0 ? std::round(v / step) * step : v;
}

}  // namespace

void SynthParams::validate() const {
    if (period <= 2 * dwell) throw ParameterError("period must exceed 2 * dwell");
    if (!(peak > 0.0) || !std::isfinite(peak)) throw ParameterError("peak must be positive");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw ParameterError("noise sigma must be >= 0");
    }
    if (!(resolution >= 0.0) || !std::isfinite(resolution)) {
        throw ParameterError("resolution must be >= 0");
    }
}

double cycle_template(const SynthParams& p, std::size_t offset) {
    const std::size_t ramp = (p.period - 2 * p.dwell) / 2;
    if (offset < ramp) return p.peak * static_cast<double>(offset) / static_cast<double>(ramp);
    if (offset < ramp + p.dwell) return p.peak;
    if (offset < 2 * ramp + p.dwell) {
        const auto k = static_cast<double>(offset - ramp - p.dwell);
        return p.peak * (1.0 - k / static_cast<double>(ramp));
    }
    return 0.0;
}

SyntheticSeries generate_cyclic_series(const SynthParams& params) {
    params.validate();
    SyntheticSeries out;
    out.series.name = "synthetic";
    const std::size_t total = params.n_cycles * params.period;
    out.series.timestamps.resize(total);
    out.series.values.resize(total);
    std::iota(out.series.timestamps.begin(), out.series.timestamps.end(), params.start_time);

    Rng rng(params.seed);
    for (std::size_t i = 0; i < total; ++i) {
        double v = cycle_template(params, i % params.period);
        if (params.noise_sigma > 0.0) v = std::max(0.0, v + params.noise_sigma * rng.normal());
        out.series.values[i] = quantize(v, params.resolution);
    }
    for (std::size_t k = 0; k < params.n_cycles; ++k) {
        out.labels.push_back(
            LabelSegment{k + 1, k * params.period, (k + 1) * params.period - 1, LabelKind::cycle});
    }
    return out;
}

TimeSeries inject_outliers(const TimeSeries& series, std::size_t count, double spike_value,
                           std::uint64_t seed) {
    if (count > series.size()) {
        throw ParameterError("cannot inject " + std::to_string(count) + " outliers into " +
                             std::to_string(series.size()) + " samples");
    }
    if (!std::isfinite(spike_value)) throw ParameterError("spike value must be finite");
    if (!series.empty() && !(spike_value > *std::max_element(series.values.begin(), series.values.end()))) {
        throw ParameterError("spike value must exceed every series value");
    }
    TimeSeries out = series;
    // Partial Fisher-Yates over the index set.
    std::vector<std::size_t> idx(series.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
        out.values[idx[i]] = spike_value;
    }
    return out;
}

}  // namespace caseseg
