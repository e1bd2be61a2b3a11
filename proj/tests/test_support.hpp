#pragma once

// Generators and brute-force oracles shared by the unit and acceptance tests.
// Nothing here calls into the code under test's incremental paths.

#include "caseseg/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace caseseg::testing {

inline TimeSeries make_series(std::vector<double> values, std::string name = "t") {
    TimeSeries s;
    s.name = std::move(name);
    s.values = std::move(values);
    s.timestamps.resize(s.values.size());
    std::iota(s.timestamps.begin(), s.timestamps.end(), Timestamp{1'700'000'000});
    return s;
}

// Values on a 1/16 grid so every partial sum is exact in double precision and
// incremental and from-scratch means agree bit for bit.
inline double on_grid(double v) { return std::round(v * 16.0) / 16.0; }

// Cyclic-ish, random-walk, spiky or flat series of length n.
inline std::vector<double> random_signal(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> family_dist(0, 3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> v(n);
    switch (family_dist(rng)) {
        case 0: {  // trapezoid cycles with random period, height and noise
            const std::size_t period = 60 + static_cast<std::size_t>(u(rng) * 2000);
            const double peak = 5.0 + u(rng) * 300.0;
            const double sigma = u(rng) * 5.0;
            const std::size_t ramp = period * 2 / 5;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t k = i % period;
                double x = 0.0;
                if (k < ramp) x = peak * static_cast<double>(k) / static_cast<double>(ramp);
                else if (k < period / 2) x = peak;
                else if (k < period / 2 + ramp) x = peak * (1.0 - static_cast<double>(k - period / 2) / static_cast<double>(ramp));
                v[i] = on_grid(std::max(0.0, x + sigma * noise(rng)));
            }
            break;
        }
        case 1: {  // clamped random walk
            double x = u(rng) * 50.0;
            for (auto& e : v) {
                x = std::clamp(x + noise(rng) * 3.0, 0.0, 400.0);
                e = on_grid(x);
            }
            break;
        }
        case 2: {  // low noise with sparse spikes
            const double rate = u(rng) * 0.02;
            for (auto& e : v) e = on_grid(u(rng) < rate ? 700.0 : std::abs(noise(rng)) * 4.0);
            break;
        }
        default: {  // iid uniform
            const double scale = 1.0 + u(rng) * 100.0;
            for (auto& e : v) e = on_grid(u(rng) * scale);
            break;
        }
    }
    return v;
}

inline DetectorParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DetectorParams p;
    p.y_th = on_grid(u(rng) * 150.0);
    p.lwz_th = 1 + static_cast<std::size_t>(u(rng) * 400);
    p.look_ahead = 1 + static_cast<std::size_t>(u(rng) * 80);
    p.decrease_margin = u(rng) < 0.5 ? 0.0 : on_grid(u(rng) * 20.0);
    p.emit_partial_tail = u(rng) < 0.3;
    p.closure = u(rng) < 0.5 ? Closure::trough : Closure::literal;
    p.input_mode = u(rng) < 0.15 ? InputMode::increments : InputMode::raw;
    p.snap_radius = u(rng) < 0.2 ? static_cast<std::size_t>(u(rng) * 50) : 0;
    return p;
}

// Per-sample walk over every predicted sample, straight from the TP/FP/FN
// definitions.
inline ConfusionCounts confusion_by_sample(const std::vector<LabelSegment>& truth,
                                           const std::vector<Pattern>& pred,
                                           const std::vector<Match>& matching, std::size_t length) {
    std::vector<long> truth_of(length, -1);
    for (std::size_t i = 0; i < truth.size(); ++i)
        for (std::size_t s = truth[i].start; s <= truth[i].end; ++s) truth_of[s] = static_cast<long>(i);
    ConfusionCounts c;
    for (std::size_t j = 0; j < pred.size(); ++j) {
        long matched = -1;
        for (const auto& m : matching)
            if (m.pred_id == j + 1) matched = static_cast<long>(m.truth_id) - 1;
        for (std::size_t s = pred[j].start; s <= pred[j].end; ++s) {
            if (matched < 0 || truth_of[s] < 0) ++c.fn;
            else if (truth_of[s] == matched) ++c.tp;
            else ++c.fp;
        }
    }
    return c;
}

// Largest total overlap over all one-to-one matchings (rows, cols <= 8).
inline std::uint64_t best_assignment_total(const OverlapMatrix& m) {
    std::uint64_t best = 0;
    std::vector<bool> used(m.cols(), false);
    auto recurse = [&](auto& self, std::size_t row, std::uint64_t acc) -> void {
        if (row == m.rows()) {
            best = std::max(best, acc);
            return;
        }
        self(self, row + 1, acc);  // row left unmatched
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (used[c]) continue;
            used[c] = true;
            self(self, row + 1, acc + m.at(row, c));
            used[c] = false;
        }
    };
    recurse(recurse, 0, 0);
    return best;
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("caseseg-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    out << body;
}

}  // namespace caseseg::testing
