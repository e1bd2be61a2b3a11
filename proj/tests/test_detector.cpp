#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "caseseg/detector.hpp"
#include "caseseg/ingest.hpp"
#include "caseseg/synth.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace caseseg;

namespace {

SynthParams sawtooth5(double sigma) {
    SynthParams p;
    p.n_cycles = 5;
    p.period = 3000;
    p.peak = 250.0;
    p.dwell = 200;
    p.noise_sigma = sigma;
    p.seed = 11;
    return p;
}

DetectorParams shearer_params() {
    DetectorParams p;
    p.y_th = 10.3;
    p.lwz_th = 100;
    p.look_ahead = 30;
    return p;
}

void check_pattern_invariants(const std::vector<Pattern>& patterns, const DetectorParams& params,
                              std::size_t length) {
    CHECK_NOTHROW(check_spans(patterns, length));
    for (std::size_t k = 0; k < patterns.size(); ++k) {
        const auto& p = patterns[k];
        CHECK(p.id == k + 1);
        if (p.partial) {
            CHECK(k + 1 == patterns.size());
            continue;
        }
        CHECK(p.length() > params.lwz_th);
        if (params.input_mode == InputMode::raw) CHECK(p.mean_at_detection > params.y_th);
    }
}

bool same_spans(const std::vector<Pattern>& a, const std::vector<Pattern>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].id != b[i].id || a[i].start != b[i].start || a[i].end != b[i].end ||
            a[i].partial != b[i].partial) {
            return false;
        }
    }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// short_term_mean

TEST_CASE("short_term_mean: two-point mean") {
    auto st = short_term_mean(DetectorState{}, 5.0);
    st = short_term_mean(st, 7.0);
    CHECK(st.mean() == 6.0);
    CHECK(st.length == 2);
}

TEST_CASE("short_term_mean: zero series") {
    DetectorState st;
    for (int i = 0; i < 4; ++i) st = short_term_mean(st, 0.0);
    CHECK(st.mean() == 0.0);
    CHECK(st.length == 4);
}

TEST_CASE("short_term_mean agrees with a batch mean") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> noise(100.0, 40.0);
    std::vector<double> v(10'001);
    for (auto& x : v) x = noise(rng);
    DetectorState st;
    for (std::size_t k = 0; k < v.size(); ++k) {
        st = short_term_mean(st, v[k]);
        if (k % 97 == 0 || k + 1 == v.size()) {
            long double batch = 0.0L;
            for (std::size_t i = 0; i <= k; ++i) batch += v[i];
            batch /= static_cast<long double>(k + 1);
            CHECK(std::abs(st.mean() - static_cast<double>(batch)) <= 1e-9 * std::abs(static_cast<double>(batch)));
        }
    }
}

TEST_CASE("running mean stays within 1e-9 over a shearer-length series") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 300.0);
    std::vector<double> v(352'668);
    for (auto& x : v) x = u(rng) + 1e-7 * u(rng);
    DetectorState st;
    for (double x : v) st = short_term_mean(st, x);
    long double batch = 0.0L;
    for (double x : v) batch += x;
    batch /= static_cast<long double>(v.size());
    CHECK(std::abs(st.mean() - static_cast<double>(batch)) <= 1e-9 * static_cast<double>(batch));
}

// ---------------------------------------------------------------------------
// decrease_follows

TEST_CASE("decrease_follows") {
    DetectorParams p;
    p.look_ahead = 5;

    SUBCASE("strict decrease") {
        const auto s = testing::make_series({10, 10, 10, 9, 9, 9, 9, 9});
        CHECK(decrease_follows(s, 2, 10.0, p));
    }
    SUBCASE("flat is not a decrease") {
        const auto s = testing::make_series({10, 10, 10, 10, 10, 10});
        CHECK_FALSE(decrease_follows(s, 2, 10.0, p));
    }
    SUBCASE("margin") {
        const auto s = testing::make_series({10, 10, 10, 9, 9, 9, 9, 9});
        p.decrease_margin = 1.0;
        CHECK_FALSE(decrease_follows(s, 2, 10.0, p));
        p.decrease_margin = 0.5;
        CHECK(decrease_follows(s, 2, 10.0, p));
    }
    SUBCASE("last sample has nothing after it") {
        const auto s = testing::make_series({10, 0});
        CHECK(decrease_follows(s, 0, 10.0, p));
        CHECK_FALSE(decrease_follows(s, 1, 10.0, p));
    }
    SUBCASE("window is truncated at the series end") {
        const auto s = testing::make_series({0, 4, 2});
        CHECK(look_ahead_mean(s.values, 0, 5) == 3.0);
    }
}

TEST_CASE("decrease_follows at a sawtooth peak") {
    // 0, 1, ..., 250, 0, 1, ...: the tooth peaks at t = 250 and drops back to 0.
    std::vector<double> v;
    for (int rep = 0; rep < 2; ++rep)
        for (int i = 0; i <= 250; ++i) v.push_back(i);
    const auto s = testing::make_series(v);
    const double y_msh = std::accumulate(v.begin(), v.begin() + 251, 0.0) / 251.0;
    CHECK(y_msh == 125.0);
    DetectorParams p;
    p.look_ahead = 30;
    // Next 30 samples are 0..29, mean 14.5.
    CHECK(look_ahead_mean(s.values, 250, 30) == 14.5);
    CHECK(decrease_follows(s, 250, y_msh, p));
    // At t = 219 the next 30 samples are 220..249, mean 234.5 > y_msh = 109.5.
    CHECK(look_ahead_mean(s.values, 219, 30) == 234.5);
    CHECK_FALSE(decrease_follows(s, 219, 109.5, p));
}

// ---------------------------------------------------------------------------
// detect_patterns

TEST_CASE("constant zero series yields nothing") {
    const auto s = testing::make_series(std::vector<double>(5000, 0.0));
    CHECK(detect_patterns(s, shearer_params()).empty());
    CHECK(detect_patterns(testing::make_series({}), shearer_params()).empty());
}

TEST_CASE("five noisy synthetic cycles give five patterns near the true cycle ends") {
    const auto synth = generate_cyclic_series(sawtooth5(2.0));
    const auto params = shearer_params();
    const auto patterns = detect_patterns(synth.series, params);
    REQUIRE(patterns.size() == 5);
    check_pattern_invariants(patterns, params, synth.series.size());
    for (std::size_t k = 0; k < 5; ++k) {
        const auto truth_end = static_cast<long>(synth.labels[k].end);
        CHECK(std::abs(static_cast<long>(patterns[k].end) - truth_end) <= 100);
    }
    CHECK(same_spans(patterns, detect_patterns_reference(synth.series, params)));
}

TEST_CASE("noiseless cycles: pattern ends sit just past each cycle boundary") {
    const auto synth = generate_cyclic_series(sawtooth5(0.0));
    const auto patterns = detect_patterns(synth.series, shearer_params());
    REQUIRE(patterns.size() == 5);
    CHECK(patterns[0].start == 0);
    CHECK(patterns[4].end == synth.series.size() - 1);
    // Rise starts at the cycle boundary c with slope 250/1300 per sample; the
    // 30-sample look-ahead mean after t exceeds 10.3 first at t = c + 39.
    for (std::size_t k = 0; k < 4; ++k) CHECK(patterns[k].end == synth.labels[k].end + 40);
}

TEST_CASE("literal closure fires repeatedly on a falling ramp") {
    const auto synth = generate_cyclic_series(sawtooth5(0.0));
    auto params = shearer_params();
    params.closure = Closure::literal;
    const auto patterns = detect_patterns(synth.series, params);
    CHECK(patterns.size() > 10);
    check_pattern_invariants(patterns, params, synth.series.size());
    CHECK(same_spans(patterns, detect_patterns_reference(synth.series, params)));
}

TEST_CASE("literal closure on a sawtooth closes where the look-ahead dips below the mean") {
    // Teeth 0, 1, ..., 250. For t near the first peak, y_msh = t / 2 and the
    // look-ahead window holds t+1..250 followed by 0..t-222. At t = 235 its mean
    // is (3645 + 91) / 30 = 124.53 > 117.5; at t = 236 it is
    // (3409 + 120) / 30 = 117.63 < 118, so the first pattern is [0, 236].
    std::vector<double> v;
    for (int rep = 0; rep < 4; ++rep)
        for (int i = 0; i <= 250; ++i) v.push_back(i);
    auto params = shearer_params();
    params.closure = Closure::literal;
    const auto patterns = detect_patterns(testing::make_series(v), params);
    REQUIRE_FALSE(patterns.empty());
    CHECK(patterns[0].start == 0);
    CHECK(patterns[0].end == 236);
    CHECK(patterns[0].mean_at_detection == 118.0);
}

TEST_CASE("unfinished tail is dropped unless requested") {
    // One full cycle, then a rise that never comes back down.
    auto synth = generate_cyclic_series(sawtooth5(0.0));
    std::vector<double> v(synth.series.values.begin(), synth.series.values.begin() + 3000 + 1500);
    auto params = shearer_params();
    const auto s = testing::make_series(v);
    const auto plain = detect_patterns(s, params);
    REQUIRE(plain.size() == 1);
    CHECK_FALSE(plain[0].partial);

    params.emit_partial_tail = true;
    const auto with_tail = detect_patterns(s, params);
    REQUIRE(with_tail.size() == 2);
    CHECK(with_tail[1].partial);
    CHECK(with_tail[1].start == plain[0].end + 1);
    CHECK(with_tail[1].end == v.size() - 1);
    CHECK(same_spans(with_tail, detect_patterns_reference(s, params)));
}

TEST_CASE("a cycle that has settled into its trough closes at the series end") {
    const auto synth = generate_cyclic_series(sawtooth5(0.0));
    const std::vector<double> v(synth.series.values.begin(), synth.series.values.begin() + 2900);
    const auto patterns = detect_patterns(testing::make_series(v), shearer_params());
    REQUIRE(patterns.size() == 1);
    CHECK(patterns[0].end == 2899);
    CHECK_FALSE(patterns[0].partial);
}

TEST_CASE("increments mode detects on the differenced series") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const auto s = testing::make_series(testing::random_signal(rng, 3000));
        auto params = testing::random_params(rng);
        params.snap_radius = 0;
        params.input_mode = InputMode::increments;
        auto raw_params = params;
        raw_params.input_mode = InputMode::raw;
        const auto diffed = testing::make_series(detector_input(s, params));
        CHECK(same_spans(detect_patterns(s, params), detect_patterns(diffed, raw_params)));
    }
}

TEST_CASE("snapping moves starts forward to the local minimum") {
    auto synth = generate_cyclic_series(sawtooth5(0.0));
    auto params = shearer_params();
    params.snap_radius = 100;
    const auto plain = detect_patterns(synth.series, shearer_params());
    const auto snapped = detect_patterns(synth.series, params);
    REQUIRE(snapped.size() == plain.size());
    CHECK(snapped[0].start == 0);
    for (std::size_t k = 1; k < snapped.size(); ++k) {
        CHECK(snapped[k].end == plain[k].end);
        CHECK(snapped[k].start >= plain[k].start);
        CHECK(snapped[k].start <= plain[k].start + 100);
        const auto lo = synth.series.values.begin() + static_cast<long>(plain[k].start);
        CHECK(synth.series.values[snapped[k].start] == *std::min_element(lo, lo + 101));
    }
    check_pattern_invariants(snapped, params, synth.series.size());
}

TEST_CASE("snapping never shrinks a pattern to lwz_th") {
    DetectorParams p;
    p.lwz_th = 10;
    p.snap_radius = 50;
    std::vector<double> v(20, 5.0);
    v[15] = 0.0;  // minimum beyond the allowed range
    const auto snapped = snap_starts(v, {Pattern{1, 0, 19, 6.0, false}}, p);
    CHECK(snapped[0].start <= 9);
    CHECK(snapped[0].length() > p.lwz_th);
}

TEST_CASE("streaming detector reports patterns look_ahead samples late") {
    const auto synth = generate_cyclic_series(sawtooth5(2.0));
    const auto params = shearer_params();
    PatternDetector det(params);
    std::vector<Pattern> seen;
    for (std::size_t i = 0; i < synth.series.size(); ++i) {
        if (auto p = det.push(synth.series.values[i])) {
            CHECK(i == p->end + params.look_ahead);
            seen.push_back(*p);
        }
    }
    for (auto& p : det.finish()) seen.push_back(p);
    CHECK(det.samples_seen() == synth.series.size());
    CHECK(seen == detect_patterns(synth.series, params));
    CHECK_THROWS_AS(det.push(1.0), ContractError);
}

TEST_CASE("invalid parameters are rejected") {
    DetectorParams p;
    p.look_ahead = 0;
    CHECK_THROWS_AS(detect_patterns(testing::make_series({1, 2, 3}), p), ParameterError);
    CHECK_THROWS_AS(detect_patterns_reference(testing::make_series({1, 2, 3}), p), ParameterError);
}

TEST_CASE("reference is limited to 100,000 samples") {
    const auto s = testing::make_series(std::vector<double>(100'001, 0.0));
    CHECK_THROWS_AS(detect_patterns_reference(s, shearer_params()), ContractError);
}

// ---------------------------------------------------------------------------
// Properties

TEST_CASE("detect_patterns equals the from-scratch reference") {
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<std::size_t> len(0, 4000);
    for (int trial = 0; trial < 150; ++trial) {
        const auto s = testing::make_series(testing::random_signal(rng, len(rng)));
        const auto params = testing::random_params(rng);
        const auto fast = detect_patterns(s, params);
        const auto slow = detect_patterns_reference(s, params);
        CHECK(same_spans(fast, slow));
        check_pattern_invariants(fast, params, s.size());
        CHECK(fast == detect_patterns(s, params));
    }
}

TEST_CASE("prefix stability: cutting after a pattern's look-ahead keeps patterns 1..k") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        SynthParams sp = sawtooth5(2.0);
        sp.seed = rng();
        sp.n_cycles = 6;
        const auto synth = generate_cyclic_series(sp);
        const auto params = shearer_params();
        const auto full = detect_patterns(synth.series, params);
        for (std::size_t k = 0; k < full.size(); ++k) {
            const std::size_t cut = std::min(full[k].end + params.look_ahead, synth.series.size() - 1);
            const std::vector<double> prefix(synth.series.values.begin(),
                                             synth.series.values.begin() + static_cast<long>(cut + 1));
            const auto got = detect_patterns(testing::make_series(prefix), params);
            const std::vector<Pattern> want(full.begin(), full.begin() + static_cast<long>(k + 1));
            CHECK(got == want);
        }
    }
}

TEST_CASE("injected spikes never lower the pattern count") {
    const auto params = shearer_params();
    for (std::uint64_t series_seed = 0; series_seed < 5; ++series_seed) {
        SynthParams sp = sawtooth5(2.0);
        sp.n_cycles = 20;
        sp.seed = series_seed;
        const auto clean = generate_cyclic_series(sp).series;
        const auto base = detect_patterns(clean, params).size();
        CHECK(base == 20);
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            for (std::size_t count : {1u, 10u, 50u, 200u, 400u, 1000u}) {
                CHECK(detect_patterns(inject_outliers(clean, count, 700.0, seed), params).size() >= base);
            }
        }
    }
}

TEST_CASE("outliers removed by cleaning leave the clean detection intact") {
    SynthParams sp = sawtooth5(2.0);
    sp.n_cycles = 10;
    const auto clean = generate_cyclic_series(sp).series;
    const auto params = shearer_params();
    const auto clean_patterns = detect_patterns(clean, params);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto spiked = inject_outliers(clean, 100, 700.0, seed);
        const auto cleaned = clean_outliers(spiked, 300.0);
        CHECK(cleaned.removed_count == 100);
        const auto after = detect_patterns(cleaned.series, params);
        REQUIRE(after.size() == clean_patterns.size());
        // Map the cleaned indices back to the original series.
        for (std::size_t k = 0; k < after.size(); ++k) {
            const long start = static_cast<long>(cleaned.kept[after[k].start]);
            const long end = static_cast<long>(cleaned.kept[after[k].end]);
            CHECK(std::abs(start - static_cast<long>(clean_patterns[k].start)) <= 5);
            CHECK(std::abs(end - static_cast<long>(clean_patterns[k].end)) <= 5);
        }
    }
}

// ---------------------------------------------------------------------------
// assign_case_ids

TEST_CASE("assign_case_ids fills pattern spans") {
    const auto s = testing::make_series(std::vector<double>(10, 0.0));
    const auto a = assign_case_ids(s, {Pattern{1, 2, 5, 0.0, false}});
    const std::vector<std::optional<std::size_t>> want{std::nullopt, std::nullopt, 1, 1, 1, 1,
                                                       std::nullopt, std::nullopt, std::nullopt,
                                                       std::nullopt};
    CHECK(a.case_ids == want);
    CHECK(a.assigned_count() == 4);

    const auto none = assign_case_ids(s, {});
    CHECK(none.assigned_count() == 0);
    CHECK(none.size() == 10);
}

TEST_CASE("assign_case_ids rejects broken pattern lists") {
    const auto s = testing::make_series(std::vector<double>(10, 0.0));
    CHECK_THROWS_AS(assign_case_ids(s, {Pattern{1, 0, 5, 0, false}, Pattern{2, 5, 8, 0, false}}),
                    ContractError);
    CHECK_THROWS_AS(assign_case_ids(s, {Pattern{1, 3, 10, 0, false}}), ContractError);
}

TEST_CASE("five-cycle detection assigns five case ids with span-length counts") {
    const auto synth = generate_cyclic_series(sawtooth5(2.0));
    const auto patterns = detect_patterns(synth.series, shearer_params());
    const auto a = assign_case_ids(synth.series, patterns);
    std::vector<std::size_t> counts(patterns.size() + 1, 0);
    for (const auto& id : a.case_ids)
        if (id) ++counts.at(*id);
    CHECK(patterns.size() == 5);
    for (const auto& p : patterns) CHECK(counts[p.id] == p.length());
}
