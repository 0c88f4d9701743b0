#include <doctest.h>

#include <cmath>

#include "stresskit/ingest.hpp"
#include "stresskit/preprocess.hpp"
#include "stresskit/rng.hpp"
#include "stresskit/stats.hpp"

using namespace stresskit;

namespace {

TimeSeries make_series(SignalKind kind, std::vector<double> values, double dt = 1.0) {
    TimeSeries s;
    s.kind = kind;
    s.values = std::move(values);
    s.timestamps.resize(s.values.size());
    for (std::size_t i = 0; i < s.values.size(); ++i)
        s.timestamps[i] = static_cast<double>(i) * dt;
    return s;
}

bool is_subset(const TimeSeries& sub, const TimeSeries& super) {
    std::size_t j = 0;
    for (std::size_t i = 0; i < sub.size(); ++i) {
        while (j < super.size() && super.timestamps[j] != sub.timestamps[i]) ++j;
        if (j == super.size() || super.values[j] != sub.values[i]) return false;
        ++j;
    }
    return true;
}

}  // namespace

TEST_CASE("range filter bounds per signal kind") {
    const TimeSeries hr =
        make_series(SignalKind::HeartRate, {25.0, 70.0, 230.0, 150.0});
    CHECK(prep::filter_physiological_range(hr).values ==
          std::vector<double>{70.0, 150.0});

    const TimeSeries eda = make_series(SignalKind::Eda, {0.005, 0.5, 120.0});
    CHECK(prep::filter_physiological_range(eda).values == std::vector<double>{0.5});

    const TimeSeries empty = make_series(SignalKind::HeartRate, {});
    CHECK(prep::filter_physiological_range(empty).empty());

    // RR keeps samples whose implied HR is inside [30, 220].
    const TimeSeries rr =
        make_series(SignalKind::RrInterval, {250.0, 800.0, 2100.0, 500.0});
    CHECK(prep::filter_physiological_range(rr).values ==
          std::vector<double>{800.0, 500.0});
    // Boundary: exactly 30 and 220 bpm survive.
    const TimeSeries rr_edge =
        make_series(SignalKind::RrInterval, {2000.0, 60000.0 / 220.0});
    CHECK(prep::filter_physiological_range(rr_edge).size() == 2);
}

TEST_CASE("mad_trim removes the hand-computed outlier") {
    const TimeSeries s =
        make_series(SignalKind::HeartRate, {10.0, 12.0, 11.0, 13.0, 50.0});
    const TimeSeries out = prep::mad_trim(s);
    CHECK(out.values == std::vector<double>{10.0, 12.0, 11.0, 13.0});

    const TimeSeries flat = make_series(SignalKind::HeartRate, {5.0, 5.0, 5.0, 5.0});
    CHECK(prep::mad_trim(flat).values == flat.values);

    const TimeSeries inside = make_series(SignalKind::HeartRate, {10.0, 11.0, 12.0});
    CHECK(prep::mad_trim(inside).values == inside.values);

    CHECK_THROWS_AS(prep::mad_trim(make_series(SignalKind::HeartRate, {})),
                    prep::EmptySeries);
}

TEST_CASE("mad_trim band property holds against the original series") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(40);
        for (double& x : v) x = rng.normal(10.0, 2.0);
        if (trial % 3 == 0) v[5] = 60.0;  // inject an outlier sometimes
        const TimeSeries s = make_series(SignalKind::HeartRate, v);
        const TimeSeries out = prep::mad_trim(s, 3.0);
        CHECK(is_subset(out, s));
        const double med = stats::median(s.values);
        const double band = 3.0 * stats::mad(s.values);
        for (double x : out.values) CHECK(std::abs(x - med) <= band + 1e-12);
    }
}

TEST_CASE("median filter flattens a centered spike at 4 Hz") {
    TimeSeries s = make_series(SignalKind::Eda, {1.0, 1.0, 1.0, 9.0, 1.0, 1.0, 1.0}, 0.25);
    const TimeSeries out = prep::median_filter(s, 5.0);
    CHECK(out.timestamps == s.timestamps);
    CHECK(out.values == std::vector<double>(7, 1.0));

    const TimeSeries constant = make_series(SignalKind::Eda, {2.0, 2.0, 2.0}, 0.25);
    CHECK(prep::median_filter(constant).values == constant.values);

    const TimeSeries single = make_series(SignalKind::Eda, {0.7});
    CHECK(prep::median_filter(single).values == single.values);
}

TEST_CASE("median filter output values come from the window multiset") {
    Rng rng(11);
    std::vector<double> v(200);
    for (double& x : v) x = rng.uniform(0.0, 1.0);
    const TimeSeries s = make_series(SignalKind::Eda, v, 0.25);
    const TimeSeries out = prep::median_filter(s, 5.0);
    REQUIRE(out.size() == s.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        bool found = false;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (std::abs(s.timestamps[j] - s.timestamps[i]) <= 2.5 && s.values[j] == out.values[i])
                found = true;
        }
        CHECK(found);
    }
}

TEST_CASE("zscore matches hand-computed values and contract") {
    const TimeSeries s = make_series(SignalKind::HeartRate, {1.0, 2.0, 3.0});
    const auto [out, st] = prep::zscore(s);
    CHECK(out.values[0] == doctest::Approx(-1.224744871391589).epsilon(1e-9));
    CHECK(out.values[1] == doctest::Approx(0.0));
    CHECK(out.values[2] == doctest::Approx(1.224744871391589).epsilon(1e-9));
    CHECK(st.std == doctest::Approx(0.816496580927726).epsilon(1e-9));

    CHECK(stats::mean(out.values) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(stats::pop_std(out.values) == doctest::Approx(1.0).epsilon(1e-9));

    CHECK_THROWS_AS(prep::zscore(make_series(SignalKind::HeartRate, {5.0, 5.0, 5.0})),
                    prep::DegenerateSeries);
    CHECK_THROWS_AS(prep::zscore(make_series(SignalKind::HeartRate, {5.0})),
                    prep::DegenerateSeries);
}

TEST_CASE("zscore_apply re-applies stored statistics") {
    prep::NormStats st;
    st.mean = 2.0;
    st.std = 1.0;
    const TimeSeries one = make_series(SignalKind::HeartRate, {2.0});
    CHECK(prep::zscore_apply(one, st).values[0] == doctest::Approx(0.0));

    st.mean = 3.0;
    st.std = 2.0;
    const TimeSeries five = make_series(SignalKind::HeartRate, {5.0});
    CHECK(prep::zscore_apply(five, st).values[0] == doctest::Approx(1.0));

    st.std = 0.0;
    CHECK_THROWS_AS(prep::zscore_apply(five, st), prep::DegenerateStats);

    // Consistency: apply with the returned stats reproduces zscore output.
    const TimeSeries s = make_series(SignalKind::RrInterval, {700.0, 800.0, 900.0, 850.0});
    const auto [normalized, stats2] = prep::zscore(s);
    const TimeSeries again = prep::zscore_apply(s, stats2);
    CHECK(again.values == normalized.values);
}

TEST_CASE("minmax maps endpoints to 0 and 1 exactly") {
    const TimeSeries s = make_series(SignalKind::Eda, {2.0, 4.0, 6.0});
    const auto [out, st] = prep::minmax(s);
    CHECK(out.values == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(st.min == 2.0);
    CHECK(st.max == 6.0);

    Rng rng(5);
    std::vector<double> v(30);
    for (double& x : v) x = rng.uniform(0.1, 10.0);
    const auto [out2, st2] = prep::minmax(make_series(SignalKind::Eda, v));
    CHECK(*std::min_element(out2.values.begin(), out2.values.end()) == 0.0);
    CHECK(*std::max_element(out2.values.begin(), out2.values.end()) == 1.0);

    CHECK_THROWS_AS(prep::minmax(make_series(SignalKind::Eda, {0.5, 0.5})),
                    prep::DegenerateSeries);
}

namespace {

DeviceSession make_session(DeviceKind device, bool with_eda) {
    Rng rng(17);
    TimeSeries rr;
    rr.kind = SignalKind::RrInterval;
    double t = 0.0;
    while (t < 200.0) {
        rr.timestamps.push_back(t);
        rr.values.push_back(rng.normal(800.0, 40.0));
        t += rr.values.back() / 1000.0;
    }
    std::map<SignalKind, TimeSeries> signals{{SignalKind::RrInterval, rr}};
    if (with_eda) {
        TimeSeries eda;
        eda.kind = SignalKind::Eda;
        for (int i = 0; i < 800; ++i) {
            eda.timestamps.push_back(0.25 * i);
            eda.values.push_back(0.3 + 0.05 * std::sin(i * 0.01) + rng.normal(0.0, 0.003));
        }
        signals[SignalKind::Eda] = eda;
    }
    ProtocolTimeline timeline;
    timeline.segments = {{SegmentLabel::Baseline, 0.0, 200.0}};
    return ingest::assemble_session("subj", device, std::move(signals), timeline);
}

}  // namespace

TEST_CASE("preprocess_session derives HR, normalizes, and reports stats") {
    const DeviceSession session = make_session(DeviceKind::BiopacMP160, true);
    const prep::PreprocessedSession pre = prep::preprocess_session(session);

    REQUIRE(pre.session.has(SignalKind::HeartRate));
    REQUIRE(pre.session.has(SignalKind::RrInterval));
    REQUIRE(pre.session.has(SignalKind::Eda));

    CHECK(stats::mean(pre.session.at(SignalKind::HeartRate).values) ==
          doctest::Approx(0.0).epsilon(1e-9));
    CHECK(stats::pop_std(pre.session.at(SignalKind::RrInterval).values) ==
          doctest::Approx(1.0).epsilon(1e-9));
    const auto& eda_vals = pre.session.at(SignalKind::Eda).values;
    CHECK(*std::min_element(eda_vals.begin(), eda_vals.end()) == 0.0);
    CHECK(*std::max_element(eda_vals.begin(), eda_vals.end()) == 1.0);
    CHECK(pre.norm.count(SignalKind::HeartRate) == 1);
    CHECK(pre.norm.count(SignalKind::Eda) == 1);

    // Determinism: bit-identical on identical input.
    const prep::PreprocessedSession again = prep::preprocess_session(session);
    CHECK(again.session.at(SignalKind::HeartRate).values ==
          pre.session.at(SignalKind::HeartRate).values);
    CHECK(again.session.at(SignalKind::Eda).values == eda_vals);
}

TEST_CASE("preprocess_session removes an HR spike and names failing signals") {
    DeviceSession session = make_session(DeviceKind::PolarH10, false);
    // A 250 bpm burst corresponds to RR = 240 ms, outside the band.
    session.signals[SignalKind::RrInterval].values[10] = 240.0;
    const prep::PreprocessedSession pre = prep::preprocess_session(session);
    // Spike is absent downstream: all surviving implied HRs inside [30, 220].
    const auto& rr_norm = pre.session.at(SignalKind::RrInterval);
    CHECK(rr_norm.size() ==
          session.signals[SignalKind::RrInterval].size() - 1);

    DeviceSession bad = make_session(DeviceKind::BiopacMP160, true);
    for (double& v : bad.signals[SignalKind::Eda].values) v = 0.001;  // all out of range
    try {
        prep::preprocess_session(bad);
        FAIL("expected an error naming Eda");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("Eda") != std::string::npos);
    }
}
