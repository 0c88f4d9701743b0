#include "stresskit/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "stresskit/stats.hpp"

namespace stresskit::prep {

namespace {

constexpr double kHrMin = 30.0;
constexpr double kHrMax = 220.0;
constexpr double kEdaMin = 0.01;
constexpr double kEdaMax = 100.0;

TimeSeries keep_if(const TimeSeries& s, auto&& pred) {
    TimeSeries out;
    out.kind = s.kind;
    out.timestamps.reserve(s.size());
    out.values.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (pred(s.values[i])) {
            out.timestamps.push_back(s.timestamps[i]);
            out.values.push_back(s.values[i]);
        }
    }
    return out;
}

// Median that stays inside the sample set: middle element for odd counts,
// lower middle for even counts.
double element_median(std::vector<double>& window) {
    const std::size_t n = window.size();
    auto mid = window.begin() + static_cast<std::ptrdiff_t>((n - 1) / 2);
    std::nth_element(window.begin(), mid, window.end());
    return *mid;
}

}  // namespace

TimeSeries filter_physiological_range(const TimeSeries& series) {
    switch (series.kind) {
        case SignalKind::HeartRate:
            return keep_if(series, [](double v) { return v >= kHrMin && v <= kHrMax; });
        case SignalKind::Eda:
            return keep_if(series, [](double v) { return v >= kEdaMin && v <= kEdaMax; });
        case SignalKind::RrInterval:
            return keep_if(series, [](double v) {
                if (v <= 0.0) return false;
                const double implied_hr = 60000.0 / v;
                return implied_hr >= kHrMin && implied_hr <= kHrMax;
            });
    }
    return series;
}

TimeSeries mad_trim(const TimeSeries& series, double k) {
    if (series.empty()) throw EmptySeries("mad_trim: empty series");
    const double med = stats::median(series.values);
    const double m = stats::mad(series.values);
    if (m == 0.0) return series;  // flat signal has no outliers by this rule
    return keep_if(series, [&](double v) { return std::abs(v - med) <= k * m; });
}

TimeSeries median_filter(const TimeSeries& series, double window_s) {
    if (series.empty()) throw EmptySeries("median_filter: empty series");
    const double half = window_s / 2.0;
    TimeSeries out = series;
    std::size_t lo = 0, hi = 0;
    std::vector<double> window;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double t = series.timestamps[i];
        while (lo < series.size() && series.timestamps[lo] < t - half) ++lo;
        while (hi < series.size() && series.timestamps[hi] <= t + half) ++hi;
        window.assign(series.values.begin() + static_cast<std::ptrdiff_t>(lo),
                      series.values.begin() + static_cast<std::ptrdiff_t>(hi));
        out.values[i] = element_median(window);
    }
    return out;
}

std::pair<TimeSeries, NormStats> zscore(const TimeSeries& series) {
    if (series.size() < 2) throw DegenerateSeries("zscore: need at least 2 samples");
    NormStats st;
    st.mean = stats::mean(series.values);
    st.std = stats::pop_std(series.values);
    st.min = *std::min_element(series.values.begin(), series.values.end());
    st.max = *std::max_element(series.values.begin(), series.values.end());
    if (st.std == 0.0) throw DegenerateSeries("zscore: zero standard deviation");
    return {zscore_apply(series, st), st};
}

TimeSeries zscore_apply(const TimeSeries& series, const NormStats& stats) {
    if (!(stats.std > 0.0)) throw DegenerateStats("zscore_apply: non-positive std");
    TimeSeries out = series;
    for (double& v : out.values) v = (v - stats.mean) / stats.std;
    return out;
}

std::pair<TimeSeries, NormStats> minmax(const TimeSeries& series) {
    if (series.empty()) throw DegenerateSeries("minmax: empty series");
    NormStats st;
    st.min = *std::min_element(series.values.begin(), series.values.end());
    st.max = *std::max_element(series.values.begin(), series.values.end());
    st.mean = stats::mean(series.values);
    st.std = stats::pop_std(series.values);
    if (st.max == st.min) throw DegenerateSeries("minmax: constant series");
    return {minmax_apply(series, st), st};
}

TimeSeries minmax_apply(const TimeSeries& series, const NormStats& stats) {
    if (!(stats.max > stats.min)) throw DegenerateStats("minmax_apply: max <= min");
    TimeSeries out = series;
    for (double& v : out.values) v = (v - stats.min) / (stats.max - stats.min);
    return out;
}

namespace {

TimeSeries derive_cardiac(const TimeSeries& src, SignalKind want) {
    TimeSeries out;
    out.kind = want;
    out.timestamps = src.timestamps;
    out.values.resize(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) out.values[i] = 60000.0 / src.values[i];
    return out;
}

}  // namespace

PreprocessedSession preprocess_session(const DeviceSession& session) {
    PreprocessedSession out;
    out.session.subject_id = session.subject_id;
    out.session.device = session.device;
    out.session.timeline = session.timeline;

    auto run = [&](SignalKind kind, auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            throw Error(std::string(to_string(kind)) + ": " + e.what());
        }
    };

    std::map<SignalKind, TimeSeries> trimmed;

    if (session.has(SignalKind::RrInterval)) {
        run(SignalKind::RrInterval, [&] {
            TimeSeries s = filter_physiological_range(session.at(SignalKind::RrInterval));
            if (s.empty()) throw EmptySeries("empty after range filter");
            trimmed[SignalKind::RrInterval] = mad_trim(s);
        });
    }
    if (session.has(SignalKind::HeartRate)) {
        run(SignalKind::HeartRate, [&] {
            TimeSeries s = filter_physiological_range(session.at(SignalKind::HeartRate));
            if (s.empty()) throw EmptySeries("empty after range filter");
            trimmed[SignalKind::HeartRate] = mad_trim(s);
        });
    }

    // Devices that export only one cardiac signal: derive the other per beat.
    if (!trimmed.count(SignalKind::HeartRate) && trimmed.count(SignalKind::RrInterval)) {
        run(SignalKind::HeartRate, [&] {
            trimmed[SignalKind::HeartRate] =
                derive_cardiac(trimmed.at(SignalKind::RrInterval), SignalKind::HeartRate);
        });
    } else if (!trimmed.count(SignalKind::RrInterval) && trimmed.count(SignalKind::HeartRate)) {
        run(SignalKind::RrInterval, [&] {
            trimmed[SignalKind::RrInterval] =
                derive_cardiac(trimmed.at(SignalKind::HeartRate), SignalKind::RrInterval);
        });
    }

    for (auto& [kind, series] : trimmed) {
        run(kind, [&, k = kind] {
            auto [normalized, st] = zscore(series);
            out.session.signals[k] = std::move(normalized);
            out.norm[k] = st;
        });
    }

    if (session.has(SignalKind::Eda)) {
        run(SignalKind::Eda, [&] {
            TimeSeries s = filter_physiological_range(session.at(SignalKind::Eda));
            if (s.empty()) throw EmptySeries("empty after range filter");
            s = median_filter(s);
            auto [normalized, st] = minmax(s);
            out.session.signals[SignalKind::Eda] = std::move(normalized);
            out.norm[SignalKind::Eda] = st;
        });
    }

    return out;
}

}  // namespace stresskit::prep
