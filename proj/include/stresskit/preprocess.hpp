#pragma once

#include <map>

#include "stresskit/core.hpp"

namespace stresskit::prep {

struct EmptySeries : Error { using Error::Error; };
struct DegenerateSeries : Error { using Error::Error; };
struct DegenerateStats : Error { using Error::Error; };

// Statistics that parameterize z-score and min-max normalization.  Stored so
// a frozen model can re-apply its training-time transform.
struct NormStats {
    double mean = 0.0;
    double std = 1.0;
    double min = 0.0;
    double max = 1.0;
};

// Physiological plausibility bounds: HR is kept in [30, 220] bpm, EDA in
// [0.01, 100] uS. RR intervals are filtered through the equivalent HR band,
// 30 <= 60000/RR <= 220.
TimeSeries filter_physiological_range(const TimeSeries& series);

// Keeps samples with |v - median| <= k * MAD. A zero MAD (flat signal)
// removes nothing.
TimeSeries mad_trim(const TimeSeries& series, double k = 3.0);

// Replaces each value with the median of samples within +-window_s/2 of its
// timestamp (window truncated at the edges). Timestamps are preserved. Even
// window counts take the lower middle order statistic so every output value
// is an element of its window.
TimeSeries median_filter(const TimeSeries& series, double window_s = 5.0);

std::pair<TimeSeries, NormStats> zscore(const TimeSeries& series);
TimeSeries zscore_apply(const TimeSeries& series, const NormStats& stats);

std::pair<TimeSeries, NormStats> minmax(const TimeSeries& series);
TimeSeries minmax_apply(const TimeSeries& series, const NormStats& stats);

struct PreprocessedSession {
    DeviceSession session;
    std::map<SignalKind, NormStats> norm;  // per-kind normalization statistics
};

// Per signal kind, in order: range filter -> MAD trim (HR/RR) -> median
// filter (EDA) -> normalization (z-score for HR/RR, min-max for EDA).
// A session that carries only one cardiac signal gets the other derived
// between trimming and normalization (HR = 60000/RR per beat, or the
// inverse), since both feature families are computed downstream.
// Errors are rethrown with the failing signal kind named.
PreprocessedSession preprocess_session(const DeviceSession& session);

}  // namespace stresskit::prep
