#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stresskit {

// Base class for all pipeline errors so callers can catch by layer.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

enum class SignalKind { HeartRate, RrInterval, Eda };
enum class DeviceKind { BiopacMP160, PolarH10, EmpaticaE4, GarminForerunner55s };
enum class SegmentLabel { Baseline, Rest, MentalArithmetic, Startle, ColdPressor };

const char* to_string(SignalKind k);
const char* to_string(DeviceKind d);
const char* to_string(SegmentLabel s);

std::optional<SignalKind> signal_kind_from_string(const std::string& s);
std::optional<DeviceKind> device_kind_from_string(const std::string& s);
std::optional<SegmentLabel> segment_label_from_string(const std::string& s);

// All four devices in the fixed order used by reports.
const std::vector<DeviceKind>& all_devices();

bool device_supports_eda(DeviceKind d);

// Timestamped scalar samples. Timestamps are seconds since session start and
// strictly increasing once a series has passed ingestion.
struct TimeSeries {
    SignalKind kind = SignalKind::HeartRate;
    std::vector<double> timestamps;
    std::vector<double> values;

    std::size_t size() const { return timestamps.size(); }
    bool empty() const { return timestamps.empty(); }
    double duration() const {
        return timestamps.empty() ? 0.0 : timestamps.back() - timestamps.front();
    }
};

// Throws std::logic_error when the series violates its invariants
// (mismatched lengths, non-finite values, non-increasing timestamps).
void check_series(const TimeSeries& s);

struct Segment {
    SegmentLabel label = SegmentLabel::Baseline;
    double start_s = 0.0;
    double end_s = 0.0;
};

bool is_stressor(SegmentLabel l);

// Ordered, non-overlapping labeled segments; the first one is Baseline.
// t0_hint carries the session start in the device export clock when the
// protocol file declares one ("# t0 <seconds>").
struct ProtocolTimeline {
    std::vector<Segment> segments;
    std::optional<double> t0_hint;

    double end_s() const { return segments.empty() ? 0.0 : segments.back().end_s; }
};

struct OverlappingSegments : Error { using Error::Error; };
struct NonBaselineStart : Error { using Error::Error; };

// Throws OverlappingSegments / NonBaselineStart on invariant violations.
void check_timeline(const ProtocolTimeline& t);

struct MissingCardiacSignal : Error { using Error::Error; };
struct EdaNotSupportedForDevice : Error { using Error::Error; };

// One device's view of one lab session.
struct DeviceSession {
    std::string subject_id;
    DeviceKind device = DeviceKind::BiopacMP160;
    std::map<SignalKind, TimeSeries> signals;
    ProtocolTimeline timeline;

    bool has(SignalKind k) const { return signals.count(k) != 0; }
    const TimeSeries& at(SignalKind k) const { return signals.at(k); }
};

}  // namespace stresskit
