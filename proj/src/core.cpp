#include "stresskit/core.hpp"

#include <cmath>

namespace stresskit {

const char* to_string(SignalKind k) {
    switch (k) {
        case SignalKind::HeartRate: return "HeartRate";
        case SignalKind::RrInterval: return "RrInterval";
        case SignalKind::Eda: return "Eda";
    }
    return "?";
}

const char* to_string(DeviceKind d) {
    switch (d) {
        case DeviceKind::BiopacMP160: return "BiopacMP160";
        case DeviceKind::PolarH10: return "PolarH10";
        case DeviceKind::EmpaticaE4: return "EmpaticaE4";
        case DeviceKind::GarminForerunner55s: return "GarminForerunner55s";
    }
    return "?";
}

const char* to_string(SegmentLabel s) {
    switch (s) {
        case SegmentLabel::Baseline: return "Baseline";
        case SegmentLabel::Rest: return "Rest";
        case SegmentLabel::MentalArithmetic: return "MentalArithmetic";
        case SegmentLabel::Startle: return "Startle";
        case SegmentLabel::ColdPressor: return "ColdPressor";
    }
    return "?";
}

std::optional<SignalKind> signal_kind_from_string(const std::string& s) {
    if (s == "HeartRate") return SignalKind::HeartRate;
    if (s == "RrInterval") return SignalKind::RrInterval;
    if (s == "Eda") return SignalKind::Eda;
    return std::nullopt;
}

std::optional<DeviceKind> device_kind_from_string(const std::string& s) {
    if (s == "BiopacMP160" || s == "biopac") return DeviceKind::BiopacMP160;
    if (s == "PolarH10" || s == "polar") return DeviceKind::PolarH10;
    if (s == "EmpaticaE4" || s == "empatica") return DeviceKind::EmpaticaE4;
    if (s == "GarminForerunner55s" || s == "garmin") return DeviceKind::GarminForerunner55s;
    return std::nullopt;
}

std::optional<SegmentLabel> segment_label_from_string(const std::string& s) {
    if (s == "Baseline") return SegmentLabel::Baseline;
    if (s == "Rest") return SegmentLabel::Rest;
    if (s == "MentalArithmetic") return SegmentLabel::MentalArithmetic;
    if (s == "Startle") return SegmentLabel::Startle;
    if (s == "ColdPressor") return SegmentLabel::ColdPressor;
    return std::nullopt;
}

const std::vector<DeviceKind>& all_devices() {
    static const std::vector<DeviceKind> kDevices = {
        DeviceKind::BiopacMP160,
        DeviceKind::PolarH10,
        DeviceKind::EmpaticaE4,
        DeviceKind::GarminForerunner55s,
    };
    return kDevices;
}

bool device_supports_eda(DeviceKind d) {
    return d == DeviceKind::BiopacMP160 || d == DeviceKind::EmpaticaE4;
}

void check_series(const TimeSeries& s) {
    if (s.timestamps.size() != s.values.size())
        throw std::logic_error("TimeSeries: timestamp/value length mismatch");
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s.timestamps[i]) || !std::isfinite(s.values[i]))
            throw std::logic_error("TimeSeries: non-finite sample");
        if (i > 0 && s.timestamps[i] <= s.timestamps[i - 1])
            throw std::logic_error("TimeSeries: timestamps not strictly increasing");
    }
}

bool is_stressor(SegmentLabel l) {
    return l == SegmentLabel::MentalArithmetic || l == SegmentLabel::Startle ||
           l == SegmentLabel::ColdPressor;
}

void check_timeline(const ProtocolTimeline& t) {
    if (t.segments.empty()) throw NonBaselineStart("timeline has no segments");
    if (t.segments.front().label != SegmentLabel::Baseline)
        throw NonBaselineStart("first segment must be Baseline, got " +
                               std::string(to_string(t.segments.front().label)));
    for (std::size_t i = 0; i < t.segments.size(); ++i) {
        const Segment& seg = t.segments[i];
        if (!(seg.end_s > seg.start_s))
            throw OverlappingSegments("segment " + std::to_string(i) + " has end <= start");
        if (i > 0 && seg.start_s < t.segments[i - 1].end_s)
            throw OverlappingSegments("segment " + std::to_string(i) +
                                      " overlaps the previous segment");
    }
}

}  // namespace stresskit
