#pragma once

#include <filesystem>
#include <optional>

#include "stresskit/core.hpp"

namespace stresskit::ingest {

struct MalformedFile : Error { using Error::Error; };
struct EmptySignal : Error { using Error::Error; };
struct KindMismatch : Error { using Error::Error; };

struct IngestReport {
    std::size_t total_rows = 0;     // data rows seen (header excluded)
    std::size_t valid_rows = 0;     // rows that made it into the series pre-collapse
    std::size_t dropped_rows = 0;   // non-finite or unparseable rows
    std::size_t collapsed_rows = 0; // rows merged by duplicate-timestamp collapse
};

// Signal CSV layout (all four devices export through this canonical form):
//   header  "t_seconds,value" or "t_seconds,<kind column>"
//   rows    "<t>,<v>" one sample per line, decimal point, UTF-8, LF
// Kind columns are hr_bpm, rr_ms, eda_us; a kind-specific header that does
// not match the requested kind raises KindMismatch.
//
// Timestamps are shifted by session_t0 when provided (t0 comes from the
// protocol file); otherwise they are taken as already session-relative.
// Rows are sorted by time, duplicate timestamps collapse to the median of
// the colliding values, and non-finite rows are dropped and counted.
TimeSeries load_signal_csv(const std::filesystem::path& path, DeviceKind device,
                           SignalKind kind,
                           std::optional<double> session_t0 = std::nullopt,
                           IngestReport* report = nullptr);

// Writes the canonical layout with round-trip exact number formatting, so
// load(write(s)) == s.
void write_signal_csv(const std::filesystem::path& path, const TimeSeries& series);

// Protocol file: one segment per line "label,start_s,end_s"; labels are
// SegmentLabel spellings; '#' starts a comment. The directive "# t0 <sec>"
// declares the session start in the device export clock.
ProtocolTimeline load_protocol(const std::filesystem::path& path);

void write_protocol(const std::filesystem::path& path, const ProtocolTimeline& timeline);

// Bundled lab timeline: 10-minute baseline, then three 4-minute tasks
// separated by 5-minute rests, cold pressor last.
ProtocolTimeline default_protocol();

DeviceSession assemble_session(std::string subject_id, DeviceKind device,
                               std::map<SignalKind, TimeSeries> signals,
                               ProtocolTimeline timeline);

}  // namespace stresskit::ingest
