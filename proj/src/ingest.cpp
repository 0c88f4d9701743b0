#include "stresskit/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stresskit/csvio.hpp"
#include "stresskit/stats.hpp"

namespace stresskit::ingest {

namespace {

const char* kind_column(SignalKind k) {
    switch (k) {
        case SignalKind::HeartRate: return "hr_bpm";
        case SignalKind::RrInterval: return "rr_ms";
        case SignalKind::Eda: return "eda_us";
    }
    return "value";
}

bool parse_double(std::string_view s, double& out) {
    // Trim spaces and a trailing CR from CRLF input.
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

std::string trim(std::string s) {
    auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
}

}  // namespace

TimeSeries load_signal_csv(const std::filesystem::path& path, DeviceKind device,
                           SignalKind kind, std::optional<double> session_t0,
                           IngestReport* report) {
    (void)device;  // every device exports the same canonical layout
    std::ifstream in(path);
    if (!in) throw MalformedFile("cannot open signal file: " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw EmptySignal("signal file has no header: " + path.string());
    {
        std::string header = trim(line);
        const auto comma = header.find(',');
        if (comma == std::string::npos || header.substr(0, comma) != "t_seconds")
            throw MalformedFile("bad signal header '" + header + "' in " + path.string());
        const std::string col = header.substr(comma + 1);
        if (col != "value" && col != kind_column(kind)) {
            if (col == "hr_bpm" || col == "rr_ms" || col == "eda_us")
                throw KindMismatch("file " + path.string() + " holds '" + col +
                                   "' but " + to_string(kind) + " was requested");
            throw MalformedFile("unknown value column '" + col + "' in " + path.string());
        }
    }

    IngestReport rep;
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        ++rep.total_rows;
        const auto comma = t.find(',');
        double ts = 0.0, v = 0.0;
        const bool ok = comma != std::string::npos &&
                        parse_double(std::string_view(t).substr(0, comma), ts) &&
                        parse_double(std::string_view(t).substr(comma + 1), v) &&
                        std::isfinite(ts) && std::isfinite(v);
        if (!ok) {
            ++rep.dropped_rows;
            continue;
        }
        ++rep.valid_rows;
        rows.emplace_back(ts, v);
    }

    if (rep.total_rows > 0 &&
        rep.dropped_rows * 10 > rep.total_rows)  // > 10% unusable
        throw MalformedFile("more than 10% unparseable rows in " + path.string());
    if (rows.empty()) throw EmptySignal("no valid samples in " + path.string());

    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    TimeSeries out;
    out.kind = kind;
    const double t0 = session_t0.value_or(0.0);
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i + 1;
        while (j < rows.size() && rows[j].first == rows[i].first) ++j;
        double value;
        if (j - i == 1) {
            value = rows[i].second;
        } else {
            std::vector<double> group;
            group.reserve(j - i);
            for (std::size_t k = i; k < j; ++k) group.push_back(rows[k].second);
            value = stats::median(group);
            rep.collapsed_rows += j - i - 1;
        }
        out.timestamps.push_back(rows[i].first - t0);
        out.values.push_back(value);
        i = j;
    }

    if (report) *report = rep;
    check_series(out);
    return out;
}

void write_signal_csv(const std::filesystem::path& path, const TimeSeries& series) {
    std::string body = "t_seconds,";
    body += kind_column(series.kind);
    body += '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        body += csv::format_double(series.timestamps[i]);
        body += ',';
        body += csv::format_double(series.values[i]);
        body += '\n';
    }
    csv::atomic_write(path, body);
}

ProtocolTimeline load_protocol(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedFile("cannot open protocol file: " + path.string());

    ProtocolTimeline timeline;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            std::istringstream dir(t.substr(1));
            std::string word;
            double v;
            if (dir >> word >> v && word == "t0") timeline.t0_hint = v;
            continue;
        }
        const auto c1 = t.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos : t.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw MalformedFile("protocol line " + std::to_string(lineno) +
                                ": expected 'label,start_s,end_s'");
        const auto label = segment_label_from_string(trim(t.substr(0, c1)));
        double start_s = 0.0, end_s = 0.0;
        if (!label || !parse_double(std::string_view(t).substr(c1 + 1, c2 - c1 - 1), start_s) ||
            !parse_double(std::string_view(t).substr(c2 + 1), end_s))
            throw MalformedFile("protocol line " + std::to_string(lineno) + ": parse error");
        timeline.segments.push_back(Segment{*label, start_s, end_s});
    }
    std::sort(timeline.segments.begin(), timeline.segments.end(),
              [](const Segment& a, const Segment& b) { return a.start_s < b.start_s; });
    check_timeline(timeline);
    return timeline;
}

void write_protocol(const std::filesystem::path& path, const ProtocolTimeline& timeline) {
    std::string body;
    if (timeline.t0_hint) body += "# t0 " + csv::format_double(*timeline.t0_hint) + "\n";
    for (const Segment& s : timeline.segments) {
        body += to_string(s.label);
        body += ',' + csv::format_double(s.start_s) + ',' + csv::format_double(s.end_s) + '\n';
    }
    csv::atomic_write(path, body);
}

ProtocolTimeline default_protocol() {
    ProtocolTimeline t;
    t.segments = {
        {SegmentLabel::Baseline, 0.0, 600.0},
        {SegmentLabel::MentalArithmetic, 600.0, 840.0},
        {SegmentLabel::Rest, 840.0, 1140.0},
        {SegmentLabel::Startle, 1140.0, 1380.0},
        {SegmentLabel::Rest, 1380.0, 1680.0},
        {SegmentLabel::ColdPressor, 1680.0, 1920.0},
    };
    return t;
}

DeviceSession assemble_session(std::string subject_id, DeviceKind device,
                               std::map<SignalKind, TimeSeries> signals,
                               ProtocolTimeline timeline) {
    if (!signals.count(SignalKind::HeartRate) && !signals.count(SignalKind::RrInterval))
        throw MissingCardiacSignal("session for subject " + subject_id +
                                   " has neither HeartRate nor RrInterval");
    if (signals.count(SignalKind::Eda) && !device_supports_eda(device))
        throw EdaNotSupportedForDevice(std::string(to_string(device)) +
                                       " does not record EDA");
    check_timeline(timeline);
    for (const auto& [kind, series] : signals) {
        if (series.kind != kind)
            throw std::logic_error("signal map key does not match series kind");
        check_series(series);
    }
    DeviceSession s;
    s.subject_id = std::move(subject_id);
    s.device = device;
    s.signals = std::move(signals);
    s.timeline = std::move(timeline);
    return s;
}

}  // namespace stresskit::ingest
