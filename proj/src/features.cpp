#include "stresskit/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "stresskit/csvio.hpp"
#include "stresskit/stats.hpp"

namespace stresskit::feat {

namespace {

constexpr std::size_t kMinWindowSamples = 4;
constexpr double kPeakThreshold = 0.01;
constexpr double kPeakSeparationS = 1.0;
constexpr double kWindowEdgeTol = 1e-9;

void append_stat_block(FeatureSchema& s, const std::string& prefix, const std::string& src) {
    for (const char* stat : {"mean", "std", "skew", "p05", "p25", "p50", "p75", "p95"}) {
        s.names.push_back(prefix + "_" + stat);
        s.sources.push_back(src);
    }
}

void append_eda_block(FeatureSchema& s, const std::string& prefix, const std::string& src) {
    for (const char* stat : {"mean", "std", "min", "max", "auc"}) {
        s.names.push_back(prefix + "_" + stat);
        s.sources.push_back(src);
    }
}

}  // namespace

FeatureSchema FeatureSchema::hrv_only() {
    FeatureSchema s;
    append_stat_block(s, "hr", "HR");
    append_stat_block(s, "rr", "RR");
    return s;
}

FeatureSchema FeatureSchema::hrv_eda() {
    FeatureSchema s = hrv_only();
    append_eda_block(s, "eda", "EDA-raw");
    append_eda_block(s, "tonic", "EDA-tonic");
    append_eda_block(s, "phasic", "EDA-phasic");
    s.names.push_back("phasic_peak_count");
    s.sources.push_back("EDA-phasic");
    return s;
}

bool FeatureMatrix::has_both_classes() const {
    bool pos = false, neg = false;
    for (const FeatureVector& r : rows) (r.label == 1 ? pos : neg) = true;
    return pos && neg;
}

std::vector<std::pair<double, double>> windows(double duration_s, const WindowSpec& spec) {
    if (!(spec.overlap_s >= 0.0 && spec.overlap_s < spec.width_s))
        throw std::invalid_argument("windows: need 0 <= overlap < width");
    if (duration_s < spec.width_s)
        throw SessionTooShort("windows: duration " + std::to_string(duration_s) +
                              "s shorter than one window");
    std::vector<std::pair<double, double>> out;
    const double step = spec.step_s();
    for (double start = 0.0; start + spec.width_s <= duration_s + kWindowEdgeTol;
         start += step)
        out.emplace_back(start, start + spec.width_s);
    return out;
}

namespace {

std::vector<double> stat_block(std::span<const double> v) {
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    return {
        stats::mean(v),
        stats::pop_std(v),
        stats::skewness(v),
        stats::percentile_sorted(sorted, 5.0),
        stats::percentile_sorted(sorted, 25.0),
        stats::percentile_sorted(sorted, 50.0),
        stats::percentile_sorted(sorted, 75.0),
        stats::percentile_sorted(sorted, 95.0),
    };
}

void append_component(std::vector<double>& out, std::span<const double> t,
                      std::span<const double> v) {
    out.push_back(stats::mean(v));
    out.push_back(stats::pop_std(v));
    out.push_back(*std::min_element(v.begin(), v.end()));
    out.push_back(*std::max_element(v.begin(), v.end()));
    out.push_back(stats::trapezoid(t, v));
}

}  // namespace

std::vector<double> hrv_features(std::span<const double> hr_window,
                                 std::span<const double> rr_window) {
    if (hr_window.size() < kMinWindowSamples || rr_window.size() < kMinWindowSamples)
        throw InsufficientSamples("hrv_features: need at least 4 samples per signal");
    std::vector<double> out = stat_block(hr_window);
    const std::vector<double> rr = stat_block(rr_window);
    out.insert(out.end(), rr.begin(), rr.end());
    return out;
}

std::vector<double> eda_features(std::span<const double> t, std::span<const double> raw,
                                 std::span<const double> tonic,
                                 std::span<const double> phasic) {
    if (t.size() < kMinWindowSamples || raw.size() != t.size() || tonic.size() != t.size() ||
        phasic.size() != t.size())
        throw InsufficientSamples("eda_features: need >= 4 aligned samples per component");
    std::vector<double> out;
    out.reserve(16);
    append_component(out, t, raw);
    append_component(out, t, tonic);
    append_component(out, t, phasic);
    out.push_back(static_cast<double>(
        detect_peaks(t, phasic, kPeakThreshold, kPeakSeparationS).size()));
    return out;
}

std::vector<std::size_t> detect_peaks(std::span<const double> t, std::span<const double> v,
                                      double threshold, double min_separation_s) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
        if (v[i] > threshold && v[i] > v[i - 1] && v[i] >= v[i + 1]) candidates.push_back(i);

    // Amplitude priority: a smaller peak inside the separation radius of an
    // already-kept one is suppressed.
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        if (v[a] != v[b]) return v[a] > v[b];
        return a < b;
    });
    std::vector<std::size_t> kept;
    for (std::size_t c : candidates) {
        bool blocked = false;
        for (std::size_t k : kept)
            if (std::abs(t[c] - t[k]) < min_separation_s) { blocked = true; break; }
        if (!blocked) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

WindowLabel label_window(double start_s, double end_s, const ProtocolTimeline& timeline,
                         Scenario scenario) {
    for (const Segment& seg : timeline.segments) {
        const bool inside = start_s >= seg.start_s - kWindowEdgeTol &&
                            end_s <= seg.end_s + kWindowEdgeTol;
        if (!inside) continue;
        if (seg.label == SegmentLabel::Baseline)
            return &seg == &timeline.segments.front() ? WindowLabel::Negative
                                                      : WindowLabel::Excluded;
        const bool counted =
            scenario == Scenario::AllStressors
                ? is_stressor(seg.label)
                : seg.label == SegmentLabel::MentalArithmetic;
        return counted ? WindowLabel::Positive : WindowLabel::Excluded;
    }
    return WindowLabel::Excluded;
}

namespace {

// Values (and timestamps) of samples inside the closed window [start, end].
struct WindowSlice {
    std::span<const double> t;
    std::span<const double> v;
};

WindowSlice slice(const TimeSeries& s, double start, double end) {
    const auto lo = std::lower_bound(s.timestamps.begin(), s.timestamps.end(),
                                     start - kWindowEdgeTol);
    const auto hi = std::upper_bound(s.timestamps.begin(), s.timestamps.end(),
                                     end + kWindowEdgeTol);
    const auto i0 = static_cast<std::size_t>(lo - s.timestamps.begin());
    const auto i1 = static_cast<std::size_t>(hi - s.timestamps.begin());
    return {std::span<const double>(s.timestamps).subspan(i0, i1 - i0),
            std::span<const double>(s.values).subspan(i0, i1 - i0)};
}

}  // namespace

FeatureMatrix build_feature_matrix(const DeviceSession& session,
                                   const std::optional<eda::EdaDecomposition>& decomposition,
                                   Scenario scenario, const WindowSpec& spec) {
    if (!session.has(SignalKind::HeartRate) || !session.has(SignalKind::RrInterval))
        throw MissingCardiacSignal("feature matrix: need preprocessed HR and RR");
    const bool with_eda = decomposition.has_value();
    if (with_eda && !session.has(SignalKind::Eda))
        throw std::logic_error("feature matrix: decomposition given without EDA signal");

    const TimeSeries& hr = session.at(SignalKind::HeartRate);
    const TimeSeries& rr = session.at(SignalKind::RrInterval);

    double duration = std::min(hr.timestamps.back(), rr.timestamps.back());
    if (with_eda) duration = std::min(duration, session.at(SignalKind::Eda).timestamps.back());

    FeatureMatrix out;
    out.schema = with_eda ? FeatureSchema::hrv_eda() : FeatureSchema::hrv_only();
    out.scenario = scenario;
    out.device = session.device;

    for (const auto& [start, end] : windows(duration, spec)) {
        const WindowLabel label = label_window(start, end, session.timeline, scenario);
        if (label == WindowLabel::Excluded) continue;

        const WindowSlice hr_w = slice(hr, start, end);
        const WindowSlice rr_w = slice(rr, start, end);
        if (hr_w.v.size() < kMinWindowSamples || rr_w.v.size() < kMinWindowSamples) continue;

        FeatureVector row;
        row.subject_id = session.subject_id;
        row.window_start_s = start;
        row.window_end_s = end;
        row.label = label == WindowLabel::Positive ? 1 : 0;
        row.values = hrv_features(hr_w.v, rr_w.v);

        if (with_eda) {
            const WindowSlice raw = slice(session.at(SignalKind::Eda), start, end);
            const WindowSlice tonic = slice(decomposition->tonic, start, end);
            const WindowSlice phasic = slice(decomposition->phasic, start, end);
            if (raw.v.size() < kMinWindowSamples || tonic.v.size() != raw.v.size() ||
                phasic.v.size() != raw.v.size())
                continue;
            const std::vector<double> eda_vals =
                eda_features(raw.t, raw.v, tonic.v, phasic.v);
            row.values.insert(row.values.end(), eda_vals.begin(), eda_vals.end());
        }
        out.rows.push_back(std::move(row));
    }
    if (out.rows.empty()) throw NoUsableWindows("feature matrix: no usable windows");
    return out;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& matrix) {
    std::string body = "subject_id,start_s,end_s,label";
    for (const std::string& n : matrix.schema.names) body += "," + n;
    body += '\n';
    for (const FeatureVector& r : matrix.rows) {
        body += r.subject_id;
        body += ',' + csv::format_double(r.window_start_s);
        body += ',' + csv::format_double(r.window_end_s);
        body += ',' + std::to_string(r.label);
        for (double v : r.values) body += ',' + csv::format_double(v);
        body += '\n';
    }
    csv::atomic_write(path, body);
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path, DeviceKind device,
                               Scenario scenario) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open feature file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error("empty feature file: " + path.string());

    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::size_t pos = 0;
        while (true) {
            const auto c = s.find(',', pos);
            std::string piece = s.substr(pos, c - pos);
            if (!piece.empty() && piece.back() == '\r') piece.pop_back();
            parts.push_back(std::move(piece));
            if (c == std::string::npos) break;
            pos = c + 1;
        }
        return parts;
    };

    const std::vector<std::string> header = split(line);
    if (header.size() < 5 || header[0] != "subject_id" || header[1] != "start_s" ||
        header[2] != "end_s" || header[3] != "label")
        throw Error("bad feature header in " + path.string());

    FeatureMatrix out;
    out.device = device;
    out.scenario = scenario;
    const FeatureSchema hrv = FeatureSchema::hrv_only();
    const FeatureSchema both = FeatureSchema::hrv_eda();
    std::vector<std::string> cols(header.begin() + 4, header.end());
    if (cols == hrv.names)
        out.schema = hrv;
    else if (cols == both.names)
        out.schema = both;
    else
        throw Error("unknown feature schema in " + path.string());

    auto to_d = [&](const std::string& s) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw Error("bad number '" + s + "' in " + path.string());
        return v;
    };

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> parts = split(line);
        if (parts.size() != header.size())
            throw Error("bad row width in " + path.string());
        FeatureVector r;
        r.subject_id = parts[0];
        r.window_start_s = to_d(parts[1]);
        r.window_end_s = to_d(parts[2]);
        r.label = static_cast<int>(to_d(parts[3]));
        r.values.reserve(cols.size());
        for (std::size_t i = 4; i < parts.size(); ++i) r.values.push_back(to_d(parts[i]));
        out.rows.push_back(std::move(r));
    }
    return out;
}

}  // namespace stresskit::feat
