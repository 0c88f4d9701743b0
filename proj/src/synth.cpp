#include "stresskit/synth.hpp"

#include <algorithm>
#include <cmath>

#include "stresskit/eda_decompose.hpp"
#include "stresskit/ingest.hpp"
#include "stresskit/rng.hpp"

namespace stresskit::synth {

namespace {

constexpr std::uint64_t kTagProtocol = 0x50524f54;
constexpr std::uint64_t kTagCardiac = 0x43415244;
constexpr std::uint64_t kTagEda = 0x45444121;
constexpr std::uint64_t kTagSubject = 0x53554247;

constexpr double kRrFloorMs = 60000.0 / 220.0 + 0.5;  // keep inside the HR band
constexpr double kRrCeilMs = 2000.0 - 0.5;

const Segment* segment_at(const ProtocolTimeline& timeline, double t) {
    for (const Segment& s : timeline.segments)
        if (t >= s.start_s && t < s.end_s) return &s;
    return nullptr;
}

std::string subject_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%02d", index + 1);
    return buf;
}

}  // namespace

void validate(const CohortSpec& spec) {
    if (spec.n_subjects < 2) throw InvalidSpec("cohort: need at least 2 subjects");
    if (spec.scr_rate_rest < 0.0 || spec.scr_rate_stress < 0.0)
        throw InvalidSpec("cohort: negative SCR rate");
    if (spec.hr_base_mean - 3.0 * spec.hr_base_sd < 30.0 ||
        spec.hr_base_mean + 3.0 * spec.hr_base_sd + spec.hr_stress_delta > 220.0)
        throw InvalidSpec("cohort: HR parameters escape the [30,220] band");
    if (spec.scr_amplitude_hi < spec.scr_amplitude_lo || spec.scr_amplitude_lo < 0.0)
        throw InvalidSpec("cohort: bad SCR amplitude range");
    if (spec.eda_rate_hz <= 0.0) throw InvalidSpec("cohort: bad EDA rate");
    if (!spec.protocol.segments.empty()) check_timeline(spec.protocol);
}

SubjectBundle gen_subject(const CohortSpec& spec, int subject_index) {
    validate(spec);
    const Rng root(spec.seed);
    const auto idx = static_cast<std::uint64_t>(subject_index);
    Rng proto_rng = root.child(idx, kTagProtocol);
    Rng cardiac_rng = root.child(idx, kTagCardiac);
    Rng eda_rng = root.child(idx, kTagEda);
    Rng subject_rng = root.child(idx, kTagSubject);

    SubjectBundle bundle;
    GroundTruth& truth = bundle.truth;
    truth.subject_id = subject_name(subject_index);

    // Protocol: first two tasks shuffled, cold pressor stays last.
    ProtocolTimeline timeline =
        spec.protocol.segments.empty() ? ingest::default_protocol() : spec.protocol;
    if (spec.randomize_task_order && proto_rng.bernoulli(0.5)) {
        std::vector<std::size_t> task_slots;
        for (std::size_t i = 0; i < timeline.segments.size(); ++i) {
            const SegmentLabel l = timeline.segments[i].label;
            if (l == SegmentLabel::MentalArithmetic || l == SegmentLabel::Startle)
                task_slots.push_back(i);
        }
        if (task_slots.size() == 2)
            std::swap(timeline.segments[task_slots[0]].label,
                      timeline.segments[task_slots[1]].label);
    }
    truth.protocol = timeline;
    const double session_end = timeline.end_s();

    // Subject-level physiology.
    const double base_hr =
        std::clamp(subject_rng.normal(spec.hr_base_mean, spec.hr_base_sd), 40.0, 140.0);
    truth.cardiac_response =
        subject_rng.uniform(1.0 - spec.response_jitter, 1.0 + spec.response_jitter);
    truth.eda_response =
        subject_rng.uniform(1.0 - spec.response_jitter, 1.0 + spec.response_jitter);
    const double subject_tonic =
        spec.tonic_base + subject_rng.uniform(-0.05, 0.05) * spec.tonic_base;

    for (const Segment& seg : timeline.segments) {
        const double target = is_stressor(seg.label)
                                  ? base_hr + truth.cardiac_response * spec.hr_stress_delta
                                  : base_hr;
        truth.segment_mean_hr.push_back(target);
    }

    // Cardiac point process: per-beat RR around the segment target with slow
    // wander, clamped inside the physiological band.
    TimeSeries rr;
    rr.kind = SignalKind::RrInterval;
    double t = 0.0;
    double wander = 0.0;
    double prev_t = 0.0;
    while (t < session_end) {
        const Segment* seg = segment_at(timeline, t);
        const bool stress = seg && is_stressor(seg->label);
        const double dt = t - prev_t;
        if (dt > 0.0 && spec.hr_wander_sd > 0.0) {
            const double decay = std::exp(-dt / spec.hr_wander_tau_s);
            wander = wander * decay +
                     cardiac_rng.normal(0.0, spec.hr_wander_sd * std::sqrt(1.0 - decay * decay));
        } else if (dt > 0.0) {
            wander = 0.0;
        }
        const double target_hr =
            std::clamp(base_hr + (stress ? truth.cardiac_response * spec.hr_stress_delta : 0.0) +
                           wander,
                       35.0, 210.0);
        const double sdnn = stress ? spec.hrv_stress_sdnn : spec.hrv_base_sdnn;
        const double rr_ms =
            std::clamp(cardiac_rng.normal(60000.0 / target_hr, sdnn), kRrFloorMs, kRrCeilMs);
        rr.timestamps.push_back(t);
        rr.values.push_back(rr_ms);
        prev_t = t;
        t += rr_ms / 1000.0;
    }
    if (rr.size() < 2) throw InvalidSpec("cohort: session too short for cardiac data");

    // EDA on a uniform grid: drifting tonic level plus kernel-convolved
    // sudomotor impulses plus measurement noise.
    const double dt = 1.0 / spec.eda_rate_hz;
    const auto n = static_cast<std::size_t>(std::floor(session_end * spec.eda_rate_hz));
    TimeSeries eda;
    eda.kind = SignalKind::Eda;
    eda.timestamps.resize(n);
    eda.values.resize(n);

    std::vector<double> driver(n, 0.0);
    double event_t = 0.0;
    while (event_t < session_end) {
        const Segment* seg = segment_at(timeline, event_t);
        const bool stress = seg && is_stressor(seg->label);
        const double per_min =
            stress ? spec.scr_rate_stress * truth.eda_response : spec.scr_rate_rest;
        const double rate_s = per_min / 60.0;
        if (rate_s <= 0.0) {
            event_t += 30.0;  // probe forward for the next active segment
            continue;
        }
        const double gap = std::max(eda_rng.exponential(rate_s), spec.scr_refractory_s);
        event_t += gap;
        if (event_t >= session_end - 1.0) break;
        const auto grid = static_cast<std::size_t>(std::llround(event_t / dt));
        if (grid >= n) break;
        const double amp = eda_rng.uniform(spec.scr_amplitude_lo, spec.scr_amplitude_hi);
        driver[grid] += amp;
        truth.scr_event_times.push_back(static_cast<double>(grid) * dt);
        truth.scr_event_amplitudes.push_back(amp);
    }

    eda::CvxEdaConfig kernel_cfg;
    kernel_cfg.tau0_s = spec.scr_kernel_tau0_s;
    kernel_cfg.tau1_s = spec.scr_kernel_tau1_s;
    kernel_cfg.irf_truncation_s = std::max(10.0, 5.0 * spec.scr_kernel_tau0_s);
    const std::vector<double> kernel = eda::build_irf_kernel(dt, kernel_cfg);

    for (std::size_t i = 0; i < n; ++i) {
        const double ts = static_cast<double>(i) * dt;
        double v = subject_tonic + spec.tonic_drift * ts / 60.0;
        const std::size_t k_lo = i >= kernel.size() - 1 ? i - kernel.size() + 1 : 0;
        for (std::size_t j = k_lo; j <= i; ++j)
            if (driver[j] != 0.0) v += driver[j] * kernel[i - j];
        v += eda_rng.normal(0.0, spec.eda_noise_sd);
        eda.timestamps[i] = ts;
        eda.values[i] = std::max(v, 0.011);  // stay above the validity floor
    }

    for (DeviceKind device : all_devices()) {
        std::map<SignalKind, TimeSeries> signals;
        signals[SignalKind::RrInterval] = rr;
        if (device_supports_eda(device)) signals[SignalKind::Eda] = eda;
        bundle.sessions.emplace(
            device, ingest::assemble_session(truth.subject_id, device, std::move(signals),
                                             timeline));
    }
    return bundle;
}

std::vector<SubjectBundle> gen_cohort(const CohortSpec& spec) {
    validate(spec);
    std::vector<SubjectBundle> cohort;
    cohort.reserve(static_cast<std::size_t>(spec.n_subjects));
    for (int i = 0; i < spec.n_subjects; ++i) cohort.push_back(gen_subject(spec, i));
    return cohort;
}

DeviceSession apply_device_noise(const DeviceSession& session, const DeviceNoiseSpec& noise,
                                 std::uint64_t seed) {
    const Rng root(seed);
    DeviceSession out;
    out.subject_id = session.subject_id;
    out.device = session.device;
    out.timeline = session.timeline;

    std::uint64_t signal_index = 0;
    for (const auto& [kind, series] : session.signals) {
        Rng rng = root.child(signal_index++, static_cast<std::uint64_t>(kind));
        TimeSeries s;
        s.kind = series.kind;

        // Detachment episodes cover time ranges where EDA reads zero.
        std::vector<std::pair<double, double>> detach;
        if (kind == SignalKind::Eda && noise.eda_detach_prob > 0.0) {
            const double duration = series.duration();
            for (double m = 0.0; m < duration; m += 60.0) {
                if (rng.bernoulli(noise.eda_detach_prob)) {
                    const double start = m + rng.uniform(0.0, 60.0);
                    detach.emplace_back(start, start + noise.detach_duration_s);
                }
            }
        }

        for (std::size_t i = 0; i < series.size(); ++i) {
            if (noise.dropout_prob > 0.0 && rng.bernoulli(noise.dropout_prob)) continue;
            double v = series.values[i];
            if (noise.spike_prob > 0.0 && rng.bernoulli(noise.spike_prob))
                v += noise.spike_magnitude;
            const double t = series.timestamps[i];
            for (const auto& [d0, d1] : detach)
                if (t >= d0 && t < d1) { v = 0.0; break; }
            s.timestamps.push_back(t);
            s.values.push_back(v);
        }
        out.signals[kind] = std::move(s);
    }
    return out;
}

EdaTrace gen_eda_trace(double duration_s, double rate_per_min, double amp_lo, double amp_hi,
                       double noise_sd, double kernel_tau0_s, double kernel_tau1_s,
                       double refractory_s, std::uint64_t seed, double hz) {
    Rng rng(seed);
    const double dt = 1.0 / hz;
    const auto n = static_cast<std::size_t>(std::floor(duration_s * hz));

    EdaTrace trace;
    trace.eda.kind = SignalKind::Eda;
    trace.eda.timestamps.resize(n);
    trace.eda.values.resize(n);

    std::vector<double> driver(n, 0.0);
    double t = rng.exponential(rate_per_min / 60.0);
    while (t < duration_s - 2.0) {
        const auto grid = static_cast<std::size_t>(std::llround(t / dt));
        if (grid >= n) break;
        const double amp = rng.uniform(amp_lo, amp_hi);
        driver[grid] += amp;
        trace.event_times.push_back(static_cast<double>(grid) * dt);
        trace.amplitudes.push_back(amp);
        t += std::max(rng.exponential(rate_per_min / 60.0), refractory_s);
    }

    eda::CvxEdaConfig kernel_cfg;
    kernel_cfg.tau0_s = kernel_tau0_s;
    kernel_cfg.tau1_s = kernel_tau1_s;
    kernel_cfg.irf_truncation_s = std::max(10.0, 5.0 * kernel_tau0_s);
    const std::vector<double> kernel = eda::build_irf_kernel(dt, kernel_cfg);

    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.3 + 0.02 * static_cast<double>(i) * dt / 60.0;
        const std::size_t k_lo = i >= kernel.size() - 1 ? i - kernel.size() + 1 : 0;
        for (std::size_t j = k_lo; j <= i; ++j)
            if (driver[j] != 0.0) v += driver[j] * kernel[i - j];
        if (noise_sd > 0.0) v += rng.normal(0.0, noise_sd);
        trace.eda.timestamps[i] = static_cast<double>(i) * dt;
        trace.eda.values[i] = v;
    }
    return trace;
}

}  // namespace stresskit::synth
