#pragma once

#include <cstdint>
#include <map>

#include "stresskit/core.hpp"

namespace stresskit::synth {

struct InvalidSpec : Error { using Error::Error; };

// Cohort generation parameters. Effect sizes are per-subject jittered by
// response_jitter so LOSO distributions spread the way real cohorts do.
struct CohortSpec {
    int n_subjects = 20;
    std::uint64_t seed = 1;

    double hr_base_mean = 70.0;    // bpm
    double hr_base_sd = 8.0;       // between-subject spread
    double hr_stress_delta = 15.0; // added inside stressor segments
    double hr_wander_sd = 3.0;     // slow within-session wander (bpm)
    double hr_wander_tau_s = 120.0;

    double hrv_base_sdnn = 50.0;   // RR standard deviation, ms
    double hrv_stress_sdnn = 30.0;

    double scr_rate_rest = 2.0;    // sudomotor events per minute
    double scr_rate_stress = 8.0;
    double scr_amplitude_lo = 0.03;  // driver impulse amplitude range
    double scr_amplitude_hi = 0.10;
    double scr_refractory_s = 2.0;   // minimum event spacing
    double scr_kernel_tau0_s = 2.0;  // 3.0 exercises kernel mismatch
    double scr_kernel_tau1_s = 0.7;

    double tonic_base = 0.3;       // uS
    double tonic_drift = 0.01;     // uS per minute
    double eda_noise_sd = 0.005;
    double eda_rate_hz = 4.0;

    double response_jitter = 0.4;  // per-subject multiplier in [1-j, 1+j]
    bool randomize_task_order = true;
    ProtocolTimeline protocol;     // empty -> bundled default
};

struct DeviceNoiseSpec {
    double dropout_prob = 0.0;      // per-sample
    double spike_prob = 0.0;        // per-sample
    double spike_magnitude = 0.0;   // added to spiked samples
    double eda_detach_prob = 0.0;   // per-minute probability of an episode
    double detach_duration_s = 10.0;
};

struct GroundTruth {
    std::string subject_id;
    ProtocolTimeline protocol;                // task order as generated
    std::vector<double> scr_event_times;      // grid-aligned, one per impulse
    std::vector<double> scr_event_amplitudes;
    std::vector<double> segment_mean_hr;      // aligned with protocol.segments
    double cardiac_response = 1.0;            // per-subject effect multipliers
    double eda_response = 1.0;
};

struct SubjectBundle {
    std::map<DeviceKind, DeviceSession> sessions;
    GroundTruth truth;
};

// Stand-alone normalized EDA trace with known driver events, for
// decomposition tests.
struct EdaTrace {
    TimeSeries eda;
    std::vector<double> event_times;
    std::vector<double> amplitudes;
};

void validate(const CohortSpec& spec);

// One subject's sessions for all four devices, deterministic per
// (spec.seed, subject_index). Cardiac beats are shared across devices;
// Biopac and Empatica additionally carry the 4 Hz EDA trace.
SubjectBundle gen_subject(const CohortSpec& spec, int subject_index);

std::vector<SubjectBundle> gen_cohort(const CohortSpec& spec);

// Sample dropout, additive spikes, and EDA electrode-detachment episodes
// (runs of zeros later removed by the range filter). Deterministic per seed.
DeviceSession apply_device_noise(const DeviceSession& session, const DeviceNoiseSpec& noise,
                                 std::uint64_t seed);

EdaTrace gen_eda_trace(double duration_s, double rate_per_min, double amp_lo, double amp_hi,
                       double noise_sd, double kernel_tau0_s, double kernel_tau1_s,
                       double refractory_s, std::uint64_t seed, double hz = 4.0);

}  // namespace stresskit::synth
