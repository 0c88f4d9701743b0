#pragma once

#include <filesystem>
#include <optional>
#include <span>

#include "stresskit/core.hpp"
#include "stresskit/eda_decompose.hpp"
#include "stresskit/preprocess.hpp"

namespace stresskit::feat {

struct SessionTooShort : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };
struct NoUsableWindows : Error { using Error::Error; };

struct WindowSpec {
    double width_s = 60.0;
    double overlap_s = 45.0;
    double step_s() const { return width_s - overlap_s; }
};

enum class Scenario {
    AllStressors = 1,        // baseline vs every stressor task
    MentalArithmeticOnly = 2 // baseline vs mental arithmetic only
};

enum class WindowLabel { Negative = 0, Positive = 1, Excluded };

// Ordered feature columns; model files persist this so column order is part
// of the trained artifact.
struct FeatureSchema {
    std::vector<std::string> names;
    std::vector<std::string> sources;  // HR, RR, EDA-raw, EDA-tonic, EDA-phasic

    static FeatureSchema hrv_only();  // 16 columns
    static FeatureSchema hrv_eda();   // 32 columns
    std::size_t size() const { return names.size(); }
    bool operator==(const FeatureSchema& other) const { return names == other.names; }
};

struct FeatureVector {
    std::string subject_id;
    double window_start_s = 0.0;
    double window_end_s = 0.0;
    std::vector<double> values;  // aligned with the schema
    int label = 0;               // 0 or 1; excluded windows never become rows
};

struct FeatureMatrix {
    FeatureSchema schema;
    std::vector<FeatureVector> rows;
    Scenario scenario = Scenario::AllStressors;
    DeviceKind device = DeviceKind::BiopacMP160;

    bool has_both_classes() const;
};

// Window start/end pairs: starts at 0, step = width - overlap, last window
// ends at or before duration_s.
std::vector<std::pair<double, double>> windows(double duration_s, const WindowSpec& spec);

// Time-domain cardiac features for one window, 8 per signal in schema order:
// mean, population std, skewness, percentiles 5/25/50/75/95.
// Each input needs at least 4 samples.
std::vector<double> hrv_features(std::span<const double> hr_window,
                                 std::span<const double> rr_window);

// EDA features for one window: per component (raw, tonic, phasic) mean,
// population std, min, max, trapezoidal AUC; plus the phasic peak count.
// The three components share the window's timestamps.
std::vector<double> eda_features(std::span<const double> t, std::span<const double> raw,
                                 std::span<const double> tonic,
                                 std::span<const double> phasic);

// Local maxima above `threshold` with at least `min_separation_s` between
// kept peaks (higher peaks win ties). Returns indices in time order.
std::vector<std::size_t> detect_peaks(std::span<const double> t, std::span<const double> v,
                                      double threshold = 0.01,
                                      double min_separation_s = 1.0);

// Ground-truth labeling: a window is 0 when fully inside the first Baseline
// segment, 1 when fully inside a stressor that the scenario counts, and
// Excluded otherwise (rests, straddling windows, non-counted stressors).
WindowLabel label_window(double start_s, double end_s, const ProtocolTimeline& timeline,
                         Scenario scenario);

// One row per usable window. The session must be preprocessed; pass the
// decomposition (and the session with its EDA already on the decomposition's
// uniform grid) when EDA features are wanted.
FeatureMatrix build_feature_matrix(const DeviceSession& session,
                                   const std::optional<eda::EdaDecomposition>& decomposition,
                                   Scenario scenario, const WindowSpec& spec = {});

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& matrix);
FeatureMatrix read_feature_csv(const std::filesystem::path& path, DeviceKind device,
                               Scenario scenario);

}  // namespace stresskit::feat
