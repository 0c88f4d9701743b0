#pragma once

#include <filesystem>

#include "stresskit/eval.hpp"
#include "stresskit/synth.hpp"

namespace stresskit::cli {

struct ValidationError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// Everything a run needs; loadable from a JSON config file, overridable by
// command-line flags, and reproducible from the single top-level seed.
struct RunConfig {
    std::filesystem::path data_dir = "cohort";
    std::filesystem::path out_dir = "out";
    std::filesystem::path protocol_file;  // optional override for ingestion
    std::filesystem::path model_file;

    feat::Scenario scenario = feat::Scenario::AllStressors;
    std::vector<DeviceKind> devices = all_devices();
    std::string model_choice = "hrv";  // hrv -> SVM, hrv_eda -> RF

    feat::WindowSpec window;
    eda::CvxEdaConfig cvxeda;
    model::SvmConfig svm;
    model::RfConfig rf;
    synth::CohortSpec cohort;
    synth::DeviceNoiseSpec noise;
    bool apply_noise = false;

    std::uint64_t seed = 1;
};

RunConfig load_config(const std::filesystem::path& path);

// Cohort fixture layout under data_dir:
//   S01/protocol.csv
//   S01/<device>_rr.csv           per-beat R-R intervals, all devices
//   S01/<device>_eda.csv          4 Hz EDA, Biopac and Empatica only
//   ground_truth.json             cohort manifest
std::vector<std::string> list_subjects(const std::filesystem::path& data_dir);

// Ingest -> preprocess -> (decompose) -> features for one subject/device.
// with_eda selects the 32-column schema and requires an EDA-capable device.
feat::FeatureMatrix subject_features(const RunConfig& config, const std::string& subject,
                                     DeviceKind device, bool with_eda);

int cmd_synth(const RunConfig& config);
int cmd_features(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_eval(const RunConfig& config, eval::EvalMode mode);
int cmd_report(const RunConfig& config,
               const std::vector<std::filesystem::path>& report_csvs);

// Full argument parsing and dispatch; returns the process exit code
// (0 success, 1 validation error, 2 pipeline error).
int run_cli(int argc, const char* const* argv);

}  // namespace stresskit::cli
