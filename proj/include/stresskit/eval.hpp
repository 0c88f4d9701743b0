#pragma once

#include <filesystem>
#include <map>
#include <span>

#include "stresskit/features.hpp"
#include "stresskit/models/model.hpp"
#include "stresskit/stats.hpp"

namespace stresskit::eval {

struct SingleClassLabels : Error { using Error::Error; };
struct TooFewSubjects : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// Mann-Whitney rank statistic: (wins + 0.5*ties) / (n1*n0) over all
// positive-negative score pairs.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Median and quartiles by linear interpolation between order statistics.
stats::Quartiles summarize(std::span<const double> values);

enum class EvalMode { Loso, Pretrained };
enum class ModelDesc { HrvOnly, HrvEda };

const char* to_string(EvalMode m);
const char* to_string(ModelDesc d);

struct EvalReport {
    DeviceKind device = DeviceKind::BiopacMP160;
    feat::Scenario scenario = feat::Scenario::AllStressors;
    ModelDesc model_desc = ModelDesc::HrvOnly;
    EvalMode mode = EvalMode::Loso;
    std::map<std::string, double> per_subject_auroc;  // ordered by subject id
    std::vector<std::pair<std::string, std::string>> skipped;  // subject, reason
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

struct LosoModelConfig {
    model::ModelKind kind = model::ModelKind::SvmRbf;
    model::SvmConfig svm;
    model::RfConfig rf;
};

// Leave-one-subject-out: per subject, train on everyone else and score the
// held-out rows. Subjects whose held-out rows carry a single class are
// skipped and listed. A hard in-fold check aborts if any held-out row leaks
// into the training split.
EvalReport loso(const std::vector<feat::FeatureMatrix>& per_subject,
                const LosoModelConfig& config);

// Frozen evaluation: per-subject AUROC of an already-trained model, no
// refitting of parameters or normalization statistics.
EvalReport pretrained_eval(const model::TrainedModel& model,
                           const std::vector<feat::FeatureMatrix>& per_subject);

// "median [q1-q3]" cell, three decimals, en dash separator.
std::string format_cell(double median, double q1, double q3);

// CSV rows: device,mode,scenario,model,median,q1,q3,n_subjects,n_skipped.
std::string report_csv(const std::vector<EvalReport>& reports);

// Plain-text grid, one row per device, columns mode x scenario, one line per
// model description inside each cell.
std::string report_table(const std::vector<EvalReport>& reports);

void render_report(const std::vector<EvalReport>& reports,
                   const std::filesystem::path& csv_path,
                   const std::filesystem::path& table_path);

std::vector<EvalReport> read_report_csv(const std::filesystem::path& path);

}  // namespace stresskit::eval
