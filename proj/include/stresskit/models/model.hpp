#pragma once

#include <filesystem>
#include <optional>

#include "stresskit/features.hpp"
#include "stresskit/models/rf.hpp"
#include "stresskit/models/svm.hpp"

namespace stresskit::model {

struct SchemaMismatch : Error { using Error::Error; };
struct CorruptModelFile : Error { using Error::Error; };
struct SchemaVersionMismatch : Error { using Error::Error; };

enum class ModelKind { SvmRbf, RandomForest };

struct ColumnStats {
    double mean = 0.0;
    double std = 1.0;  // constant columns store 1 so they map to zero
};

// A frozen classifier: feature schema, per-column standardization fitted at
// training time, and the kind-specific parameters. Loading a saved model
// reproduces bit-identical predictions.
struct TrainedModel {
    ModelKind kind = ModelKind::SvmRbf;
    feat::FeatureSchema schema;
    std::vector<ColumnStats> norm;
    std::string training_meta;
    std::optional<SvmModel> svm;
    std::optional<RfModel> forest;
};

TrainedModel fit_svm(const feat::FeatureMatrix& matrix, const SvmConfig& config,
                     std::string training_meta = {});
TrainedModel fit_rf(const feat::FeatureMatrix& matrix, const RfConfig& config,
                    std::string training_meta = {});

// Class-1 probability per row; the matrix schema must equal the model schema.
Eigen::VectorXd predict_proba(const TrainedModel& model, const feat::FeatureMatrix& matrix);

// Decision values for SVM models (probability-monotone); throws for forests.
Eigen::VectorXd decision_values(const TrainedModel& model, const feat::FeatureMatrix& matrix);

// Rows standardized with the model's stored statistics.
Eigen::MatrixXd standardized_rows(const TrainedModel& model, const feat::FeatureMatrix& matrix);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace stresskit::model
