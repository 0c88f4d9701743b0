#include "stresskit/models/model.hpp"

#include <fstream>
#include <json.hpp>

#include "stresskit/csvio.hpp"
#include "stresskit/stats.hpp"

namespace stresskit::model {

namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kFormatTag = "stresskit-model";

Eigen::MatrixXd raw_rows(const feat::FeatureMatrix& matrix) {
    const auto n = static_cast<Eigen::Index>(matrix.rows.size());
    const auto d = static_cast<Eigen::Index>(matrix.schema.size());
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = matrix.rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.values.size()) != d)
            throw SchemaMismatch("row width does not match schema");
        for (Eigen::Index j = 0; j < d; ++j)
            x(i, j) = row.values[static_cast<std::size_t>(j)];
    }
    return x;
}

std::vector<ColumnStats> fit_column_stats(const Eigen::MatrixXd& x) {
    std::vector<ColumnStats> out(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        ColumnStats& c = out[static_cast<std::size_t>(j)];
        c.mean = x.col(j).mean();
        const double var = (x.col(j).array() - c.mean).square().mean();
        const double sd = std::sqrt(var);
        c.std = sd > 0.0 ? sd : 1.0;
    }
    return out;
}

Eigen::MatrixXd apply_column_stats(Eigen::MatrixXd x, const std::vector<ColumnStats>& norm) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const ColumnStats& c = norm[static_cast<std::size_t>(j)];
        x.col(j) = (x.col(j).array() - c.mean) / c.std;
    }
    return x;
}

Eigen::VectorXi labels_pm1(const feat::FeatureMatrix& matrix) {
    Eigen::VectorXi y(static_cast<Eigen::Index>(matrix.rows.size()));
    for (std::size_t i = 0; i < matrix.rows.size(); ++i)
        y[static_cast<Eigen::Index>(i)] = matrix.rows[i].label == 1 ? 1 : -1;
    return y;
}

Eigen::VectorXi labels_01(const feat::FeatureMatrix& matrix) {
    Eigen::VectorXi y(static_cast<Eigen::Index>(matrix.rows.size()));
    for (std::size_t i = 0; i < matrix.rows.size(); ++i)
        y[static_cast<Eigen::Index>(i)] = matrix.rows[i].label == 1 ? 1 : 0;
    return y;
}

void check_schema(const TrainedModel& model, const feat::FeatureMatrix& matrix) {
    if (!(model.schema == matrix.schema))
        throw SchemaMismatch("feature schema does not match the trained model");
}

}  // namespace

TrainedModel fit_svm(const feat::FeatureMatrix& matrix, const SvmConfig& config,
                     std::string training_meta) {
    if (!matrix.has_both_classes())
        throw SingleClassTraining("training matrix has a single class");
    TrainedModel m;
    m.kind = ModelKind::SvmRbf;
    m.schema = matrix.schema;
    m.training_meta = std::move(training_meta);
    const Eigen::MatrixXd raw = raw_rows(matrix);
    m.norm = fit_column_stats(raw);
    m.svm = svm_fit(apply_column_stats(raw, m.norm), labels_pm1(matrix), config);
    return m;
}

TrainedModel fit_rf(const feat::FeatureMatrix& matrix, const RfConfig& config,
                    std::string training_meta) {
    if (!matrix.has_both_classes())
        throw SingleClassTraining("training matrix has a single class");
    TrainedModel m;
    m.kind = ModelKind::RandomForest;
    m.schema = matrix.schema;
    m.training_meta = std::move(training_meta);
    const Eigen::MatrixXd raw = raw_rows(matrix);
    m.norm = fit_column_stats(raw);
    m.forest = rf_fit(apply_column_stats(raw, m.norm), labels_01(matrix), config);
    return m;
}

Eigen::MatrixXd standardized_rows(const TrainedModel& model,
                                  const feat::FeatureMatrix& matrix) {
    check_schema(model, matrix);
    return apply_column_stats(raw_rows(matrix), model.norm);
}

Eigen::VectorXd predict_proba(const TrainedModel& model, const feat::FeatureMatrix& matrix) {
    const Eigen::MatrixXd x = standardized_rows(model, matrix);
    if (model.kind == ModelKind::SvmRbf) {
        if (!model.svm) throw CorruptModelFile("svm parameters missing");
        return svm_predict_proba(*model.svm, x);
    }
    if (!model.forest) throw CorruptModelFile("forest parameters missing");
    return rf_predict_proba(*model.forest, x);
}

Eigen::VectorXd decision_values(const TrainedModel& model,
                                const feat::FeatureMatrix& matrix) {
    if (model.kind != ModelKind::SvmRbf || !model.svm)
        throw Error("decision_values: not an SVM model");
    return svm_decision(*model.svm, standardized_rows(model, matrix));
}

namespace {

using nlohmann::json;

json schema_to_json(const feat::FeatureSchema& s) {
    return json{{"names", s.names}, {"sources", s.sources}};
}

feat::FeatureSchema schema_from_json(const json& j) {
    feat::FeatureSchema s;
    s.names = j.at("names").get<std::vector<std::string>>();
    s.sources = j.at("sources").get<std::vector<std::string>>();
    if (s.names.size() != s.sources.size())
        throw CorruptModelFile("schema names/sources length mismatch");
    return s;
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    json j;
    j["format"] = kFormatTag;
    j["version"] = kFormatVersion;
    j["kind"] = model.kind == ModelKind::SvmRbf ? "svm_rbf" : "random_forest";
    j["schema"] = schema_to_json(model.schema);
    j["training_meta"] = model.training_meta;
    json norm = json::array();
    for (const ColumnStats& c : model.norm)
        norm.push_back(json{{"mean", c.mean}, {"std", c.std}});
    j["norm"] = norm;

    if (model.kind == ModelKind::SvmRbf) {
        const SvmModel& s = *model.svm;
        json sv = json::array();
        for (Eigen::Index i = 0; i < s.support_vectors.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index c = 0; c < s.support_vectors.cols(); ++c)
                row.push_back(s.support_vectors(i, c));
            sv.push_back(std::move(row));
        }
        json dual = json::array();
        for (Eigen::Index i = 0; i < s.dual_coef.size(); ++i) dual.push_back(s.dual_coef[i]);
        j["svm"] = json{{"gamma", s.gamma},       {"bias", s.bias},
                        {"platt_a", s.platt_a},   {"platt_b", s.platt_b},
                        {"support_vectors", sv},  {"dual_coef", dual}};
    } else {
        const RfModel& f = *model.forest;
        json trees = json::array();
        for (const Tree& t : f.trees) {
            json nodes = json::array();
            for (const TreeNode& nd : t.nodes)
                nodes.push_back(json::array(
                    {nd.feature, nd.threshold, nd.left, nd.right, nd.leaf_value}));
            trees.push_back(std::move(nodes));
        }
        j["forest"] = json{{"trees", std::move(trees)}};
    }
    csv::atomic_write(path, j.dump());
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorruptModelFile("cannot open model file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw CorruptModelFile("model file parse error: " + std::string(e.what()));
    }
    try {
        if (j.value("format", "") != kFormatTag)
            throw CorruptModelFile("not a model file: " + path.string());
        if (j.at("version").get<int>() != kFormatVersion)
            throw SchemaVersionMismatch("unsupported model version in " + path.string());

        TrainedModel m;
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "svm_rbf")
            m.kind = ModelKind::SvmRbf;
        else if (kind == "random_forest")
            m.kind = ModelKind::RandomForest;
        else
            throw CorruptModelFile("unknown model kind '" + kind + "'");
        m.schema = schema_from_json(j.at("schema"));
        m.training_meta = j.value("training_meta", "");
        for (const json& c : j.at("norm"))
            m.norm.push_back(ColumnStats{c.at("mean").get<double>(), c.at("std").get<double>()});
        if (m.norm.size() != m.schema.size())
            throw CorruptModelFile("normalization stats do not match schema width");

        if (m.kind == ModelKind::SvmRbf) {
            const json& s = j.at("svm");
            SvmModel svm;
            svm.gamma = s.at("gamma").get<double>();
            svm.bias = s.at("bias").get<double>();
            svm.platt_a = s.at("platt_a").get<double>();
            svm.platt_b = s.at("platt_b").get<double>();
            const json& sv = s.at("support_vectors");
            const json& dual = s.at("dual_coef");
            svm.support_vectors.resize(static_cast<Eigen::Index>(sv.size()),
                                       static_cast<Eigen::Index>(m.schema.size()));
            svm.dual_coef.resize(static_cast<Eigen::Index>(dual.size()));
            if (sv.size() != dual.size())
                throw CorruptModelFile("support vector / dual coefficient count mismatch");
            for (std::size_t i = 0; i < sv.size(); ++i) {
                if (sv[i].size() != m.schema.size())
                    throw CorruptModelFile("support vector width mismatch");
                for (std::size_t c = 0; c < sv[i].size(); ++c)
                    svm.support_vectors(static_cast<Eigen::Index>(i),
                                        static_cast<Eigen::Index>(c)) =
                        sv[i][c].get<double>();
                svm.dual_coef[static_cast<Eigen::Index>(i)] = dual[i].get<double>();
            }
            m.svm = std::move(svm);
        } else {
            RfModel forest;
            for (const json& tj : j.at("forest").at("trees")) {
                Tree t;
                for (const json& nj : tj) {
                    if (nj.size() != 5) throw CorruptModelFile("bad tree node");
                    TreeNode nd;
                    nd.feature = nj[0].get<int>();
                    nd.threshold = nj[1].get<double>();
                    nd.left = nj[2].get<int>();
                    nd.right = nj[3].get<int>();
                    nd.leaf_value = nj[4].get<double>();
                    t.nodes.push_back(nd);
                }
                if (t.nodes.empty()) throw CorruptModelFile("empty tree");
                forest.trees.push_back(std::move(t));
            }
            m.forest = std::move(forest);
        }
        return m;
    } catch (const json::exception& e) {
        throw CorruptModelFile("model file structure error: " + std::string(e.what()));
    }
}

}  // namespace stresskit::model
