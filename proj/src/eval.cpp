#include "stresskit/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "stresskit/csvio.hpp"
#include "stresskit/rng.hpp"

namespace stresskit::eval {

double auroc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("auroc: score/label length mismatch");
    const std::size_t n = scores.size();
    std::size_t n1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(scores[i])) throw std::invalid_argument("auroc: non-finite score");
        if (labels[i] == 1) ++n1;
    }
    const std::size_t n0 = n - n1;
    if (n1 == 0 || n0 == 0) throw SingleClassLabels("auroc: both classes required");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks over tie groups; rank sum of positives gives the
    // Mann-Whitney U statistic.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
        i = j;
    }
    const double u = rank_sum_pos - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
    return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

stats::Quartiles summarize(std::span<const double> values) {
    if (values.empty()) throw EmptyInput("summarize: empty input");
    return stats::quartiles(values);
}

const char* to_string(EvalMode m) { return m == EvalMode::Loso ? "loso" : "pretrained"; }
const char* to_string(ModelDesc d) { return d == ModelDesc::HrvOnly ? "HRV" : "HRV+EDA"; }

namespace {

ModelDesc desc_from_schema(const feat::FeatureSchema& s) {
    return s.size() == feat::FeatureSchema::hrv_only().size() ? ModelDesc::HrvOnly
                                                              : ModelDesc::HrvEda;
}

void finalize(EvalReport& report) {
    std::vector<double> values;
    values.reserve(report.per_subject_auroc.size());
    for (const auto& [id, v] : report.per_subject_auroc) values.push_back(v);
    const stats::Quartiles q = summarize(values);
    report.median = q.median;
    report.q1 = q.q1;
    report.q3 = q.q3;
}

struct SubjectRows {
    std::vector<double> scores;
    std::vector<int> labels;
};

}  // namespace

EvalReport loso(const std::vector<feat::FeatureMatrix>& per_subject,
                const LosoModelConfig& config) {
    if (per_subject.size() < 2) throw TooFewSubjects("loso: need at least 2 subjects");

    EvalReport report;
    report.mode = EvalMode::Loso;
    report.device = per_subject.front().device;
    report.scenario = per_subject.front().scenario;
    report.model_desc = desc_from_schema(per_subject.front().schema);

    auto subject_of = [](const feat::FeatureMatrix& m) {
        if (m.rows.empty()) throw EmptyInput("loso: subject matrix with no rows");
        return m.rows.front().subject_id;
    };

    for (std::size_t hold = 0; hold < per_subject.size(); ++hold) {
        const feat::FeatureMatrix& test = per_subject[hold];
        const std::string held_id = subject_of(test);

        if (!test.has_both_classes()) {
            report.skipped.emplace_back(held_id, "held-out subject has a single class");
            continue;
        }

        feat::FeatureMatrix train;
        train.schema = test.schema;
        train.scenario = test.scenario;
        train.device = test.device;
        for (std::size_t s = 0; s < per_subject.size(); ++s) {
            if (s == hold) continue;
            for (const feat::FeatureVector& row : per_subject[s].rows)
                train.rows.push_back(row);
        }
        // Leakage check: the held-out subject must not appear in training.
        for (const feat::FeatureVector& row : train.rows)
            if (row.subject_id == held_id)
                throw std::logic_error("loso: held-out subject '" + held_id +
                                       "' leaked into the training split");
        if (!train.has_both_classes()) {
            report.skipped.emplace_back(held_id, "training split has a single class");
            continue;
        }

        model::TrainedModel m;
        if (config.kind == model::ModelKind::SvmRbf) {
            m = model::fit_svm(train, config.svm);
        } else {
            model::RfConfig rf = config.rf;
            // Stable per-fold stream regardless of evaluation order.
            rf.seed = Rng(config.rf.seed).child(hold, 0x4c4f534f).next_u64();
            m = model::fit_rf(train, rf);
        }

        const Eigen::VectorXd proba = model::predict_proba(m, test);
        std::vector<double> scores(proba.data(), proba.data() + proba.size());
        std::vector<int> labels;
        labels.reserve(test.rows.size());
        for (const feat::FeatureVector& row : test.rows) labels.push_back(row.label);
        report.per_subject_auroc[held_id] = auroc(scores, labels);
    }

    if (report.per_subject_auroc.empty())
        throw TooFewSubjects("loso: every subject was skipped");
    finalize(report);
    return report;
}

EvalReport pretrained_eval(const model::TrainedModel& model,
                           const std::vector<feat::FeatureMatrix>& per_subject) {
    if (per_subject.empty()) throw EmptyInput("pretrained_eval: no subjects");

    EvalReport report;
    report.mode = EvalMode::Pretrained;
    report.device = per_subject.front().device;
    report.scenario = per_subject.front().scenario;
    report.model_desc = desc_from_schema(model.schema);

    for (const feat::FeatureMatrix& subject : per_subject) {
        if (subject.rows.empty()) continue;
        const std::string id = subject.rows.front().subject_id;
        if (!subject.has_both_classes()) {
            report.skipped.emplace_back(id, "held-out subject has a single class");
            continue;
        }
        const Eigen::VectorXd proba = model::predict_proba(model, subject);
        std::vector<double> scores(proba.data(), proba.data() + proba.size());
        std::vector<int> labels;
        labels.reserve(subject.rows.size());
        for (const feat::FeatureVector& row : subject.rows) labels.push_back(row.label);
        report.per_subject_auroc[id] = auroc(scores, labels);
    }
    if (report.per_subject_auroc.empty())
        throw EmptyInput("pretrained_eval: every subject was skipped");
    finalize(report);
    return report;
}

std::string format_cell(double median, double q1, double q3) {
    return csv::format_fixed(median, 3) + " [" + csv::format_fixed(q1, 3) + "–" +
           csv::format_fixed(q3, 3) + "]";
}

std::string report_csv(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw EmptyInput("report_csv: no reports");
    std::string out = "device,mode,scenario,model,median,q1,q3,n_subjects,n_skipped\n";
    for (const EvalReport& r : reports) {
        out += to_string(r.device);
        out += ',';
        out += to_string(r.mode);
        out += ',';
        out += std::to_string(static_cast<int>(r.scenario));
        out += ',';
        out += to_string(r.model_desc);
        out += ',' + csv::format_double(r.median);
        out += ',' + csv::format_double(r.q1);
        out += ',' + csv::format_double(r.q3);
        out += ',' + std::to_string(r.per_subject_auroc.size());
        out += ',' + std::to_string(r.skipped.size());
        out += '\n';
    }
    return out;
}

std::string report_table(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw EmptyInput("report_table: no reports");

    struct ColKey {
        EvalMode mode;
        feat::Scenario scenario;
    };
    const std::vector<ColKey> columns = {
        {EvalMode::Loso, feat::Scenario::AllStressors},
        {EvalMode::Loso, feat::Scenario::MentalArithmeticOnly},
        {EvalMode::Pretrained, feat::Scenario::AllStressors},
        {EvalMode::Pretrained, feat::Scenario::MentalArithmeticOnly},
    };
    const std::vector<std::string> headers = {
        "LOSO / rest vs all", "LOSO / rest vs arithmetic",
        "Pretrained / rest vs all", "Pretrained / rest vs arithmetic"};

    constexpr std::size_t kDeviceW = 28;
    constexpr std::size_t kCellW = 34;
    auto pad = [](std::size_t width, std::size_t used) {
        return std::string(width > used ? width - used : 1, ' ');
    };
    std::ostringstream os;
    os << std::string(kDeviceW, ' ');
    for (const std::string& h : headers) os << "| " << h << pad(kCellW, h.size() + 2);
    os << '\n';
    os << std::string(kDeviceW + 4 * kCellW, '-') << '\n';

    for (DeviceKind device : all_devices()) {
        bool any = false;
        for (const EvalReport& r : reports) any = any || r.device == device;
        if (!any) continue;
        for (ModelDesc desc : {ModelDesc::HrvOnly, ModelDesc::HrvEda}) {
            std::vector<std::string> cells;
            bool row_used = false;
            for (const ColKey& col : columns) {
                std::string cell = "-";
                for (const EvalReport& r : reports) {
                    if (r.device == device && r.mode == col.mode &&
                        r.scenario == col.scenario && r.model_desc == desc) {
                        cell = format_cell(r.median, r.q1, r.q3);
                        row_used = true;
                    }
                }
                cells.push_back(cell);
            }
            if (!row_used) continue;
            std::string label = std::string(to_string(device)) + " " + to_string(desc);
            if (label.size() > kDeviceW - 1) label.resize(kDeviceW - 1);
            os << label << pad(kDeviceW, label.size());
            for (const std::string& cell : cells) {
                // En dash is 3 bytes but one display column.
                const std::size_t display =
                    cell.size() - (cell.find("–") != std::string::npos ? 2 : 0);
                os << "| " << cell << pad(kCellW, display + 2);
            }
            os << '\n';
        }
    }
    os << "cells: median AUROC [q1" << "–" << "q3] across subjects\n";
    return os.str();
}

void render_report(const std::vector<EvalReport>& reports,
                   const std::filesystem::path& csv_path,
                   const std::filesystem::path& table_path) {
    if (reports.empty()) throw EmptyInput("render_report: no reports");
    try {
        csv::atomic_write(csv_path, report_csv(reports));
        csv::atomic_write(table_path, report_table(reports));
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
}

std::vector<EvalReport> read_report_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report: " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("device,mode,scenario,model,median", 0) != 0)
        throw IoError("bad report header in " + path.string());

    std::vector<EvalReport> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string device, mode, scenario, model, median, q1, q3, nsub, nskip;
        std::getline(ls, device, ',');
        std::getline(ls, mode, ',');
        std::getline(ls, scenario, ',');
        std::getline(ls, model, ',');
        std::getline(ls, median, ',');
        std::getline(ls, q1, ',');
        std::getline(ls, q3, ',');
        std::getline(ls, nsub, ',');
        std::getline(ls, nskip, ',');
        EvalReport r;
        const auto dev = device_kind_from_string(device);
        if (!dev) throw IoError("bad device '" + device + "' in " + path.string());
        r.device = *dev;
        r.mode = mode == "loso" ? EvalMode::Loso : EvalMode::Pretrained;
        r.scenario = scenario == "2" ? feat::Scenario::MentalArithmeticOnly
                                     : feat::Scenario::AllStressors;
        r.model_desc = model == "HRV" ? ModelDesc::HrvOnly : ModelDesc::HrvEda;
        r.median = std::stod(median);
        r.q1 = std::stod(q1);
        r.q3 = std::stod(q3);
        // Subject-level values are not stored in the CSV; keep the count so
        // re-rendered tables stay informative.
        const int n = std::stoi(nsub);
        for (int i = 0; i < n; ++i)
            r.per_subject_auroc["subject_" + std::to_string(i)] = r.median;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace stresskit::eval
