#include "stresskit/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "stresskit/csvio.hpp"
#include "stresskit/ingest.hpp"
#include "stresskit/rng.hpp"

namespace stresskit::cli {

namespace {

using nlohmann::json;

const char* device_file_tag(DeviceKind d) {
    switch (d) {
        case DeviceKind::BiopacMP160: return "biopac";
        case DeviceKind::PolarH10: return "polar";
        case DeviceKind::EmpaticaE4: return "empatica";
        case DeviceKind::GarminForerunner55s: return "garmin";
    }
    return "device";
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void load_section(const json& j, feat::WindowSpec& w) {
    maybe(j, "width_s", w.width_s);
    maybe(j, "overlap_s", w.overlap_s);
}

void load_section(const json& j, eda::CvxEdaConfig& c) {
    maybe(j, "tau0_s", c.tau0_s);
    maybe(j, "tau1_s", c.tau1_s);
    maybe(j, "knot_spacing_s", c.knot_spacing_s);
    maybe(j, "alpha", c.alpha);
    maybe(j, "gamma_l", c.gamma_l);
    maybe(j, "irf_truncation_s", c.irf_truncation_s);
    maybe(j, "solver_tol", c.solver_tol);
    maybe(j, "max_iters", c.max_iters);
}

void load_section(const json& j, model::SvmConfig& c) {
    maybe(j, "c", c.c);
    maybe(j, "gamma", c.gamma);
    maybe(j, "platt_folds", c.platt_folds);
    maybe(j, "tol", c.tol);
    maybe(j, "max_iters", c.max_iters);
}

void load_section(const json& j, model::RfConfig& c) {
    maybe(j, "n_trees", c.n_trees);
    maybe(j, "max_depth", c.max_depth);
    maybe(j, "min_leaf", c.min_leaf);
    maybe(j, "features_per_split", c.features_per_split);
}

void load_section(const json& j, synth::CohortSpec& c) {
    maybe(j, "n_subjects", c.n_subjects);
    maybe(j, "hr_base_mean", c.hr_base_mean);
    maybe(j, "hr_base_sd", c.hr_base_sd);
    maybe(j, "hr_stress_delta", c.hr_stress_delta);
    maybe(j, "hr_wander_sd", c.hr_wander_sd);
    maybe(j, "hr_wander_tau_s", c.hr_wander_tau_s);
    maybe(j, "hrv_base_sdnn", c.hrv_base_sdnn);
    maybe(j, "hrv_stress_sdnn", c.hrv_stress_sdnn);
    maybe(j, "scr_rate_rest", c.scr_rate_rest);
    maybe(j, "scr_rate_stress", c.scr_rate_stress);
    maybe(j, "scr_amplitude_lo", c.scr_amplitude_lo);
    maybe(j, "scr_amplitude_hi", c.scr_amplitude_hi);
    maybe(j, "scr_refractory_s", c.scr_refractory_s);
    maybe(j, "scr_kernel_tau0_s", c.scr_kernel_tau0_s);
    maybe(j, "scr_kernel_tau1_s", c.scr_kernel_tau1_s);
    maybe(j, "tonic_base", c.tonic_base);
    maybe(j, "tonic_drift", c.tonic_drift);
    maybe(j, "eda_noise_sd", c.eda_noise_sd);
    maybe(j, "eda_rate_hz", c.eda_rate_hz);
    maybe(j, "response_jitter", c.response_jitter);
    maybe(j, "randomize_task_order", c.randomize_task_order);
}

void load_section(const json& j, synth::DeviceNoiseSpec& c) {
    maybe(j, "dropout_prob", c.dropout_prob);
    maybe(j, "spike_prob", c.spike_prob);
    maybe(j, "spike_magnitude", c.spike_magnitude);
    maybe(j, "eda_detach_prob", c.eda_detach_prob);
    maybe(j, "detach_duration_s", c.detach_duration_s);
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config parse error: " + std::string(e.what()));
    }

    RunConfig cfg;
    std::string s;
    if (j.contains("data_dir")) cfg.data_dir = j.at("data_dir").get<std::string>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("protocol_file"))
        cfg.protocol_file = j.at("protocol_file").get<std::string>();
    if (j.contains("model_file")) cfg.model_file = j.at("model_file").get<std::string>();
    if (j.contains("scenario")) {
        const int v = j.at("scenario").get<int>();
        if (v != 1 && v != 2) throw ValidationError("config: scenario must be 1 or 2");
        cfg.scenario = v == 1 ? feat::Scenario::AllStressors
                              : feat::Scenario::MentalArithmeticOnly;
    }
    if (j.contains("devices")) {
        cfg.devices.clear();
        for (const json& d : j.at("devices")) {
            const auto kind = device_kind_from_string(d.get<std::string>());
            if (!kind) throw ValidationError("config: unknown device " + d.get<std::string>());
            cfg.devices.push_back(*kind);
        }
    }
    maybe(j, "model", cfg.model_choice);
    maybe(j, "apply_noise", cfg.apply_noise);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("window")) load_section(j.at("window"), cfg.window);
    if (j.contains("cvxeda")) load_section(j.at("cvxeda"), cfg.cvxeda);
    if (j.contains("svm")) load_section(j.at("svm"), cfg.svm);
    if (j.contains("rf")) load_section(j.at("rf"), cfg.rf);
    if (j.contains("synth")) load_section(j.at("synth"), cfg.cohort);
    if (j.contains("noise")) load_section(j.at("noise"), cfg.noise);
    if (cfg.model_choice != "hrv" && cfg.model_choice != "hrv_eda")
        throw ValidationError("config: model must be 'hrv' or 'hrv_eda'");
    return cfg;
}

std::vector<std::string> list_subjects(const std::filesystem::path& data_dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(data_dir))
        throw ValidationError("cohort directory not found: " + data_dir.string());
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(data_dir))
        if (entry.is_directory() && entry.path().filename().string().front() == 'S')
            out.push_back(entry.path().filename().string());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw ValidationError("no subject directories under " + data_dir.string());
    return out;
}

feat::FeatureMatrix subject_features(const RunConfig& config, const std::string& subject,
                                     DeviceKind device, bool with_eda) {
    namespace fs = std::filesystem;
    if (with_eda && !device_supports_eda(device))
        throw ValidationError(std::string("device ") + to_string(device) +
                              " has no EDA channel");
    const fs::path dir = config.data_dir / subject;
    const fs::path protocol_path =
        config.protocol_file.empty() ? dir / "protocol.csv" : config.protocol_file;
    if (!fs::exists(protocol_path))
        throw ValidationError("protocol file not found: " + protocol_path.string());

    const ProtocolTimeline timeline = ingest::load_protocol(protocol_path);
    const std::string tag = device_file_tag(device);

    std::map<SignalKind, TimeSeries> signals;
    signals[SignalKind::RrInterval] = ingest::load_signal_csv(
        dir / (tag + "_rr.csv"), device, SignalKind::RrInterval, timeline.t0_hint);
    if (with_eda)
        signals[SignalKind::Eda] = ingest::load_signal_csv(
            dir / (tag + "_eda.csv"), device, SignalKind::Eda, timeline.t0_hint);

    const DeviceSession session =
        ingest::assemble_session(subject, device, std::move(signals), timeline);
    prep::PreprocessedSession pre = prep::preprocess_session(session);

    std::optional<eda::EdaDecomposition> decomposition;
    if (with_eda) {
        TimeSeries uniform = pre.session.at(SignalKind::Eda);
        if (!eda::is_uniform(uniform)) uniform = eda::resample_uniform(uniform, 4.0);
        decomposition = eda::solve_decomposition(uniform, config.cvxeda);
        pre.session.signals[SignalKind::Eda] = std::move(uniform);
    }
    return feat::build_feature_matrix(pre.session, decomposition, config.scenario,
                                      config.window);
}

int cmd_synth(const RunConfig& config) {
    namespace fs = std::filesystem;
    synth::CohortSpec spec = config.cohort;
    spec.seed = config.seed;
    synth::validate(spec);

    fs::create_directories(config.data_dir);
    json manifest;
    manifest["n_subjects"] = spec.n_subjects;
    manifest["seed"] = spec.seed;
    json subjects = json::array();

    for (int i = 0; i < spec.n_subjects; ++i) {
        synth::SubjectBundle bundle = synth::gen_subject(spec, i);
        if (config.apply_noise) {
            const std::uint64_t noise_seed =
                Rng(spec.seed).child(static_cast<std::uint64_t>(i), 0x4e4f4953).next_u64();
            for (auto& [device, session] : bundle.sessions)
                session = synth::apply_device_noise(session, config.noise,
                                                    noise_seed ^ static_cast<std::uint64_t>(device));
        }
        const fs::path dir = config.data_dir / bundle.truth.subject_id;
        fs::create_directories(dir);
        ingest::write_protocol(dir / "protocol.csv", bundle.truth.protocol);
        for (const auto& [device, session] : bundle.sessions) {
            const std::string tag = device_file_tag(device);
            ingest::write_signal_csv(dir / (tag + "_rr.csv"),
                                     session.at(SignalKind::RrInterval));
            if (session.has(SignalKind::Eda))
                ingest::write_signal_csv(dir / (tag + "_eda.csv"),
                                         session.at(SignalKind::Eda));
        }
        json subj;
        subj["id"] = bundle.truth.subject_id;
        subj["scr_event_times"] = bundle.truth.scr_event_times;
        subj["scr_event_amplitudes"] = bundle.truth.scr_event_amplitudes;
        subj["segment_mean_hr"] = bundle.truth.segment_mean_hr;
        subj["cardiac_response"] = bundle.truth.cardiac_response;
        subj["eda_response"] = bundle.truth.eda_response;
        json segments = json::array();
        for (const Segment& seg : bundle.truth.protocol.segments)
            segments.push_back(json::array(
                {to_string(seg.label), seg.start_s, seg.end_s}));
        subj["protocol"] = segments;
        subjects.push_back(std::move(subj));
    }
    manifest["subjects"] = std::move(subjects);
    csv::atomic_write(config.data_dir / "ground_truth.json", manifest.dump(2));
    std::cout << "wrote cohort of " << spec.n_subjects << " subjects to "
              << config.data_dir.string() << "\n";
    return 0;
}

namespace {

std::filesystem::path feature_dir(const RunConfig& config, DeviceKind device) {
    return config.out_dir / "features" / device_file_tag(device) /
           ("scenario" + std::to_string(static_cast<int>(config.scenario)));
}

bool wants_eda(const RunConfig& config) { return config.model_choice == "hrv_eda"; }

std::vector<feat::FeatureMatrix> load_subject_matrices(const RunConfig& config,
                                                       DeviceKind device) {
    namespace fs = std::filesystem;
    const fs::path dir = feature_dir(config, device);
    if (!fs::is_directory(dir))
        throw ValidationError("feature directory not found (run 'features' first): " +
                              dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ValidationError("no feature CSVs under " + dir.string());
    std::vector<feat::FeatureMatrix> out;
    for (const fs::path& f : files)
        out.push_back(feat::read_feature_csv(f, device, config.scenario));
    return out;
}

feat::FeatureMatrix pool_rows(const std::vector<feat::FeatureMatrix>& matrices) {
    feat::FeatureMatrix pooled = matrices.front();
    for (std::size_t i = 1; i < matrices.size(); ++i)
        for (const feat::FeatureVector& row : matrices[i].rows) pooled.rows.push_back(row);
    return pooled;
}

}  // namespace

int cmd_features(const RunConfig& config) {
    const std::vector<std::string> subjects = list_subjects(config.data_dir);
    const bool with_eda = wants_eda(config);
    for (DeviceKind device : config.devices) {
        if (with_eda && !device_supports_eda(device))
            throw ValidationError(std::string("model hrv_eda needs an EDA device; ") +
                                  to_string(device) + " has none");
        const std::filesystem::path dir = feature_dir(config, device);
        for (const std::string& subject : subjects) {
            try {
                const feat::FeatureMatrix m =
                    subject_features(config, subject, device, with_eda);
                feat::write_feature_csv(dir / (subject + ".csv"), m);
            } catch (const Error& e) {
                throw Error("subject " + subject + ", device " +
                            to_string(device) + ": " + e.what());
            }
        }
        std::cout << "features: " << subjects.size() << " subjects -> " << dir.string()
                  << "\n";
    }
    return 0;
}

int cmd_train(const RunConfig& config) {
    if (config.devices.size() != 1)
        throw ValidationError("train uses exactly one device (pass --device)");
    if (config.model_file.empty())
        throw ValidationError("train needs --model-file for the output");
    const DeviceKind device = config.devices.front();

    const std::vector<feat::FeatureMatrix> matrices = load_subject_matrices(config, device);
    const feat::FeatureMatrix pooled = pool_rows(matrices);
    const std::string meta = std::string(to_string(device)) + "/scenario" +
                             std::to_string(static_cast<int>(config.scenario)) + "/" +
                             config.model_choice;

    model::TrainedModel trained;
    try {
        if (wants_eda(config)) {
            model::RfConfig rf = config.rf;
            rf.seed = config.seed;
            trained = model::fit_rf(pooled, rf, meta);
        } else {
            trained = model::fit_svm(pooled, config.svm, meta);
        }
    } catch (const model::SingleClassTraining& e) {
        throw Error(std::string(e.what()) +
                    " (check the scenario: the cohort must contain baseline and counted "
                    "stressor windows)");
    }
    model::save_model(trained, config.model_file);
    std::cout << "trained " << meta << " on " << pooled.rows.size() << " rows -> "
              << config.model_file.string() << "\n";
    return 0;
}

int cmd_eval(const RunConfig& config, eval::EvalMode mode) {
    std::vector<eval::EvalReport> reports;
    for (DeviceKind device : config.devices) {
        if (wants_eda(config) && !device_supports_eda(device))
            throw ValidationError(std::string("model hrv_eda needs an EDA device; ") +
                                  to_string(device) + " has none");
        const std::vector<feat::FeatureMatrix> matrices =
            load_subject_matrices(config, device);
        if (mode == eval::EvalMode::Loso) {
            eval::LosoModelConfig lc;
            lc.kind = wants_eda(config) ? model::ModelKind::RandomForest
                                        : model::ModelKind::SvmRbf;
            lc.svm = config.svm;
            lc.rf = config.rf;
            lc.rf.seed = config.seed;
            reports.push_back(eval::loso(matrices, lc));
        } else {
            if (config.model_file.empty())
                throw ValidationError("eval --mode pretrained needs --model-file");
            const model::TrainedModel trained = model::load_model(config.model_file);
            reports.push_back(eval::pretrained_eval(trained, matrices));
        }
    }
    const std::string stem = std::string("report_") + to_string(mode) + "_scenario" +
                             std::to_string(static_cast<int>(config.scenario)) + "_" +
                             config.model_choice;
    const auto csv_path = config.out_dir / (stem + ".csv");
    const auto txt_path = config.out_dir / (stem + ".txt");
    eval::render_report(reports, csv_path, txt_path);
    std::cout << eval::report_table(reports);
    std::cout << "report -> " << csv_path.string() << "\n";
    return 0;
}

int cmd_report(const RunConfig& config,
               const std::vector<std::filesystem::path>& report_csvs) {
    if (report_csvs.empty()) throw ValidationError("report needs at least one input CSV");
    std::vector<eval::EvalReport> merged;
    for (const auto& path : report_csvs)
        for (eval::EvalReport& r : eval::read_report_csv(path)) merged.push_back(std::move(r));
    const auto csv_path = config.out_dir / "report_combined.csv";
    const auto txt_path = config.out_dir / "report_combined.txt";
    eval::render_report(merged, csv_path, txt_path);
    std::cout << eval::report_table(merged);
    return 0;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"wearable stress-detection pipeline: synthesize cohorts, extract "
                 "features, train SVM/RF classifiers, evaluate with LOSO or a frozen "
                 "pre-trained model"};
    app.require_subcommand(1);

    std::string config_path;
    std::string data_dir, out_dir, model_file, protocol_file, model_choice;
    std::vector<std::string> device_names;
    int scenario = 0;
    std::int64_t seed = -1;
    int n_subjects = 0;
    double svm_c = 0.0;
    bool apply_noise = false;

    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--data", data_dir, "cohort fixture directory");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--model-file", model_file, "trained model path");
    app.add_option("--protocol", protocol_file, "protocol file override");
    app.add_option("--device", device_names,
                   "devices: biopac, polar, empatica, garmin (repeatable)")
        ->delimiter(',');
    app.add_option("--scenario", scenario, "label scenario: 1 (all stressors) or 2 "
                                           "(mental arithmetic only)");
    app.add_option("--model", model_choice, "feature set: hrv (SVM) or hrv_eda (RF)");
    app.add_option("--seed", seed, "top-level RNG seed");
    app.add_option("--subjects", n_subjects, "cohort size for synth");
    app.add_option("--svm-c", svm_c, "SVM box constraint override");
    app.add_flag("--with-noise", apply_noise, "apply the configured device noise at synth");

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort");
    auto* features_cmd =
        app.add_subcommand("features", "ingest fixtures and write feature matrices");
    auto* train_cmd = app.add_subcommand("train", "train a model on pooled features");
    auto* eval_cmd = app.add_subcommand("eval", "evaluate (LOSO or frozen pre-trained)");
    auto* report_cmd = app.add_subcommand("report", "merge report CSVs into one table");

    std::string mode = "loso";
    eval_cmd->add_option("--mode", mode, "loso or pretrained")
        ->check(CLI::IsMember({"loso", "pretrained"}));
    std::vector<std::string> report_inputs;
    report_cmd->add_option("inputs", report_inputs, "report CSV files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        RunConfig config =
            config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!data_dir.empty()) config.data_dir = data_dir;
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (!model_file.empty()) config.model_file = model_file;
        if (!protocol_file.empty()) config.protocol_file = protocol_file;
        if (!model_choice.empty()) {
            if (model_choice != "hrv" && model_choice != "hrv_eda")
                throw ValidationError("--model must be hrv or hrv_eda");
            config.model_choice = model_choice;
        }
        if (scenario != 0) {
            if (scenario != 1 && scenario != 2)
                throw ValidationError("--scenario must be 1 or 2");
            config.scenario = scenario == 1 ? feat::Scenario::AllStressors
                                            : feat::Scenario::MentalArithmeticOnly;
        }
        if (!device_names.empty()) {
            config.devices.clear();
            for (const std::string& name : device_names) {
                const auto kind = device_kind_from_string(name);
                if (!kind) throw ValidationError("unknown device: " + name);
                config.devices.push_back(*kind);
            }
        }
        if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
        if (n_subjects > 0) config.cohort.n_subjects = n_subjects;
        if (svm_c > 0.0) config.svm.c = svm_c;
        if (apply_noise) config.apply_noise = true;

        if (synth_cmd->parsed()) return cmd_synth(config);
        if (features_cmd->parsed()) return cmd_features(config);
        if (train_cmd->parsed()) return cmd_train(config);
        if (eval_cmd->parsed())
            return cmd_eval(config, mode == "loso" ? eval::EvalMode::Loso
                                                   : eval::EvalMode::Pretrained);
        if (report_cmd->parsed()) {
            std::vector<std::filesystem::path> paths(report_inputs.begin(),
                                                     report_inputs.end());
            return cmd_report(config, paths);
        }
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace stresskit::cli
