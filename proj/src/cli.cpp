#include "phdim/cli.hpp"

#include "phdim/detector.hpp"
#include "phdim/errors.hpp"
#include "phdim/estimators.hpp"
#include "phdim/io.hpp"
#include "phdim/synthetic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

namespace phdim {

namespace fs = std::filesystem;

namespace {

struct EstimatorOptions {
    std::string method = "phd";
    PhdParams phd;
    std::size_t k_neighbors = 20;
    std::size_t threads = 1;
};

void add_estimator_options(CLI::App& cmd, EstimatorOptions& o) {
    cmd.add_option("--method", o.method, "Estimator")->check(CLI::IsMember({"phd", "mle"}))->capture_default_str();
    cmd.add_option("--alpha", o.phd.alpha, "Exponent of MST edge lengths")->capture_default_str();
    cmd.add_option("--k-grid", o.phd.k_grid, "Number of subsample sizes")->capture_default_str();
    cmd.add_option("--j-samples", o.phd.j_samples, "Subsets per size")->capture_default_str();
    cmd.add_option("--rounds", o.phd.rounds, "Regression rounds averaged")->capture_default_str();
    cmd.add_option("--min-points", o.phd.min_subsample, "Smallest subsample size")->capture_default_str();
    cmd.add_option("--seed", o.phd.seed, "Base seed")->capture_default_str();
    cmd.add_flag("--canonical-order", o.phd.canonical_order, "Sample from lexicographically sorted points");
    cmd.add_option("--k-neighbors", o.k_neighbors, "Neighbours for the MLE estimator")->capture_default_str();
    cmd.add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

Json params_snapshot(const EstimatorOptions& o) {
    if (o.method == "phd")
        return to_json(o.phd);
    return Json{{"k_neighbors", o.k_neighbors}};
}

/// One estimation input: a record of a manifest, or a single EMB1 file.
struct Input {
    ManifestRecord record;
};

std::vector<Input> load_inputs(const fs::path& path) {
    std::vector<Input> inputs;
    if (is_embedding_file(path)) {
        Input in;
        in.record.id = path.string();
        in.record.path = path;
        inputs.push_back(std::move(in));
        return inputs;
    }
    for (auto& r : read_manifest(path))
        inputs.push_back(Input{std::move(r)});
    return inputs;
}

struct Outcome {
    std::optional<double> value;
    std::vector<double> slopes;
    std::size_t n_points = 0;
    std::size_t dim = 0;
    std::string error_kind;
    std::string error_message;
    bool io_failure = false;
};

Outcome estimate_one(const Input& in, const EstimatorOptions& o, bool allow_precomputed) {
    Outcome out;
    if (allow_precomputed && in.record.score) {
        out.value = *in.record.score;
        return out;
    }
    try {
        PointCloud cloud = read_embeddings(in.record.path);
        cloud.set_id(in.record.id);
        out.n_points = cloud.size();
        out.dim = cloud.dim();
        if (o.method == "phd") {
            auto est = phd_estimate(cloud, o.phd);
            out.value = est.value;
            out.slopes = std::move(est.slopes);
        } else {
            out.value = mle_estimate(cloud, o.k_neighbors);
        }
    } catch (const IoError& e) {
        out.error_kind = e.kind();
        out.error_message = e.what();
        out.io_failure = true;
    } catch (const Error& e) {
        out.error_kind = e.kind();
        out.error_message = e.what();
    }
    return out;
}

std::vector<Outcome> estimate_all(const std::vector<Input>& inputs, const EstimatorOptions& o,
                                  bool allow_precomputed) {
    std::vector<Outcome> outcomes(inputs.size());
    std::size_t threads = o.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : o.threads;
    threads = std::min(threads, std::max<std::size_t>(inputs.size(), 1));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < inputs.size(); i = next++)
            outcomes[i] = estimate_one(inputs[i], o, allow_precomputed);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }
    return outcomes;
}

Json base_record(const Input& in, const Outcome& out, const std::string& method) {
    Json r;
    r["id"] = in.record.id;
    r["method"] = method;
    r["value"] = out.value ? Json(*out.value) : Json(nullptr);
    if (method == "phd")
        r["slopes"] = out.slopes;
    r["n_points"] = out.n_points;
    r["dim"] = out.dim;
    r["error"] = out.error_kind.empty() ? Json(nullptr) : Json(out.error_kind);
    if (!out.error_message.empty())
        r["message"] = out.error_message;
    if (in.record.label)
        r["label"] = to_string(*in.record.label);
    for (const auto& [k, v] : in.record.meta)
        r[k] = v;
    return r;
}

void emit_lines(const std::string& out_path, const std::vector<Json>& records) {
    if (out_path == "-") {
        for (const auto& r : records)
            std::cout << r.dump() << '\n';
    } else {
        write_json_lines(out_path, records);
    }
}

void emit_document(const std::string& out_path, const Json& doc) {
    if (out_path == "-") {
        std::cout << doc.dump() << '\n';
    } else {
        write_json_lines(out_path, {doc});
    }
}

int cmd_estimate(const fs::path& input, const EstimatorOptions& o, const std::string& out_path) {
    const auto inputs = load_inputs(input);
    const auto outcomes = estimate_all(inputs, o, false);
    std::vector<Json> records;
    bool io_failure = false;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        Json r = base_record(inputs[i], outcomes[i], o.method);
        r["params"] = params_snapshot(o);
        records.push_back(std::move(r));
        io_failure = io_failure || outcomes[i].io_failure;
    }
    emit_lines(out_path, records);
    return io_failure ? 1 : 0;
}

int cmd_fit(const fs::path& human_path, const std::optional<fs::path>& generated_path, const std::string& mode,
            double target_fpr, const std::string& training_set, const std::string& out_path) {
    const auto human = read_scores(human_path);
    std::vector<double> generated;
    if (generated_path)
        generated = read_scores(*generated_path);

    DetectorModel model;
    if (mode == "fpr") {
        model = fit_threshold_at_fpr(human, target_fpr);
        model.calibration.n_generated = generated.size();
    } else if (mode == "eer") {
        if (!generated_path)
            throw DataError("--mode eer needs --generated");
        model = fit_threshold_eer(human, generated).model;
    } else {
        if (!generated_path)
            throw DataError("--mode logistic needs --generated");
        std::vector<ScoredSample> samples;
        for (std::size_t i = 0; i < human.size(); ++i)
            samples.push_back({"human-" + std::to_string(i), human[i], Label::human, {}});
        for (std::size_t i = 0; i < generated.size(); ++i)
            samples.push_back({"generated-" + std::to_string(i), generated[i], Label::generated, {}});
        model = fit_logistic_1d(samples);
    }
    model.calibration.training_set =
        training_set.empty()
            ? "human=" + human_path.string() + (generated_path ? ";generated=" + generated_path->string() : "")
            : training_set;

    if (out_path == "-")
        std::cout << to_json(model).dump(2) << '\n';
    else
        write_detector_model(out_path, model);
    return 0;
}

int cmd_detect(const fs::path& model_path, const fs::path& input, const EstimatorOptions& o,
               const std::string& out_path) {
    const auto model = read_detector_model(model_path);
    const auto inputs = load_inputs(input);
    const auto outcomes = estimate_all(inputs, o, true);
    std::vector<Json> records;
    bool io_failure = false;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        Json r = base_record(inputs[i], outcomes[i], o.method);
        r["verdict"] = outcomes[i].value ? Json(to_string(classify(model, *outcomes[i].value))) : Json(nullptr);
        records.push_back(std::move(r));
        io_failure = io_failure || outcomes[i].io_failure;
    }
    emit_lines(out_path, records);
    return io_failure ? 1 : 0;
}

int cmd_eval(const fs::path& model_path, const fs::path& manifest, const EstimatorOptions& o,
             std::vector<double> fprs, const std::string& out_path) {
    const auto model = read_detector_model(model_path);
    std::vector<Input> inputs;
    for (auto& r : read_manifest(manifest)) {
        if (!r.label)
            throw DataError("manifest record '" + r.id + "' has no label");
        inputs.push_back(Input{std::move(r)});
    }
    const auto outcomes = estimate_all(inputs, o, true);

    std::vector<ScoredSample> samples;
    std::size_t excluded = 0;
    bool io_failure = false;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        io_failure = io_failure || outcomes[i].io_failure;
        if (!outcomes[i].value) {
            ++excluded;
            continue;
        }
        samples.push_back({inputs[i].record.id, *outcomes[i].value, *inputs[i].record.label, inputs[i].record.meta});
    }
    std::sort(fprs.begin(), fprs.end());
    fprs.erase(std::unique(fprs.begin(), fprs.end()), fprs.end());

    Json doc = to_json(evaluate(model, samples, fprs, excluded));
    doc["model"] = to_json(model);
    doc["method"] = o.method;
    doc["params"] = params_snapshot(o);
    emit_document(out_path, doc);
    return io_failure ? 1 : 0;
}

int cmd_synth_bench(const fs::path& spec_path, std::size_t repeats, const std::vector<std::string>& estimator_names,
                    const EstimatorOptions& o, const std::string& out_path) {
    std::vector<ManifoldSpec> specs;
    for (const auto& j : read_json_lines(spec_path))
        specs.push_back(manifold_spec_from_json(j));
    std::vector<Estimator> estimators;
    for (const auto& name : estimator_names)
        estimators.push_back(estimator_from_string(name));

    BenchmarkParams params;
    params.phd = o.phd;
    params.mle_neighbors = o.k_neighbors;
    params.threads = o.threads;
    const auto report = run_benchmark(specs, estimators, repeats, params);

    std::vector<Json> records;
    for (const auto& cell : report.cells) {
        Json r = to_json(cell);
        r["repeats"] = repeats;
        r["params"] = cell.estimator == Estimator::phd ? to_json(o.phd) : Json{{"k_neighbors", o.k_neighbors}};
        records.push_back(std::move(r));
    }
    emit_lines(out_path, records);
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Intrinsic-dimension estimation and one-feature generated-text detection"};
    app.require_subcommand(1);

    // estimate
    auto* est = app.add_subcommand("estimate", "Estimate the intrinsic dimension of EMB1 clouds");
    std::string est_input, est_out;
    EstimatorOptions est_opts;
    est->add_option("--input", est_input, "EMB1 file or manifest")->required();
    est->add_option("--out", est_out, "Report path ('-' for stdout)")->required();
    add_estimator_options(*est, est_opts);

    // fit
    auto* fit = app.add_subcommand("fit", "Calibrate a detector from score lists");
    std::string fit_human, fit_generated, fit_mode = "fpr", fit_out, fit_training;
    double fit_target = 0.01;
    fit->add_option("--human", fit_human, "Human scores (numbers or estimate report)")->required();
    fit->add_option("--generated", fit_generated, "Generated scores");
    fit->add_option("--mode", fit_mode, "Calibration")->check(CLI::IsMember({"fpr", "eer", "logistic"}))->capture_default_str();
    fit->add_option("--target-fpr", fit_target, "Target false positive rate")->capture_default_str();
    fit->add_option("--training-set", fit_training, "Identifier stored in the model");
    fit->add_option("--out", fit_out, "Model path ('-' for stdout)")->required();

    // detect
    auto* det = app.add_subcommand("detect", "Classify inputs with a calibrated model");
    std::string det_model, det_input, det_out;
    EstimatorOptions det_opts;
    det->add_option("--model", det_model, "Detector model")->required();
    det->add_option("--input", det_input, "EMB1 file or manifest")->required();
    det->add_option("--out", det_out, "Report path ('-' for stdout)")->required();
    add_estimator_options(*det, det_opts);

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a model on a labelled manifest");
    std::string ev_model, ev_manifest, ev_out;
    std::vector<double> ev_fprs;
    EstimatorOptions ev_opts;
    ev->add_option("--model", ev_model, "Detector model")->required();
    ev->add_option("--manifest", ev_manifest, "Labelled manifest")->required();
    ev->add_option("--fpr", ev_fprs, "FPR levels for accuracy (repeatable)");
    ev->add_option("--out", ev_out, "Report path ('-' for stdout)")->required();
    add_estimator_options(*ev, ev_opts);

    // synth-bench
    auto* sb = app.add_subcommand("synth-bench", "Estimator accuracy on synthetic manifolds");
    std::string sb_spec, sb_out;
    std::size_t sb_repeats = 20;
    std::vector<std::string> sb_estimators{"phd", "mle"};
    EstimatorOptions sb_opts;
    sb->add_option("--spec", sb_spec, "Manifold specs, one JSON object per line")->required();
    sb->add_option("--repeats", sb_repeats, "Clouds per spec")->capture_default_str();
    sb->add_option("--estimators", sb_estimators, "Estimators to run")->delimiter(',')->capture_default_str();
    sb->add_option("--out", sb_out, "Report path ('-' for stdout)")->required();
    add_estimator_options(*sb, sb_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*est)
            return cmd_estimate(est_input, est_opts, est_out);
        if (*fit)
            return cmd_fit(fit_human, fit_generated.empty() ? std::nullopt : std::optional<fs::path>(fit_generated),
                           fit_mode, fit_target, fit_training, fit_out);
        if (*det)
            return cmd_detect(det_model, det_input, det_opts, det_out);
        if (*ev)
            return cmd_eval(ev_model, ev_manifest, ev_opts, ev_fprs.empty() ? std::vector<double>{0.01} : ev_fprs,
                            ev_out);
        if (*sb)
            return cmd_synth_bench(sb_spec, sb_repeats, sb_estimators, sb_opts, sb_out);
    } catch (const IoError& e) {
        std::cerr << "phdim: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "phdim: " << e.kind() << ": " << e.what() << '\n';
        return 2;
    }
    return 2;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"phdim"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace phdim
