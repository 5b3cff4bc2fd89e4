#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "mff/checks.hpp"
#include "mff/config.hpp"
#include "mff/metrics.hpp"
#include "mff/providers.hpp"
#include "mff/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure
constexpr int kUsageError = 1;
constexpr int kDataError = 2;
constexpr int kNumericalError = 3;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
};

mff::RunConfig resolve_config(const CommonOpts& opts) {
    mff::RunConfig cfg;
    if (!opts.config_path.empty()) cfg = mff::load_run_config(opts.config_path);
    for (const auto& kv : opts.overrides) mff::apply_override(cfg, kv);
    std::cerr << "resolved config:\n" << mff::dump_run_config(cfg) << '\n';
    return cfg;
}

mff::SynthConfig synth_config(const mff::RunConfig& cfg) {
    mff::SynthConfig sc = cfg.synth;
    sc.dims = cfg.dims;
    return sc;
}

int cmd_synth(const mff::RunConfig& cfg) {
    mff::SynthResult result = mff::generate_synth(synth_config(cfg));
    fs::create_directories(cfg.data_dir);
    mff::write_dataset(cfg.data_dir, result.train, cfg.dtype());
    mff::write_dataset(cfg.data_dir, result.test, cfg.dtype());
    mff::write_sidecar(cfg.data_dir + "/sidecar.jsonl", result.sidecar);
    std::cout << json{{"train_samples", result.train.samples.size()},
                      {"test_samples", result.test.samples.size()},
                      {"localized_fakes", result.sidecar.size()},
                      {"data_dir", cfg.data_dir}}
                     .dump()
              << '\n';
    return 0;
}

int cmd_train(const mff::RunConfig& cfg, bool resume) {
    mff::Dataset trainset = mff::load_dataset(cfg.data_dir + "/train_manifest.jsonl");
    const mff::ModelConfig mc = [&] {
        mff::ModelConfig m = cfg.model_config();
        m.dims = trainset.dims;
        return m;
    }();
    mff::ModelParams model = mff::ModelParams::init(mc, cfg.train.seed);
    mff::AdamState state;
    std::size_t start_epoch = 0;
    const std::uint64_t hash = mff::run_hash(mc, cfg.train);
    if (resume) start_epoch = mff::checkpoint_load(cfg.checkpoint, model, state, hash);

    std::cerr << "variant: " << cfg.variant_name()
              << ", parameters: " << model.param_count() << '\n';
    std::ofstream log(cfg.resolved_log_path(),
                      resume ? std::ios::app : std::ios::trunc);
    if (!log) throw mff::DataError("cannot open log file: " + cfg.resolved_log_path());

    auto logs = mff::train(model, trainset, cfg.train, state, start_epoch, &log);
    mff::checkpoint_save(cfg.checkpoint, model, state, cfg.train.epochs, hash);
    const double final_acc = logs.empty() ? 0.0 : logs.back().train_acc;
    std::cout << json{{"epochs", cfg.train.epochs},
                      {"final_train_acc", final_acc},
                      {"parameters", model.param_count()},
                      {"checkpoint", cfg.checkpoint}}
                     .dump()
              << '\n';
    return 0;
}

int cmd_eval(const mff::RunConfig& cfg, const std::string& split,
             const std::string& json_out) {
    mff::Dataset ds = mff::load_dataset(cfg.data_dir + "/" + split + "_manifest.jsonl");
    mff::ModelConfig mc = cfg.model_config();
    mc.dims = ds.dims;
    mff::ModelParams model = mff::ModelParams::init(mc, cfg.train.seed);
    mff::AdamState state;
    mff::checkpoint_load(cfg.checkpoint, model, state, mff::run_hash(mc, cfg.train));

    mff::MetricsReport report = mff::evaluate(model, ds, cfg.threshold, cfg.variant_name());
    std::cout << mff::render_report({report});
    const std::string json_doc = mff::report_to_json(report);
    if (!json_out.empty()) {
        std::ofstream out(json_out);
        if (!out) throw mff::DataError("cannot write report: " + json_out);
        out << json_doc << '\n';
    } else {
        std::cout << json_doc << '\n';
    }
    return 0;
}

int cmd_gradcheck(const mff::RunConfig& cfg, std::size_t seeds) {
    double tolerance = 1e-4;
    if (cfg.precision == "f32") {
        std::cerr << "warning: f32 precision mode, relaxing gradcheck tolerance to 1e-2\n";
        tolerance = 1e-2;
    }
    bool ok = true;
    for (std::uint64_t s = 0; s < seeds; ++s) {
        const std::uint64_t seed = cfg.train.seed + s;
        for (const auto& r : mff::run_gradient_checks(seed)) {
            const bool pass = r.max_rel_error < tolerance;
            ok = ok && pass;
            std::cout << (pass ? "PASS" : "FAIL") << "  seed=" << seed << "  " << r.name
                      << "  max_rel_error=" << r.max_rel_error << '\n';
        }
    }
    if (!ok) {
        std::cerr << "gradient check failed\n";
        return kNumericalError;
    }
    return 0;
}

int cmd_inspect(const mff::RunConfig& cfg, const std::string& split,
                std::vector<std::string> ids, bool all) {
    mff::Dataset ds = mff::load_dataset(cfg.data_dir + "/" + split + "_manifest.jsonl");
    mff::ModelConfig mc = cfg.model_config();
    mc.dims = ds.dims;
    mff::ModelParams model = mff::ModelParams::init(mc, cfg.train.seed);
    mff::AdamState state;
    mff::checkpoint_load(cfg.checkpoint, model, state, mff::run_hash(mc, cfg.train));

    if (all) {
        ids.clear();
        for (const auto& s : ds.samples) ids.push_back(s.id);
    }
    if (ids.empty()) throw mff::UsageError("inspect: pass sample ids or --all");
    for (const auto& id : ids) {
        const auto it = std::find_if(ds.samples.begin(), ds.samples.end(),
                                     [&](const mff::NewsSample& s) { return s.id == id; });
        if (it == ds.samples.end())
            throw mff::DataError("inspect: no sample with id '" + id + "' in split '" +
                                 split + "'");
        mff::Diagnostics diag;
        mff::model_forward(*it, model, &diag);
        std::cout << json{{"id", it->id},
                          {"y_prime", diag.prediction},
                          {"sim", diag.sim},
                          {"label", it->label},
                          {"r_is_text", diag.r_is_text},
                          {"r_is_image", diag.r_is_image},
                          {"r_incon_text", diag.r_incon_text},
                          {"r_incon_image", diag.r_incon_image}}
                         .dump()
                  << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MFF-Net: adaptive multi-modal feature fusion for fake news detection"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("-c,--config", common.config_path,
                   "JSON config file with flat dotted keys");
    app.add_option("-s,--set", common.overrides,
                   "override a config key, e.g. --set train.epochs=5");

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset on disk");
    auto* train = app.add_subcommand("train", "train the model and write a checkpoint");
    bool resume = false;
    train->add_flag("--resume", resume, "continue from the existing checkpoint");
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint, print the metric table");
    std::string split = "test", json_out;
    eval->add_option("--split", split, "dataset split to evaluate (train|test)");
    eval->add_option("--json-out", json_out, "write the JSON report here instead of stdout");
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks");
    std::size_t seeds = 1;
    gradcheck->add_option("--seeds", seeds, "number of seeds to check");
    auto* inspect = app.add_subcommand("inspect",
                                       "emit per-sample JSON diagnostics (sim, scores)");
    std::vector<std::string> ids;
    bool inspect_all = false;
    std::string inspect_split = "test";
    inspect->add_option("ids", ids, "sample ids to inspect");
    inspect->add_flag("--all", inspect_all, "inspect every sample in the split");
    inspect->add_option("--split", inspect_split, "dataset split to inspect (train|test)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);  // prints help or the parse error
        return rc == 0 ? 0 : kUsageError;
    }

    try {
        const mff::RunConfig cfg = resolve_config(common);
        if (synth->parsed()) return cmd_synth(cfg);
        if (train->parsed()) return cmd_train(cfg, resume);
        if (eval->parsed()) return cmd_eval(cfg, split, json_out);
        if (gradcheck->parsed()) return cmd_gradcheck(cfg, seeds);
        if (inspect->parsed()) return cmd_inspect(cfg, inspect_split, ids, inspect_all);
    } catch (const mff::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const mff::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsageError;
}
