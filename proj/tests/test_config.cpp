#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mff/config.hpp"

using namespace mff;
namespace fs = std::filesystem;

TEST_CASE("defaults") {
    RunConfig c;
    CHECK(c.d_m == 64);
    CHECK(c.heads == 4);
    CHECK(c.train.epochs == 100);
    CHECK(c.train.batch_size == 16);
    CHECK(c.train.learning_rate == doctest::Approx(1e-3));
    CHECK(c.dims.n == 16);
    CHECK(c.precision == "f64");
    CHECK(c.threshold == 0.5);
    CHECK(c.resolved_log_path() == "data/train_log.jsonl");
    CHECK(c.variant_name() == "MFF-Net");
}

TEST_CASE("overrides parse and apply") {
    RunConfig c;
    apply_override(c, "train.epochs=25");
    CHECK(c.train.epochs == 25);
    apply_override(c, "model.d_m=32");
    CHECK(c.d_m == 32);
    apply_override(c, "ablation.no_fusion=true");
    CHECK(c.ablation.no_fusion);
    apply_override(c, "paths.data_dir=out/run1");
    CHECK(c.data_dir == "out/run1");
    apply_override(c, "synth.gamma=0.5");
    CHECK(c.synth.gamma == doctest::Approx(0.5));

    CHECK_THROWS_AS(apply_override(c, "no_equals_sign"), UsageError);
    CHECK_THROWS_AS(apply_override(c, "made.up.key=1"), UsageError);
    CHECK_THROWS_AS(apply_override(c, "train.epochs=not_a_number"), UsageError);
}

TEST_CASE("config file loading") {
    const fs::path path = fs::temp_directory_path() / "mff_tests_config.json";
    {
        std::ofstream out(path);
        out << R"({"dims.n": 8, "train.seed": 123, "model.score_axis": "own",)"
            << R"( "precision": "f32", "eval.threshold": 0.4})";
    }
    RunConfig c = load_run_config(path.string());
    CHECK(c.dims.n == 8);
    CHECK(c.train.seed == 123);
    CHECK(c.score_axis == "own");
    CHECK(c.model_config().score_axis == ScoreAxis::own);
    CHECK(c.dtype() == MfftDtype::f32);
    CHECK(c.threshold == doctest::Approx(0.4));

    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), UsageError);
    {
        std::ofstream out(path);
        out << "{ this is not json";
    }
    CHECK_THROWS_AS(load_run_config(path.string()), UsageError);
    {
        std::ofstream out(path);
        out << R"({"bogus.key": 1})";
    }
    CHECK_THROWS_AS(load_run_config(path.string()), UsageError);
}

TEST_CASE("dump and reload round trip") {
    RunConfig c;
    apply_override(c, "train.epochs=9");
    apply_override(c, "model.heads=2");
    apply_override(c, "ablation.no_enhance=true");
    const fs::path path = fs::temp_directory_path() / "mff_tests_dump.json";
    {
        std::ofstream out(path);
        out << dump_run_config(c);
    }
    RunConfig back = load_run_config(path.string());
    CHECK(dump_run_config(back) == dump_run_config(c));
}

TEST_CASE("derived settings validate their inputs") {
    RunConfig c;
    c.score_axis = "sideways";
    CHECK_THROWS_AS(c.model_config(), UsageError);
    c = RunConfig{};
    c.precision = "f16";
    CHECK_THROWS_AS(c.dtype(), UsageError);
    c = RunConfig{};
    c.log_path = "elsewhere.jsonl";
    CHECK(c.resolved_log_path() == "elsewhere.jsonl");
}

TEST_CASE("variant names match the ablation flags") {
    RunConfig c;
    c.ablation.no_image_branch = true;
    CHECK(c.variant_name() == "w/o ImageBranch");
    c = RunConfig{};
    c.ablation.no_text_branch = true;
    CHECK(c.variant_name() == "w/o TextBranch");
    c = RunConfig{};
    c.ablation.no_fusion = true;
    CHECK(c.variant_name() == "w/o FeatureFusion");
    c = RunConfig{};
    c.ablation.no_enhance = true;
    CHECK(c.variant_name() == "w/o EnhanceFusion");
    c = RunConfig{};
    c.ablation.no_similarity = true;
    CHECK(c.variant_name() == "w/o Similarity");
}

TEST_CASE("model config carries the run settings") {
    RunConfig c;
    apply_override(c, "model.d_m=16");
    apply_override(c, "model.heads=2");
    apply_override(c, "dims.d_t=24");
    apply_override(c, "ablation.no_similarity=true");
    ModelConfig mc = c.model_config();
    CHECK(mc.d_m == 16);
    CHECK(mc.heads == 2);
    CHECK(mc.dims.d_t == 24);
    CHECK(mc.ablation.no_similarity);
    CHECK_FALSE(mc.force_sim.has_value());
}
