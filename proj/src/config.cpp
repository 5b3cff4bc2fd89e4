#include "mff/config.hpp"

#include <fstream>

#include <json.hpp>

namespace mff {

using nlohmann::json;

ModelConfig RunConfig::model_config() const {
    ModelConfig m;
    m.dims = dims;
    m.d_m = d_m;
    m.heads = heads;
    m.ablation = ablation;
    if (score_axis == "context")
        m.score_axis = ScoreAxis::context;
    else if (score_axis == "own")
        m.score_axis = ScoreAxis::own;
    else
        throw UsageError("model.score_axis must be 'context' or 'own', got '" + score_axis +
                         "'");
    m.strict_zero_norm = strict_zero_norm;
    return m;
}

MfftDtype RunConfig::dtype() const {
    if (precision == "f64") return MfftDtype::f64;
    if (precision == "f32") return MfftDtype::f32;
    throw UsageError("precision must be 'f64' or 'f32', got '" + precision + "'");
}

std::string RunConfig::resolved_log_path() const {
    return log_path.empty() ? data_dir + "/train_log.jsonl" : log_path;
}

std::string RunConfig::variant_name() const {
    if (ablation.no_image_branch) return "w/o ImageBranch";
    if (ablation.no_text_branch) return "w/o TextBranch";
    if (ablation.no_fusion) return "w/o FeatureFusion";
    if (ablation.no_enhance) return "w/o EnhanceFusion";
    if (ablation.no_similarity) return "w/o Similarity";
    return "MFF-Net";
}

namespace {

template <typename T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw UsageError("config key '" + key + "' has the wrong type: " + v.dump());
    }
}

void apply_json_key(RunConfig& c, const std::string& key, const json& v) {
    auto u64 = [&] { return get_as<std::uint64_t>(v, key); };
    auto sz = [&] { return get_as<std::size_t>(v, key); };
    auto dbl = [&] { return get_as<double>(v, key); };
    auto bl = [&] { return get_as<bool>(v, key); };
    auto str = [&] { return get_as<std::string>(v, key); };

    if (key == "dims.n") c.dims.n = sz();
    else if (key == "dims.p") c.dims.p = sz();
    else if (key == "dims.d_t") c.dims.d_t = sz();
    else if (key == "dims.d_i") c.dims.d_i = sz();
    else if (key == "dims.d_g") c.dims.d_g = sz();
    else if (key == "synth.train_count") c.synth.train_count = sz();
    else if (key == "synth.test_count") c.synth.test_count = sz();
    else if (key == "synth.gamma") c.synth.gamma = dbl();
    else if (key == "synth.patch_fraction") c.synth.patch_fraction = dbl();
    else if (key == "synth.local_fraction") c.synth.local_fraction = dbl();
    else if (key == "synth.noise_sigma") c.synth.noise_sigma = dbl();
    else if (key == "synth.seed") c.synth.seed = u64();
    else if (key == "train.batch_size") c.train.batch_size = sz();
    else if (key == "train.epochs") c.train.epochs = sz();
    else if (key == "train.learning_rate") c.train.learning_rate = dbl();
    else if (key == "train.beta1") c.train.beta1 = dbl();
    else if (key == "train.beta2") c.train.beta2 = dbl();
    else if (key == "train.eps") c.train.eps = dbl();
    else if (key == "train.grad_clip") c.train.grad_clip = dbl();
    else if (key == "train.seed") c.train.seed = u64();
    else if (key == "model.d_m") c.d_m = sz();
    else if (key == "model.heads") c.heads = sz();
    else if (key == "model.score_axis") c.score_axis = str();
    else if (key == "model.strict_zero_norm") c.strict_zero_norm = bl();
    else if (key == "ablation.no_image_branch") c.ablation.no_image_branch = bl();
    else if (key == "ablation.no_text_branch") c.ablation.no_text_branch = bl();
    else if (key == "ablation.no_fusion") c.ablation.no_fusion = bl();
    else if (key == "ablation.no_enhance") c.ablation.no_enhance = bl();
    else if (key == "ablation.no_similarity") c.ablation.no_similarity = bl();
    else if (key == "precision") c.precision = str();
    else if (key == "paths.data_dir") c.data_dir = str();
    else if (key == "paths.checkpoint") c.checkpoint = str();
    else if (key == "paths.log") c.log_path = str();
    else if (key == "eval.threshold") c.threshold = dbl();
    else throw UsageError("unknown config key '" + key + "'");
}

} // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config file not found: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw UsageError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    RunConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) apply_json_key(c, it.key(), it.value());
    return c;
}

void apply_key(RunConfig& config, const std::string& key, const std::string& json_value) {
    json v;
    try {
        v = json::parse(json_value);
    } catch (const json::exception&) {
        v = json_value;  // bare strings allowed
    }
    apply_json_key(config, key, v);
}

void apply_override(RunConfig& config, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw UsageError("override must look like key=value, got '" + kv + "'");
    apply_key(config, kv.substr(0, eq), kv.substr(eq + 1));
}

std::string dump_run_config(const RunConfig& c) {
    json j{{"dims.n", c.dims.n},
           {"dims.p", c.dims.p},
           {"dims.d_t", c.dims.d_t},
           {"dims.d_i", c.dims.d_i},
           {"dims.d_g", c.dims.d_g},
           {"synth.train_count", c.synth.train_count},
           {"synth.test_count", c.synth.test_count},
           {"synth.gamma", c.synth.gamma},
           {"synth.patch_fraction", c.synth.patch_fraction},
           {"synth.local_fraction", c.synth.local_fraction},
           {"synth.noise_sigma", c.synth.noise_sigma},
           {"synth.seed", c.synth.seed},
           {"train.batch_size", c.train.batch_size},
           {"train.epochs", c.train.epochs},
           {"train.learning_rate", c.train.learning_rate},
           {"train.beta1", c.train.beta1},
           {"train.beta2", c.train.beta2},
           {"train.eps", c.train.eps},
           {"train.grad_clip", c.train.grad_clip},
           {"train.seed", c.train.seed},
           {"model.d_m", c.d_m},
           {"model.heads", c.heads},
           {"model.score_axis", c.score_axis},
           {"model.strict_zero_norm", c.strict_zero_norm},
           {"ablation.no_image_branch", c.ablation.no_image_branch},
           {"ablation.no_text_branch", c.ablation.no_text_branch},
           {"ablation.no_fusion", c.ablation.no_fusion},
           {"ablation.no_enhance", c.ablation.no_enhance},
           {"ablation.no_similarity", c.ablation.no_similarity},
           {"precision", c.precision},
           {"paths.data_dir", c.data_dir},
           {"paths.checkpoint", c.checkpoint},
           {"paths.log", c.log_path},
           {"eval.threshold", c.threshold}};
    return j.dump(2);
}

} // namespace mff
