#ifndef MFF_CONFIG_HPP
#define MFF_CONFIG_HPP

#include <string>
#include <vector>

#include "mff/providers.hpp"
#include "mff/train.hpp"

namespace mff {

class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Union of everything a run needs, loadable from a flat JSON object with
/// dotted keys ("train.epochs": 100) and overridable by key=value strings.
/// Unknown keys are rejected.
struct RunConfig {
    DatasetDims dims;
    SynthConfig synth;
    TrainConfig train;
    std::size_t d_m = 64;
    std::size_t heads = 4;
    AblationFlags ablation;
    std::string score_axis = "context";
    bool strict_zero_norm = false;
    std::string precision = "f64";  // f64 | f32 (file payload dtype)
    std::string data_dir = "data";
    std::string checkpoint = "model.ckpt";
    std::string log_path = "";  // default: <data_dir>/train_log.jsonl
    double threshold = 0.5;

    ModelConfig model_config() const;
    MfftDtype dtype() const;
    std::string resolved_log_path() const;
    /// Table-2 style variant name derived from the ablation flags.
    std::string variant_name() const;
};

RunConfig load_run_config(const std::string& path);
void apply_override(RunConfig& config, const std::string& key_equals_value);
void apply_key(RunConfig& config, const std::string& key, const std::string& json_value);

/// Fully-resolved config as a flat JSON object (every known key).
std::string dump_run_config(const RunConfig& config);

} // namespace mff

#endif
