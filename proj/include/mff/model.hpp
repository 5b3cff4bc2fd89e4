#ifndef MFF_MODEL_HPP
#define MFF_MODEL_HPP

#include <optional>

#include "mff/filter.hpp"
#include "mff/fusion.hpp"
#include "mff/providers.hpp"

namespace mff {

struct AblationFlags {
    bool no_image_branch = false;
    bool no_text_branch = false;
    bool no_fusion = false;
    bool no_enhance = false;
    bool no_similarity = false;
};

struct ModelConfig {
    DatasetDims dims;
    std::size_t d_m = 64;
    std::size_t heads = 4;
    AblationFlags ablation;
    ScoreAxis score_axis = ScoreAxis::context;
    bool strict_zero_norm = false;
    /// test hook: pin the similarity weight instead of computing it
    std::optional<double> force_sim;

    std::size_t feature_count() const;
    std::size_t classifier_input_dim() const { return feature_count() * d_m; }
};

struct ClassifierParams {
    Tensor w1, b1;  // [in, d_h]
    Tensor w2, b2;  // [d_h, 1]

    static ClassifierParams init(std::size_t in_dim, std::size_t d_h, std::mt19937_64& rng);
    void visit(const std::string& prefix, const ParamVisitor& fn);
};

struct ModelParams {
    ModelConfig config;
    Tensor proj_text_w, proj_text_b;    // [d_t, d_m]
    Tensor proj_image_w, proj_image_b;  // [d_i, d_m]
    FusionParams fusion;                // pair1 always; head only without no_fusion
    SelfAttentionParams sa_image;       // absent under no_image_branch
    SelfAttentionParams sa_text;        // absent under no_text_branch
    ClassifierParams classifier;

    static ModelParams init(const ModelConfig& config, std::uint64_t seed);
    void visit(const ParamVisitor& fn);
    std::size_t param_count();
    std::vector<Tensor> all_params();
    void zero_grads();
};

// -- adaptive weighting (scalar path, inputs are provider-fixed) --------------

/// Cosine similarity of the two global vectors, in [-1, 1]. A zero-norm input
/// raises in strict mode and otherwise falls back to 0 with a warning.
double cosine_sim(const Tensor& c_t, const Tensor& c_i, bool strict = true);
double normalize_sim(double f_s);  // (1 + f_s) / 2

struct WeightedFeatures {
    Tensor image, text, consistency;  // R_If, R_Tf, R_Mf (undefined when ablated)
    double sim = 0.5;
};

Tensor classify(const std::vector<Tensor>& features, const ClassifierParams& params);

struct Diagnostics {
    double sim = 0.5;
    double prediction = 0.0;
    std::vector<double> r_is_text, r_is_image;
    std::vector<double> r_incon_text, r_incon_image;
};

/// Full pipeline: projections, fusion, the two filter branches, similarity
/// weighting, classifier. Returns the scalar fake probability.
Tensor model_forward(const NewsSample& sample, const ModelParams& params,
                     Diagnostics* diag = nullptr);

/// Stable hash of everything that determines parameter shapes and training
/// semantics; checkpoints refuse to load under a different hash.
std::uint64_t config_hash(const ModelConfig& config);
std::string config_hash_hex(const ModelConfig& config);

} // namespace mff

#endif
