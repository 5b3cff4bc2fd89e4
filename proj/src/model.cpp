#include "mff/model.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

namespace mff {

std::size_t ModelConfig::feature_count() const {
    std::size_t k = 0;
    if (!ablation.no_image_branch) ++k;
    if (!ablation.no_text_branch) ++k;
    if (!ablation.no_fusion) ++k;
    return k;
}

ClassifierParams ClassifierParams::init(std::size_t in_dim, std::size_t d_h,
                                        std::mt19937_64& rng) {
    ClassifierParams p;
    p.w1 = uniform_param({in_dim, d_h}, in_dim, rng);
    p.b1 = const_param({d_h}, 0.0);
    p.w2 = uniform_param({d_h, 1}, d_h, rng);
    p.b2 = const_param({1}, 0.0);
    return p;
}

void ClassifierParams::visit(const std::string& prefix, const ParamVisitor& fn) {
    fn(prefix + ".w1", w1);
    fn(prefix + ".b1", b1);
    fn(prefix + ".w2", w2);
    fn(prefix + ".b2", b2);
}

ModelParams ModelParams::init(const ModelConfig& config, std::uint64_t seed) {
    if (config.feature_count() == 0)
        throw DimensionError("ablation flags leave the classifier with no input features");
    std::mt19937_64 rng(seed);
    ModelParams m;
    m.config = config;
    const auto& d = config.dims;
    m.proj_text_w = uniform_param({d.d_t, config.d_m}, d.d_t, rng);
    m.proj_text_b = const_param({config.d_m}, 0.0);
    m.proj_image_w = uniform_param({d.d_i, config.d_m}, d.d_i, rng);
    m.proj_image_b = const_param({config.d_m}, 0.0);
    m.fusion = FusionParams::init(config.d_m, config.heads, !config.ablation.no_enhance,
                                  !config.ablation.no_fusion, rng);
    if (!config.ablation.no_image_branch)
        m.sa_image = SelfAttentionParams::init(config.d_m, config.heads, rng);
    if (!config.ablation.no_text_branch)
        m.sa_text = SelfAttentionParams::init(config.d_m, config.heads, rng);
    m.classifier = ClassifierParams::init(config.classifier_input_dim(), config.d_m, rng);
    return m;
}

void ModelParams::visit(const ParamVisitor& fn) {
    fn("proj_text.w", proj_text_w);
    fn("proj_text.b", proj_text_b);
    fn("proj_image.w", proj_image_w);
    fn("proj_image.b", proj_image_b);
    fusion.visit("fusion", fn);
    if (!config.ablation.no_image_branch) sa_image.visit("filter.sa_image", fn);
    if (!config.ablation.no_text_branch) sa_text.visit("filter.sa_text", fn);
    classifier.visit("classifier", fn);
}

std::size_t ModelParams::param_count() {
    std::size_t total = 0;
    visit([&](const std::string&, Tensor& t) { total += t.size(); });
    return total;
}

std::vector<Tensor> ModelParams::all_params() {
    std::vector<Tensor> out;
    visit([&](const std::string&, Tensor& t) { out.push_back(t); });
    return out;
}

void ModelParams::zero_grads() {
    visit([](const std::string&, Tensor& t) { t.zero_grad(); });
}

double cosine_sim(const Tensor& c_t, const Tensor& c_i, bool strict) {
    if (c_t.shape() != c_i.shape())
        throw DimensionError("cosine_sim: shapes differ, " + shape_str(c_t.shape()) + " vs " +
                             shape_str(c_i.shape()));
    double dot = 0.0, nt = 0.0, ni = 0.0;
    for (std::size_t j = 0; j < c_t.size(); ++j) {
        dot += c_t.data()[j] * c_i.data()[j];
        nt += c_t.data()[j] * c_t.data()[j];
        ni += c_i.data()[j] * c_i.data()[j];
    }
    if (nt == 0.0 || ni == 0.0) {
        if (strict) throw NumericalError("cosine_sim: zero-norm global feature vector");
        std::cerr << "warning: zero-norm global feature vector, using similarity 0\n";
        return 0.0;
    }
    return std::clamp(dot / (std::sqrt(nt) * std::sqrt(ni)), -1.0, 1.0);
}

double normalize_sim(double f_s) {
    return (1.0 + f_s) / 2.0;
}

Tensor classify(const std::vector<Tensor>& features, const ClassifierParams& params) {
    Tensor cat = concat(features, 0);
    Tensor x = reshape(cat, {1, cat.size()});
    Tensor hidden = relu(matmul(x, params.w1) + params.b1);
    Tensor logit = matmul(hidden, params.w2) + params.b2;
    return sigmoid(reshape(logit, {}));
}

Tensor model_forward(const NewsSample& sample, const ModelParams& params,
                     Diagnostics* diag) {
    const ModelConfig& cfg = params.config;
    Tensor text_proj = matmul(sample.r_t, params.proj_text_w) + params.proj_text_b;
    Tensor image_proj = matmul(sample.r_i, params.proj_image_w) + params.proj_image_b;

    Tensor consistency, text_seq, image_seq;
    if (!cfg.ablation.no_fusion) {
        FusionOutput fo = fuse(text_proj, image_proj, params.fusion);
        consistency = fo.consistency;
        text_seq = fo.text_seq;
        image_seq = fo.image_seq;
    } else {
        // the branches still need the strengthened sequences from the first pair
        auto [text_out, image_out] = co_attention_pair(text_proj, image_proj,
                                                       params.fusion.pair1);
        text_seq = text_out.seq;
        image_seq = image_out.seq;
    }

    double sim = 0.5;
    if (cfg.force_sim) {
        sim = *cfg.force_sim;
    } else if (!cfg.ablation.no_similarity) {
        sim = normalize_sim(cosine_sim(sample.c_t, sample.c_i, cfg.strict_zero_norm));
    }
    if (diag) diag->sim = sim;

    std::vector<Tensor> features;
    if (!cfg.ablation.no_image_branch) {
        BranchOutput b = run_branch(image_proj, image_seq, params.sa_image, cfg.score_axis);
        features.push_back(scale(b.inconsistency, sim));
        if (diag) {
            diag->r_is_image = b.consistency_scores.data();
            diag->r_incon_image = b.inconsistency_scores.data();
        }
    }
    if (!cfg.ablation.no_text_branch) {
        BranchOutput b = run_branch(text_proj, text_seq, params.sa_text, cfg.score_axis);
        features.push_back(scale(b.inconsistency, sim));
        if (diag) {
            diag->r_is_text = b.consistency_scores.data();
            diag->r_incon_text = b.inconsistency_scores.data();
        }
    }
    if (!cfg.ablation.no_fusion) features.push_back(scale(consistency, 1.0 - sim));

    Tensor y = classify(features, params.classifier);
    if (diag) diag->prediction = y.item();
    return y;
}

std::uint64_t config_hash(const ModelConfig& c) {
    std::ostringstream os;
    os << "n=" << c.dims.n << ";p=" << c.dims.p << ";d_t=" << c.dims.d_t
       << ";d_i=" << c.dims.d_i << ";d_g=" << c.dims.d_g << ";d_m=" << c.d_m
       << ";heads=" << c.heads << ";no_image=" << c.ablation.no_image_branch
       << ";no_text=" << c.ablation.no_text_branch << ";no_fusion=" << c.ablation.no_fusion
       << ";no_enhance=" << c.ablation.no_enhance
       << ";no_similarity=" << c.ablation.no_similarity
       << ";score_axis=" << (c.score_axis == ScoreAxis::context ? "context" : "own");
    const std::string s = os.str();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash_hex(const ModelConfig& config) {
    std::ostringstream os;
    os << std::hex << config_hash(config);
    return os.str();
}

} // namespace mff
